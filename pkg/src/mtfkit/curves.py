"""MTF curve container and comparison helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROVENANCES = ("estimated_gaussian", "predicted_kernel", "edge_derived")


@dataclass(frozen=True)
class MtfCurve:
    """Sampled modulation-vs-frequency curve.

    Parameters
    ----------
    k : ndarray
        Frequencies in ascending order (cycles/pixel, or cycles per
        physical length when the producer worked in physical units).
    m : ndarray
        Modulation at each frequency; m = 1 at k = 0.
    provenance : str
        One of "estimated_gaussian", "predicted_kernel", "edge_derived".
    band : (ndarray, ndarray), optional
        Per-sample (low, high) modulation bounds.
    """

    k: np.ndarray
    m: np.ndarray
    provenance: str
    band: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        k = np.ascontiguousarray(np.asarray(self.k, dtype=np.float64))
        m = np.ascontiguousarray(np.asarray(self.m, dtype=np.float64))
        if k.ndim != 1 or k.shape != m.shape:
            raise ValueError("k and m must be 1-D arrays of equal length")
        if np.any(np.diff(k) <= 0):
            raise ValueError("frequencies must be strictly ascending")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        k.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "m", m)
        if self.band is not None:
            lo = np.ascontiguousarray(np.asarray(self.band[0], dtype=np.float64))
            hi = np.ascontiguousarray(np.asarray(self.band[1], dtype=np.float64))
            if lo.shape != k.shape or hi.shape != k.shape:
                raise ValueError("band arrays must match the sample grid")
            lo.setflags(write=False)
            hi.setflags(write=False)
            object.__setattr__(self, "band", (lo, hi))

    def sample(self, freqs) -> np.ndarray:
        """Linearly interpolate modulation at the requested frequencies."""
        return np.interp(np.asarray(freqs, dtype=np.float64), self.k, self.m)


def max_abs_difference(a: MtfCurve, b: MtfCurve, k_max: float | None = None,
                       num: int = 512) -> float:
    """Largest |a - b| over [0, k_max] on a common frequency grid.

    Defaults to the overlapping frequency range of the two curves.
    """
    top = min(a.k[-1], b.k[-1])
    if k_max is not None:
        top = min(top, float(k_max))
    grid = np.linspace(0.0, top, num)
    return float(np.max(np.abs(a.sample(grid) - b.sample(grid))))
