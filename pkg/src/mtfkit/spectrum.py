"""FFT preparation, 2-D log power spectrum, and radial/sector profiles.

The radial profile is the method's working object: the natural log of the
squared transform magnitude, averaged over annuli and plotted against
squared frequency. An image blurred by a Gaussian PSF of width sigma shows
a linear segment of slope -4*pi^2*sigma^2 there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySector, ImageTooSmall
from .image import GrayImage

DEFAULT_RAMP = 16
DEFAULT_BIN_WIDTH = 5


def _next_pow2(n: int) -> int:
    return 1 << max(0, (int(n) - 1)).bit_length()


@dataclass(frozen=True)
class LogPowerSpectrum:
    """ln|F(k)|^2 per frequency sample of an unnormalized forward DFT.

    The DC sample sits at array index (0, 0); sample (i, j) has frequency
    (j/width, i/height) cycles/pixel with wrap-around mapping to signed
    frequencies. Samples where |F| = 0 hold -inf and are excluded from
    profiles.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 2:
            raise ValueError("values must be 2-D")
        if np.any(np.isnan(vals)) or np.any(np.isposinf(vals)):
            raise ValueError("values must be finite or -inf")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def freq_step(self) -> tuple[float, float]:
        """Cycles/pixel per sample along (y, x)."""
        return (1.0 / self.height, 1.0 / self.width)


@dataclass(frozen=True)
class RadialProfile:
    """Annulus-averaged log power versus squared frequency.

    k2 is the squared frequency at each annulus center (cycles^2/pixel^2),
    mean_log_power the average of finite ln|F|^2 samples in the annulus,
    and count how many samples contributed.
    """

    k2: np.ndarray
    mean_log_power: np.ndarray
    count: np.ndarray
    bin_width_px: float

    def __post_init__(self):
        k2 = np.ascontiguousarray(np.asarray(self.k2, dtype=np.float64))
        mlp = np.ascontiguousarray(np.asarray(self.mean_log_power, dtype=np.float64))
        cnt = np.ascontiguousarray(np.asarray(self.count, dtype=np.int64))
        if not (k2.ndim == 1 and k2.shape == mlp.shape == cnt.shape):
            raise ValueError("k2, mean_log_power and count must match")
        if np.any(np.diff(k2) <= 0):
            raise ValueError("bins must be ordered by ascending k2")
        if np.any(cnt < 1):
            raise ValueError("every bin needs at least one sample")
        for arr, name in ((k2, "k2"), (mlp, "mean_log_power"), (cnt, "count")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_bins(self) -> int:
        return self.k2.size


def prepare_for_fft(
    img: GrayImage, ramp_width: int = DEFAULT_RAMP, margin: int | None = None
) -> GrayImage:
    """Suppress truncation artifacts before the transform.

    A border band of `ramp_width` pixels is blended linearly from the
    original intensity (inner edge) down to the whole-image mean at the
    outer edge, then the image is surrounded by mean-valued margin pixels
    and mean-padded up to the next power-of-two size. With `margin=None`
    the padded size is the next power of two >= 1.25x the larger dimension
    on both axes; an explicit margin grows each axis by 2*margin before
    padding. The mean-valued (rather than zero) fill keeps the added area
    spectrally silent away from DC.
    """
    if ramp_width < 0 or (margin is not None and margin < 0):
        raise ValueError("ramp_width and margin must be >= 0")
    h, w = img.height, img.width
    mu = float(img.pixels.mean())
    core = img.pixels
    if ramp_width > 0:
        y = np.arange(h)[:, None]
        x = np.arange(w)[None, :]
        dist = np.minimum(np.minimum(y, h - 1 - y), np.minimum(x, w - 1 - x))
        alpha = np.minimum(dist / ramp_width, 1.0)
        core = mu + (core - mu) * alpha
    if margin is None:
        target = _next_pow2(math.ceil(1.25 * max(h, w)))
        final_h = final_w = target
    else:
        final_h = _next_pow2(h + 2 * margin)
        final_w = _next_pow2(w + 2 * margin)
    canvas = np.full((final_h, final_w), mu)
    oy, ox = (final_h - h) // 2, (final_w - w) // 2
    canvas[oy : oy + h, ox : ox + w] = core
    return GrayImage(canvas, img.pixel_size)


def log_power_spectrum(img: GrayImage) -> LogPowerSpectrum:
    """ln of the squared norm of the unnormalized 2-D DFT."""
    if img.height < 16 or img.width < 16:
        raise ImageTooSmall("need at least 16x16 pixels for a spectrum")
    power = np.abs(np.fft.fft2(img.pixels)) ** 2
    with np.errstate(divide="ignore"):
        values = np.log(power)
    return LogPowerSpectrum(values)


def _binned_profile(
    spec: LogPowerSpectrum, bin_width_px: float, sector_mask: np.ndarray | None
) -> RadialProfile | None:
    h, w = spec.height, spec.width
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    k2 = fy * fy + fx * fx
    # Annuli measured in spectral pixels of the finer axis; for square
    # spectra this is exactly the wrap-around pixel distance from DC.
    n_ref = max(h, w)
    r_px = n_ref * np.sqrt(k2)
    mask = np.isfinite(spec.values) & (r_px > 0)
    if sector_mask is not None:
        mask &= sector_mask
    if not mask.any():
        return None
    idx = (r_px[mask] / bin_width_px).astype(np.intp)
    sums = np.bincount(idx, weights=spec.values[mask])
    counts = np.bincount(idx)
    present = counts > 0
    centers = (np.nonzero(present)[0] + 0.5) * (bin_width_px / n_ref)
    return RadialProfile(
        centers**2, sums[present] / counts[present], counts[present], bin_width_px
    )


def radial_profile(
    spec: LogPowerSpectrum, bin_width_px: float = DEFAULT_BIN_WIDTH
) -> RadialProfile:
    """Average ln|F|^2 over annuli of `bin_width_px` spectral pixels.

    The DC sample (the origin spike, equal to the squared pixel sum) is
    always excluded, as are -inf samples; empty annuli are omitted.
    """
    if bin_width_px < 1:
        raise ValueError("bin_width_px must be >= 1")
    profile = _binned_profile(spec, bin_width_px, None)
    if profile is None:
        raise EmptySector("spectrum has no finite non-DC samples")
    return profile


def sector_profile(
    spec: LogPowerSpectrum,
    center_angle: float,
    half_width: float,
    bin_width_px: float = DEFAULT_BIN_WIDTH,
) -> RadialProfile:
    """radial_profile restricted to a direction sector.

    Keeps samples whose frequency vector lies within +-half_width of
    center_angle modulo pi (the power spectrum of a real image is
    centrosymmetric). half_width = pi/2 degenerates to the full circle.
    Useful when astigmatism makes the blur direction-dependent.
    """
    if bin_width_px < 1:
        raise ValueError("bin_width_px must be >= 1")
    if not 0 < half_width <= math.pi / 2:
        raise ValueError("half_width must be in (0, pi/2]")
    h, w = spec.height, spec.width
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    delta = (np.arctan2(fy, fx) - center_angle) % math.pi
    dist = np.minimum(delta, math.pi - delta)
    profile = _binned_profile(spec, bin_width_px, dist <= half_width + 1e-12)
    if profile is None:
        raise EmptySector(
            f"no samples within {half_width:.3g} rad of angle {center_angle:.3g}"
        )
    return profile
