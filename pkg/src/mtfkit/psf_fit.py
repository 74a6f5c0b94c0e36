"""Gaussian PSF estimation from the log-power radial profile.

The central relation: for an image blurred by an isotropic Gaussian PSF of
standard deviation sigma, ln|F(k)|^2 is linear in |k|^2 with slope
-4*pi^2*sigma^2. Selecting the linear region of the radial profile,
fitting it by least squares, and exponentiating the fitted Gaussian's
transform yields the MTF estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .curves import MtfCurve
from .errors import (
    ImageTooSmall,
    MissingHint,
    NoLinearRegion,
    NonNegativeSlope,
    PoorFit,
)
from .image import GrayImage, Rect, clip_roi
from .kernels import GAUSS_FWHM, KIND_APERTURE, PsfSpec
from .spectrum import (
    DEFAULT_BIN_WIDTH,
    DEFAULT_RAMP,
    RadialProfile,
    log_power_spectrum,
    prepare_for_fft,
    radial_profile,
    sector_profile,
)

# First positive zero of the Bessel function J1; the transform of a
# uniform disk of radius a first vanishes at k = J1_FIRST_ZERO/(2*pi*a).
J1_FIRST_ZERO = 3.8317059702075125

STRATEGIES = ("airy_lobe_fraction", "kink_detection", "explicit")

MIN_FIT_BINS = 5
MIN_PROFILE_BINS = 10
MIN_IMAGE_SIDE = 64


def aperture_cutoff(radius: float) -> float:
    """First zero of a circular aperture's MTF, cycles/pixel."""
    return J1_FIRST_ZERO / (2.0 * math.pi * radius)


@dataclass(frozen=True)
class FitRegion:
    """Resolved fit window: squared-frequency bounds plus bin indices."""

    strategy: str
    k2_min: float
    k2_max: float
    start: int
    stop: int  # exclusive

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not self.k2_min < self.k2_max:
            raise ValueError("k2_min must be below k2_max")
        if self.stop - self.start < MIN_FIT_BINS:
            raise NoLinearRegion(
                f"fit region holds {self.stop - self.start} bins, "
                f"need {MIN_FIT_BINS}"
            )

    @property
    def n_bins(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class GaussianPsfEstimate:
    """Fitted Gaussian PSF width with fit diagnostics.

    sigma_band holds the widths implied by perturbing the fitted slope
    magnitude by -10%/+10%, the conventional uncertainty bracket for this
    kind of plot.
    """

    sigma: float
    fwhm: float
    slope: float
    intercept: float
    r2: float
    region: FitRegion
    sigma_band: tuple[float, float]


@dataclass(frozen=True)
class MtfReport:
    """estimate_mtf result with all intermediates kept for audit."""

    estimate: GaussianPsfEstimate
    curve: MtfCurve
    profile: RadialProfile
    roi: Rect | None = None
    pixel_size: float | None = None
    options: dict[str, Any] = field(default_factory=dict)


def select_fit_region(
    profile: RadialProfile,
    strategy: str = "kink_detection",
    hint: PsfSpec | float | None = None,
    k2_bounds: tuple[float, float] | None = None,
    lobe_fraction: float = 0.8,
    lobe_axis: str = "k",
    floor_fraction: float = 0.2,
    mad_factor: float = 3.0,
) -> FitRegion:
    """Choose the linear-correlation window of a radial profile.

    Strategies
    ----------
    airy_lobe_fraction
        Fit up to `lobe_fraction` of the aperture transform's first lobe;
        needs the aperture radius as `hint` (a PsfSpec or a float,
        pixels). With lobe_axis="k" the fraction applies to the first-zero
        frequency and is then squared; "k2" applies it on the squared-
        frequency axis directly.
    kink_detection
        Estimate the noise floor from the top `floor_fraction` of bins
        (median and MAD) and cut at the first bin that reaches
        floor + mad_factor*MAD. If those bins are still falling rather
        than flat there is no floor in range and the fit runs through the
        last bin.
    explicit
        Caller-provided (k2_min, k2_max) bounds, validated.

    Raises NoLinearRegion when fewer than 5 bins survive; that is the
    characteristic failure mode of noise-dominated or sparse images.
    """
    if profile.n_bins < MIN_PROFILE_BINS:
        raise NoLinearRegion(
            f"profile has {profile.n_bins} bins, need {MIN_PROFILE_BINS}"
        )
    k2 = profile.k2
    if strategy in ("airy_lobe_fraction", "airy"):
        radius = hint.radius if isinstance(hint, PsfSpec) else hint
        if isinstance(hint, PsfSpec) and hint.kind != KIND_APERTURE:
            radius = None
        if radius is None:
            raise MissingHint("airy_lobe_fraction needs an aperture radius")
        k0 = aperture_cutoff(radius)
        if lobe_axis == "k":
            k2_max = (lobe_fraction * k0) ** 2
        elif lobe_axis == "k2":
            k2_max = lobe_fraction * k0**2
        else:
            raise ValueError("lobe_axis must be 'k' or 'k2'")
        stop = int(np.searchsorted(k2, k2_max, side="right"))
        return FitRegion("airy_lobe_fraction", float(k2[0]), k2_max, 0, stop)

    if strategy in ("kink_detection", "kink"):
        stop = _kink_cut(profile, floor_fraction, mad_factor)
        return FitRegion(
            "kink_detection", float(k2[0]), float(k2[stop - 1]), 0, stop
        )

    if strategy == "explicit":
        if k2_bounds is None:
            raise ValueError("explicit strategy needs k2_bounds")
        lo, hi = float(k2_bounds[0]), float(k2_bounds[1])
        if not lo < hi:
            raise ValueError("k2_bounds must satisfy k2_min < k2_max")
        start = int(np.searchsorted(k2, lo, side="left"))
        stop = int(np.searchsorted(k2, hi, side="right"))
        return FitRegion("explicit", lo, hi, start, stop)

    raise ValueError(f"unknown strategy {strategy!r}")


def _kink_cut(
    profile: RadialProfile,
    floor_fraction: float,
    mad_factor: float,
    bend_tolerance: float = 0.1,
) -> int:
    """Index of the first bin on the noise floor, or n_bins if no floor."""
    mlp = profile.mean_log_power
    k2 = profile.k2
    n = profile.n_bins
    m = max(3, math.ceil(floor_fraction * n))
    window = mlp[n - m :]
    floor = float(np.median(window))
    mad = float(np.median(np.abs(window - floor)))
    # Flatness gate: a window that is still falling by more than the
    # kink threshold across its own span is signal, not floor. The slope
    # is Theil-Sen (median of pairwise slopes) so that a few sparse
    # corner-annulus bins cannot fake a decline.
    wk2 = k2[n - m :]
    iu, ju = np.triu_indices(m, 1)
    wslope = float(np.median((window[ju] - window[iu]) / (wk2[ju] - wk2[iu])))
    drop = abs(wslope) * (wk2[-1] - wk2[0])
    if drop > mad_factor * mad:
        return n
    threshold = floor + mad_factor * mad
    if float(np.median(mlp[:MIN_FIT_BINS])) <= threshold:
        raise NoLinearRegion(
            "profile starts on the noise floor; no linear correlation to fit"
        )
    below = np.nonzero(mlp <= threshold)[0]
    if below.size == 0:
        return n
    kink = int(below[0])
    # Walk the cut back off the knee: near the floor the measured profile
    # is ln(signal + floor) and bends up from the linear correlation, so
    # trim trailing bins that sit above the fitted line.
    counts = profile.count.astype(np.float64)
    stop = kink
    while stop > MIN_FIT_BINS:
        slope, intercept, _ = _lls(k2[:stop], mlp[:stop], counts[:stop])
        resid = mlp[stop - 1] - (slope * k2[stop - 1] + intercept)
        if resid <= bend_tolerance:
            break
        stop -= 1
    return stop


def _lls(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[float, float, float]:
    """Weighted linear least squares; returns (slope, intercept, r2)."""
    wsum = w.sum()
    xb = (w * x).sum() / wsum
    yb = (w * y).sum() / wsum
    dx = x - xb
    dy = y - yb
    sxx = (w * dx * dx).sum()
    if sxx <= 0:
        raise NoLinearRegion("degenerate fit region: no k2 spread")
    slope = (w * dx * dy).sum() / sxx
    ss_tot = (w * dy * dy).sum()
    resid = dy - slope * dx
    ss_res = (w * resid * resid).sum()
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(yb - slope * xb), float(r2)


def fit_gaussian_psf(
    profile: RadialProfile,
    region: FitRegion,
    weighted: bool = True,
    r2_threshold: float = 0.9,
    force: bool = False,
) -> GaussianPsfEstimate:
    """Least-squares fit of mean log power against squared frequency.

    Bins are weighted by their sample count by default (outer annuli hold
    more spectral samples). The fitted slope must be negative; sigma
    follows as sqrt(-slope)/(2*pi). A fit with r2 below `r2_threshold`
    raises PoorFit unless `force` is set, in which case the caller gets
    the estimate with its r2 on record.
    """
    if region.stop > profile.n_bins:
        raise ValueError("region does not fit this profile")
    sl = slice(region.start, region.stop)
    w = profile.count[sl].astype(np.float64) if weighted else np.ones(region.n_bins)
    slope, intercept, r2 = _lls(profile.k2[sl], profile.mean_log_power[sl], w)
    if slope >= 0:
        raise NonNegativeSlope(
            f"slope {slope:.4g} is not negative; no blur detectable"
        )
    if r2 < r2_threshold and not force:
        raise PoorFit(f"r2 = {r2:.4f} below threshold {r2_threshold}")
    sigma = math.sqrt(-slope) / (2.0 * math.pi)
    band = (
        math.sqrt(0.9 * -slope) / (2.0 * math.pi),
        math.sqrt(1.1 * -slope) / (2.0 * math.pi),
    )
    return GaussianPsfEstimate(
        sigma=sigma,
        fwhm=GAUSS_FWHM * sigma,
        slope=slope,
        intercept=intercept,
        r2=r2,
        region=region,
        sigma_band=band,
    )


def mtf_from_sigma(
    sigma: float, freqs, sigma_band: tuple[float, float] | None = None
) -> MtfCurve:
    """MTF of a Gaussian PSF: m(k) = exp(-2*pi^2*sigma^2*k^2).

    When `sigma_band` is given, the returned curve carries a per-sample
    (low, high) modulation band from the bracketing widths.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    k = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    k2 = k * k

    def gauss(s: float) -> np.ndarray:
        return np.exp(-2.0 * math.pi**2 * s * s * k2)

    band = None
    if sigma_band is not None:
        lo_sigma, hi_sigma = sigma_band
        band = (gauss(hi_sigma), gauss(lo_sigma))
    return MtfCurve(k, gauss(sigma), "estimated_gaussian", band=band)


def estimate_mtf(
    img: GrayImage,
    roi: Rect | None = None,
    strategy: str = "kink_detection",
    hint: PsfSpec | float | None = None,
    k2_bounds: tuple[float, float] | None = None,
    bin_width: float = DEFAULT_BIN_WIDTH,
    ramp_width: int = DEFAULT_RAMP,
    margin: int | None = None,
    sector: tuple[float, float] | None = None,
    freqs=None,
    weighted: bool = True,
    r2_threshold: float = 0.9,
    force: bool = False,
    lobe_fraction: float = 0.8,
    lobe_axis: str = "k",
) -> MtfReport:
    """Full pipeline: image (or ROI) to Gaussian-PSF MTF estimate.

    Steps: clip the ROI, smooth edges and pad, take the 2-D log power
    spectrum, reduce to a radial profile (or a `sector` = (center_angle,
    half_width) profile for direction-resolved estimates), select the
    linear region, fit the Gaussian, synthesize the MTF curve. The report
    keeps the profile, fit diagnostics and options for audit.

    Raises NoLinearRegion for noise-dominated or sparse inputs; clipping
    the ROI down to the occupied part of such an image usually recovers a
    usable estimate.
    """
    work = clip_roi(img, roi) if roi is not None else img
    if work.height < MIN_IMAGE_SIDE or work.width < MIN_IMAGE_SIDE:
        raise ImageTooSmall(
            f"{work.width}x{work.height} region below the "
            f"{MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE} minimum"
        )
    prepared = prepare_for_fft(work, ramp_width=ramp_width, margin=margin)
    spec = log_power_spectrum(prepared)
    if sector is not None:
        profile = sector_profile(spec, sector[0], sector[1], bin_width)
    else:
        profile = radial_profile(spec, bin_width)
    region = select_fit_region(
        profile,
        strategy,
        hint=hint,
        k2_bounds=k2_bounds,
        lobe_fraction=lobe_fraction,
        lobe_axis=lobe_axis,
    )
    estimate = fit_gaussian_psf(
        profile, region, weighted=weighted, r2_threshold=r2_threshold, force=force
    )
    if freqs is None:
        freqs = np.linspace(0.0, 0.5, 251)
    curve = mtf_from_sigma(estimate.sigma, freqs, sigma_band=estimate.sigma_band)
    options = {
        "strategy": strategy,
        "bin_width": bin_width,
        "ramp_width": ramp_width,
        "margin": margin,
        "sector": sector,
        "weighted": weighted,
        "r2_threshold": r2_threshold,
        "lobe_fraction": lobe_fraction,
        "lobe_axis": lobe_axis,
    }
    return MtfReport(
        estimate=estimate,
        curve=curve,
        profile=profile,
        roi=roi,
        pixel_size=img.pixel_size,
        options=options,
    )
