"""mtfkit: estimate the MTF of an imaging system from sample images.

The estimator works directly on an arbitrary image: it takes the 2-D log
power spectrum, reduces it to a radial profile against squared frequency,
fits the linear segment that a Gaussian PSF produces there, and converts
the fitted width into an MTF curve. Companion modules synthesize
PSF-convolved test images and square-wave resolution patterns, predict
kernel MTFs for comparison, and provide a slanted-edge reference method.
"""

from . import errors
from .curves import MtfCurve, max_abs_difference
from .edge import EdgeProfile, Lsf, extract_edge_profile, lsf_from_edge, mtf_from_lsf
from .image import (
    GrayImage,
    Rect,
    bin_image,
    clip_roi,
    load_image,
    save_image,
)
from .kernels import (
    GAUSS_FWHM,
    Kernel,
    PsfSpec,
    convolve_subpixel,
    make_kernel,
    pattern_band_rects,
    pattern_contrast,
    predicted_mtf,
    square_wave_pattern,
)
from .psf_fit import (
    FitRegion,
    GaussianPsfEstimate,
    J1_FIRST_ZERO,
    MtfReport,
    aperture_cutoff,
    estimate_mtf,
    fit_gaussian_psf,
    mtf_from_sigma,
    select_fit_region,
)
from .spectrum import (
    LogPowerSpectrum,
    RadialProfile,
    log_power_spectrum,
    prepare_for_fft,
    radial_profile,
    sector_profile,
)

__version__ = "0.1.0"

__all__ = [
    "GAUSS_FWHM",
    "J1_FIRST_ZERO",
    "EdgeProfile",
    "FitRegion",
    "GaussianPsfEstimate",
    "GrayImage",
    "Kernel",
    "LogPowerSpectrum",
    "Lsf",
    "MtfCurve",
    "MtfReport",
    "PsfSpec",
    "RadialProfile",
    "Rect",
    "aperture_cutoff",
    "bin_image",
    "clip_roi",
    "convolve_subpixel",
    "errors",
    "estimate_mtf",
    "extract_edge_profile",
    "fit_gaussian_psf",
    "load_image",
    "log_power_spectrum",
    "lsf_from_edge",
    "make_kernel",
    "max_abs_difference",
    "mtf_from_lsf",
    "mtf_from_sigma",
    "pattern_band_rects",
    "pattern_contrast",
    "predicted_mtf",
    "prepare_for_fft",
    "radial_profile",
    "save_image",
    "sector_profile",
    "select_fit_region",
    "square_wave_pattern",
]
