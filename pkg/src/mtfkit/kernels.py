"""Reference PSF kernels, sub-pixel convolution, predicted MTFs and
square-wave resolvability patterns.

Kernels are rasterized on a sub-pixel grid (`subdiv` sub-samples per pixel
along each axis) so that blur shapes narrower than a pixel are reproduced
faithfully in the synthesized test images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .curves import MtfCurve
from .errors import InvalidPitch, InvalidSpec, KernelTooLarge, TooFewPeriods
from .image import GrayImage, Rect, clip_roi

# FWHM of a Gaussian = GAUSS_FWHM * sigma.
GAUSS_FWHM = 2.0 * math.sqrt(2.0 * math.log(2.0))

# Mass truncation radius for rasterized Gaussians, in sigmas. The clipped
# tail holds < 1e-4 of the mass and the taps are renormalized afterwards.
GAUSS_TRUNC_SIGMAS = 4.0

KIND_APERTURE = "circular_aperture"
KIND_GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PsfSpec:
    """Point-spread-function specification.

    Either a uniform circular aperture of the given radius or an isotropic
    Gaussian of the given full width at half maximum, both in pixels.
    """

    kind: str
    radius: float | None = None
    fwhm: float | None = None

    def __post_init__(self):
        if self.kind == KIND_APERTURE:
            if self.radius is None or not self.radius > 0:
                raise InvalidSpec("aperture radius must be > 0")
        elif self.kind == KIND_GAUSSIAN:
            if self.fwhm is None or not self.fwhm > 0:
                raise InvalidSpec("gaussian fwhm must be > 0")
        else:
            raise InvalidSpec(f"unknown PSF kind {self.kind!r}")

    @classmethod
    def aperture(cls, radius: float) -> "PsfSpec":
        return cls(KIND_APERTURE, radius=float(radius))

    @classmethod
    def gaussian(cls, fwhm: float) -> "PsfSpec":
        return cls(KIND_GAUSSIAN, fwhm=float(fwhm))

    @classmethod
    def parse(cls, text: str) -> "PsfSpec":
        """Parse "aperture:R" or "gaussian:FWHM" (sizes in pixels)."""
        kind, sep, value = text.partition(":")
        if not sep:
            raise InvalidSpec(f"expected KIND:SIZE, got {text!r}")
        try:
            size = float(value)
        except ValueError as exc:
            raise InvalidSpec(f"bad PSF size {value!r}") from exc
        if kind in ("aperture", KIND_APERTURE):
            return cls.aperture(size)
        if kind in ("gaussian", KIND_GAUSSIAN):
            return cls.gaussian(size)
        raise InvalidSpec(f"unknown PSF kind {kind!r}")

    @property
    def sigma(self) -> float:
        """Gaussian standard deviation in pixels."""
        if self.kind != KIND_GAUSSIAN:
            raise InvalidSpec("sigma is defined for gaussian PSFs only")
        return self.fwhm / GAUSS_FWHM


@dataclass(frozen=True)
class Kernel:
    """PSF rasterized on a sub-pixel grid, normalized to unit sum."""

    taps: np.ndarray
    subdiv: int
    support_radius: float  # pixels

    def __post_init__(self):
        taps = np.ascontiguousarray(np.asarray(self.taps, dtype=np.float64))
        if taps.ndim != 2:
            raise ValueError("taps must be 2-D")
        if abs(taps.sum() - 1.0) > 1e-9:
            raise ValueError("taps must sum to 1")
        if not np.allclose(taps, taps[::-1, ::-1], rtol=0.0, atol=1e-12):
            raise ValueError("taps must be centrosymmetric")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)


def make_kernel(spec: PsfSpec, subdiv: int = 4) -> Kernel:
    """Rasterize a PSF on a grid of `subdiv` sub-samples per pixel.

    Circular apertures use a sub-sample center-in-disk test (no
    area-weighted anti-aliasing); Gaussians are sampled and truncated at
    GAUSS_TRUNC_SIGMAS sigmas. Either way the taps are normalized to
    unit sum.
    """
    if subdiv < 1:
        raise InvalidSpec("subdiv must be >= 1")
    subdiv = int(subdiv)
    if spec.kind == KIND_APERTURE:
        half = math.ceil(spec.radius * subdiv)
        support = spec.radius
    else:
        sigma = spec.sigma
        half = math.ceil(GAUSS_TRUNC_SIGMAS * sigma * subdiv)
        support = GAUSS_TRUNC_SIGMAS * sigma
    coords = np.arange(-half, half + 1, dtype=np.float64) / subdiv
    r2 = coords[:, None] ** 2 + coords[None, :] ** 2
    if spec.kind == KIND_APERTURE:
        taps = (r2 <= spec.radius**2).astype(np.float64)
    else:
        taps = np.exp(-r2 / (2.0 * sigma**2))
        taps[r2 > support**2] = 0.0
    return Kernel(taps / taps.sum(), subdiv, support)


def convolve_subpixel(img: GrayImage, kernel: Kernel) -> GrayImage:
    """Blur an image with a sub-pixel kernel.

    The image is upsampled to the kernel's grid by sub-sample replication,
    convolved (clamp-to-edge boundary), then box-averaged back to the
    original dimensions.
    """
    s = kernel.subdiv
    th, tw = kernel.taps.shape
    h, w = img.height, img.width
    if th > h * s or tw > w * s:
        raise KernelTooLarge(
            f"{th}x{tw} taps exceed the {h * s}x{w * s} sub-pixel image"
        )
    fine = np.repeat(np.repeat(img.pixels, s, axis=0), s, axis=1)
    padded = np.pad(fine, ((th // 2,) * 2, (tw // 2,) * 2), mode="edge")
    conv = fftconvolve(padded, kernel.taps, mode="valid")
    out = conv.reshape(h, s, w, s).mean(axis=(1, 3))
    return GrayImage(out, img.pixel_size)


def predicted_mtf(
    spec: PsfSpec, freqs, oversample: int = 8, n_angles: int = 64
) -> MtfCurve:
    """MTF of a PSF via the discrete Fourier transform of its raster.

    The kernel is rasterized at `oversample` sub-samples per pixel and
    transformed on a zero-padded grid; the transform (real, since the
    kernel is centrosymmetric) is averaged around circles of each
    requested frequency, the norm taken, and the result normalized so the
    zero-frequency modulation is 1. This reflects the same discretization
    applied to synthesized test images; closed-form transforms serve as
    independent cross-checks in the test suite.
    """
    from scipy.ndimage import map_coordinates

    freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    if np.any(freqs < 0):
        raise ValueError("frequencies must be non-negative")
    kernel = make_kernel(spec, oversample)
    taps = kernel.taps
    t = taps.shape[0]
    n = 1 << max(11, (4 * t - 1).bit_length())
    grid = np.zeros((n, n))
    idx = (np.arange(t) - t // 2) % n
    grid[np.ix_(idx, idx)] = taps
    # Centrosymmetric real kernel centered on the origin: transform is real.
    fr = np.fft.fftshift(np.fft.fft2(grid).real)
    center = n // 2
    # Circle average at the exact requested frequencies; the pattern is
    # centrosymmetric so half a turn of angles suffices.
    theta = np.linspace(0.0, math.pi, n_angles, endpoint=False)
    radius = freqs[:, None] * (n / oversample)
    rows = center + radius * np.sin(theta)[None, :]
    cols = center + radius * np.cos(theta)[None, :]
    samples = map_coordinates(fr, [rows.ravel(), cols.ravel()], order=1)
    profile = samples.reshape(freqs.size, n_angles).mean(axis=1)
    m = np.abs(profile) / fr[center, center]
    return MtfCurve(freqs, m, "predicted_kernel")


def square_wave_pattern(
    pitches,
    pixel_size: float,
    depth: float,
    base: float = 0.0,
    band_height: int = 64,
    width: int = 512,
) -> GrayImage:
    """Stacked bands of 50%-duty square waves, one band per pitch.

    Each band alternates between `base` (wells) and `base + depth`
    (intervals) along x, starting with a well at x = 0. Pixels are
    area-sampled: a pixel straddling a transition gets the covered
    fraction, and sub-resolution pitches alias exactly as a real detector
    would render them.
    """
    pitches = [float(p) for p in np.atleast_1d(pitches)]
    if not pitches:
        raise InvalidPitch("at least one pitch required")
    for p in pitches:
        if not p > 0:
            raise InvalidPitch(f"pitch must be > 0, got {p}")
    if not pixel_size > 0:
        raise ValueError("pixel_size must be > 0")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if band_height < 1 or width < 1:
        raise ValueError("band_height and width must be >= 1")

    edges = np.arange(width + 1, dtype=np.float64) * pixel_size
    rows = np.empty((len(pitches), width))
    for i, p in enumerate(pitches):
        # Cumulative length of "interval" (high) segments up to u for a
        # wave that is low on [0, p/2) and high on [p/2, p).
        cum = np.floor(edges / p) * (p / 2.0) + np.maximum(0.0, edges % p - p / 2.0)
        coverage = np.diff(cum) / pixel_size
        rows[i] = base + depth * coverage
    out = np.repeat(rows, band_height, axis=0)
    return GrayImage(out, pixel_size)


def pattern_band_rects(
    n_pitches: int, width: int = 512, band_height: int = 64, inset: int = 0
) -> list[Rect]:
    """Band rectangles matching square_wave_pattern's layout.

    `inset` shrinks each band vertically on both sides, useful to keep a
    measurement away from blur cross-talk between adjacent bands.
    """
    if 2 * inset >= band_height:
        raise ValueError("inset leaves no rows")
    return [
        Rect(0, i * band_height + inset, width, band_height - 2 * inset)
        for i in range(n_pitches)
    ]


def pattern_contrast(img: GrayImage, band: Rect, pitch: float) -> float:
    """Modulation of a square-wave band: (max-min)/(max+min).

    The band's rows are averaged into a single profile, samples are folded
    by their phase within the period (which aligns every period before
    averaging), and the modulation is taken from the folded profile's
    extremes. `pitch` is physical when the image carries a pixel size,
    otherwise it is in pixels.
    """
    p_px = pitch / img.pixel_size if img.pixel_size is not None else pitch
    if not p_px > 0:
        raise InvalidPitch(f"pitch must be > 0, got {pitch}")
    if band.w < 3 * p_px:
        raise TooFewPeriods(
            f"band of {band.w} px holds fewer than 3 periods of {p_px:.3g} px"
        )
    profile = clip_roi(img, band).pixels.mean(axis=0)
    phases = ((np.arange(band.w) + 0.5) % p_px) / p_px
    nbins = int(min(64, max(8, round(4 * p_px))))
    idx = np.minimum((phases * nbins).astype(np.intp), nbins - 1)
    sums = np.bincount(idx, weights=profile, minlength=nbins)
    counts = np.bincount(idx, minlength=nbins)
    folded = sums[counts > 0] / counts[counts > 0]
    hi, lo = folded.max(), folded.min()
    if hi + lo <= 0:
        return 0.0
    return float((hi - lo) / (hi + lo))
