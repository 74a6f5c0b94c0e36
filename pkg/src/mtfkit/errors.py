"""Exception types raised by mtfkit operations."""


class MtfError(Exception):
    """Base class for all mtfkit errors."""


class UnsupportedFormat(MtfError):
    """Input file is not one of the supported raster formats."""


class CorruptFile(MtfError):
    """Input file is recognized but malformed or truncated."""


class EmptyResult(MtfError):
    """An operation would produce an image with zero extent."""


class OutOfBounds(MtfError):
    """A rectangle does not fit inside its host image."""


class InvalidSpec(MtfError):
    """PSF specification has a non-positive size or unknown kind."""


class KernelTooLarge(MtfError):
    """Kernel support exceeds the image it is applied to."""


class InvalidPitch(MtfError):
    """Square-wave pitch is not strictly positive."""


class TooFewPeriods(MtfError):
    """Measurement band spans fewer than three full periods."""


class ImageTooSmall(MtfError):
    """Image is below the minimum size for a spectral estimate."""


class EmptySector(MtfError):
    """No spectral samples fall inside the requested sector."""


class NoLinearRegion(MtfError):
    """No usable linear segment in the log-power profile (e.g. a
    noise-dominated or sparse image)."""


class MissingHint(MtfError):
    """Fit-region strategy needs an aperture radius that was not given."""


class NonNegativeSlope(MtfError):
    """Fitted slope is not negative; no blur is detectable."""


class PoorFit(MtfError):
    """Linear fit quality below the acceptance threshold."""


class NoEdgeFound(MtfError):
    """No straight edge could be located in the region of interest."""


class EdgeTooAligned(MtfError):
    """Edge is aligned with the pixel grid; no sub-pixel phase diversity."""


class NoPeak(MtfError):
    """Line spread function has no sign-consistent main lobe."""
