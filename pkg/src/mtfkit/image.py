"""Grayscale image container, raster I/O, binning and region clipping.

Intensities are stored as float64 immediately on load and integer bit
depths are promoted without rescaling; downstream estimates are invariant
to the absolute intensity scale, so no calibration is applied.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptFile, EmptyResult, OutOfBounds, UnsupportedFormat

# Standard broadcast luma weights; the conversion is configurable because
# upstream sources rarely document theirs.
DEFAULT_LUMA = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class GrayImage:
    """2-D scalar intensity raster.

    Parameters
    ----------
    pixels : ndarray
        (height, width) array; converted to read-only float64.
    pixel_size : float, optional
        Physical length per pixel (e.g. micrometers/pixel).
    """

    pixels: np.ndarray
    pixel_size: float | None = None

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("intensities must be finite")
        if self.pixel_size is not None and not self.pixel_size > 0:
            raise ValueError("pixel_size must be strictly positive")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class Rect:
    """Pixel-aligned rectangle: offsets x0, y0 and extents w, h."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError("rect extents must be at least 1 pixel")

    def fits(self, img: GrayImage) -> bool:
        return (
            self.x0 >= 0
            and self.y0 >= 0
            and self.x0 + self.w <= img.width
            and self.y0 + self.h <= img.height
        )


_PNM_TOKEN = re.compile(rb"^\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_pnm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read `count` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = 0
    for _ in range(count):
        m = _PNM_TOKEN.match(data[pos:])
        if not m:
            raise CorruptFile("truncated header")
        try:
            tokens.append(int(m.group(1)))
        except ValueError as exc:
            raise CorruptFile(f"bad header token {m.group(1)!r}") from exc
        pos += m.end(1)
    return tokens, pos


def _load_pnm(data: bytes, luma: tuple[float, float, float]) -> np.ndarray:
    magic = data[:2]
    channels = 1 if magic == b"P5" else 3
    try:
        (width, height, maxval), pos = _read_pnm_tokens(data[2:], 3)
    except CorruptFile:
        raise
    pos += 2
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise CorruptFile("bad dimensions or maxval")
    # Single whitespace byte separates header from binary samples.
    if pos >= len(data):
        raise CorruptFile("missing sample data")
    pos += 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    n = width * height * channels
    raw = data[pos : pos + n * dtype.itemsize]
    if len(raw) < n * dtype.itemsize:
        raise CorruptFile("sample data shorter than header promises")
    arr = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    if channels == 3:
        arr = arr.reshape(height, width, 3) @ np.asarray(luma, dtype=np.float64)
    return arr.reshape(height, width)


def _load_png(path: Path, luma: tuple[float, float, float]) -> np.ndarray:
    from PIL import Image as PILImage

    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode == "P":
                im = im.convert("RGB")
            elif im.mode == "LA":
                im = im.convert("L")
            arr = np.asarray(im).astype(np.float64)
    except Exception as exc:
        raise CorruptFile(f"cannot decode {path}: {exc}") from exc
    if arr.ndim == 3:
        arr = arr[..., :3] @ np.asarray(luma, dtype=np.float64)
    return arr


def load_image(
    path,
    pixel_size: float | None = None,
    luma: tuple[float, float, float] = DEFAULT_LUMA,
) -> GrayImage:
    """Load a P5/P6 netpbm file or a PNG as a GrayImage.

    Color inputs are reduced to grayscale with the given luma weights
    before any other processing. Sample values are promoted to float64
    as-is: a 16-bit maximum stays 65535.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
        fh.seek(0)
        data = fh.read()
    if head[:2] in (b"P5", b"P6"):
        arr = _load_pnm(data, luma)
    elif head[:8] == b"\x89PNG\r\n\x1a\n":
        arr = _load_png(path, luma)
    else:
        raise UnsupportedFormat(f"{path}: not a P5/P6 netpbm or PNG file")
    return GrayImage(arr, pixel_size)


def save_image(img: GrayImage, path) -> None:
    """Write a GrayImage as binary PGM (.pgm/.pnm) or PNG (.png).

    Values are rounded to integers and clipped to [0, 65535]; 8-bit output
    is chosen when everything fits in [0, 255].
    """
    path = Path(path)
    arr = np.rint(np.clip(img.pixels, 0.0, 65535.0)).astype(np.uint16)
    wide = arr.max(initial=0) > 255
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm"):
        maxval = 65535 if wide else 255
        payload = arr.astype(">u2") if wide else arr.astype("u1")
        with open(path, "wb") as fh:
            fh.write(f"P5\n{img.width} {img.height}\n{maxval}\n".encode())
            fh.write(payload.tobytes())
    elif suffix == ".png":
        from PIL import Image as PILImage

        if wide:
            PILImage.fromarray(arr, mode="I;16").save(path)
        else:
            PILImage.fromarray(arr.astype(np.uint8), mode="L").save(path)
    else:
        raise UnsupportedFormat(f"cannot write format {suffix!r}")


def bin_image(img: GrayImage, n: int) -> GrayImage:
    """Reduce resolution by averaging n-by-n pixel blocks.

    Trailing rows/columns that do not fill a block are discarded rather
    than padded, so no artificial edges enter the spectrum. pixel_size is
    multiplied by n.
    """
    if n < 1:
        raise ValueError("bin factor must be >= 1")
    n = int(n)
    if n == 1:
        return img
    h, w = img.height // n, img.width // n
    if h == 0 or w == 0:
        raise EmptyResult(f"{img.width}x{img.height} image leaves no {n}x{n} blocks")
    blocks = img.pixels[: h * n, : w * n].reshape(h, n, w, n)
    out = blocks.mean(axis=(1, 3))
    size = img.pixel_size * n if img.pixel_size is not None else None
    return GrayImage(out, size)


def clip_roi(img: GrayImage, r: Rect) -> GrayImage:
    """Return the sub-image covered by `r`; pixel_size is preserved."""
    if not r.fits(img):
        raise OutOfBounds(
            f"rect {r} outside {img.width}x{img.height} image"
        )
    sub = img.pixels[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w]
    return GrayImage(sub, img.pixel_size)
