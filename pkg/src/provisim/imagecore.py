"""Canonical raster types, grayscale conversion, grey-level quantization and file I/O.

Every pipeline stage consumes and produces the float representation defined
here: luminance in [0, 1], row-major, float64. 8-bit quantization happens
only at the file boundary (PNG / binary PGM).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Rec. 709 luma weights.
LUMA_WEIGHTS = (0.2126, 0.7152, 0.0722)

# Refuse to allocate rasters beyond this many samples per side.
MAX_DIMENSION = 1 << 14


class ImageIOError(Exception):
    """Base class for image file errors."""


class UnreadableFileError(ImageIOError):
    """File is missing, empty, truncated or otherwise undecodable."""


class UnsupportedFormatError(ImageIOError):
    """File content is not PNG or binary PGM (P5)."""


class DimensionError(ImageIOError):
    """Raster dimensions are zero, negative or exceed MAX_DIMENSION."""


def _check_dims(width: int, height: int) -> None:
    if width < 1 or height < 1:
        raise DimensionError(f"raster dimensions must be >= 1, got {width}x{height}")
    if width > MAX_DIMENSION or height > MAX_DIMENSION:
        raise DimensionError(
            f"raster dimensions {width}x{height} exceed limit {MAX_DIMENSION}"
        )


@dataclass(frozen=True)
class Image:
    """Grayscale raster: (height, width) float64 array with values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise ValueError(f"grayscale raster must be 2-D, got shape {px.shape}")
        _check_dims(px.shape[1], px.shape[0])
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("grayscale values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ColorImage:
    """RGB raster: (height, width, 3) float64 array, channels in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"color raster must be (H, W, 3), got shape {px.shape}")
        _check_dims(px.shape[1], px.shape[0])
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("channel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def to_grayscale(img: ColorImage) -> Image:
    """Convert an RGB raster to luminance using Rec. 709 weights."""
    wr, wg, wb = LUMA_WEIGHTS
    px = img.pixels
    luma = wr * px[:, :, 0] + wg * px[:, :, 1] + wb * px[:, :, 2]
    return Image(np.clip(luma, 0.0, 1.0))


def quantize_levels(img: Image, n_levels: int) -> Image:
    """Snap every sample to the nearest of n_levels uniformly spaced values.

    Levels are {0, 1/(n-1), ..., 1}; ties round up.
    """
    if n_levels < 2:
        raise ValueError(f"n_levels must be >= 2, got {n_levels}")
    steps = n_levels - 1
    idx = np.floor(img.pixels * steps + 0.5)
    return Image(np.clip(idx / steps, 0.0, 1.0))


def _to_uint8(values: np.ndarray) -> np.ndarray:
    # Half-up rounding, matching the quantizer's tie-break.
    return np.floor(values * 255.0 + 0.5).astype(np.uint8)


_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _sniff(data: bytes, path) -> str:
    if len(data) == 0:
        raise UnreadableFileError(f"empty file: {path}")
    if data[:8] == _PNG_MAGIC:
        return "png"
    if data[:2] == b"P5":
        return "pgm"
    raise UnsupportedFormatError(f"not a PNG or binary PGM file: {path}")


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc}") from exc


def _parse_pgm(data: bytes, path) -> np.ndarray:
    """Parse binary PGM (P5), returning a (H, W) float64 array in [0, 1]."""
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise UnreadableFileError(f"truncated PGM header: {path}")
        ch = data[pos : pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            fields.append(data[pos:end])
            pos = end
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise UnreadableFileError(f"malformed PGM header: {path}") from exc
    if maxval > 255:
        raise UnsupportedFormatError(f"16-bit PGM is not supported: {path}")
    if maxval < 1:
        raise UnreadableFileError(f"invalid PGM maxval {maxval}: {path}")
    _check_dims(width, height)
    raw = data[pos : pos + width * height]
    if len(raw) < width * height:
        raise UnreadableFileError(f"truncated PGM pixel data: {path}")
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    return arr.astype(np.float64) / maxval


def load_image(path) -> ColorImage:
    """Load a PNG or binary PGM file as a ColorImage (grey files load as r=g=b)."""
    data = _read_bytes(path)
    kind = _sniff(data, path)
    if kind == "pgm":
        grey = _parse_pgm(data, path)
        return ColorImage(np.repeat(grey[:, :, None], 3, axis=2))
    import io

    from PIL import Image as PILImage, UnidentifiedImageError

    try:
        with PILImage.open(io.BytesIO(data)) as im:
            _check_dims(im.width, im.height)
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except DimensionError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise UnreadableFileError(f"cannot decode {path}: {exc}") from exc
    return ColorImage(rgb)


def save_image(img: Image, path) -> None:
    """Write a grayscale raster as 8-bit PNG (single channel) or binary PGM.

    The format is chosen by file extension (.png or .pgm).
    """
    path = Path(path)
    suffix = path.suffix.lower()
    samples = _to_uint8(img.pixels)
    if suffix == ".pgm":
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        _write_bytes(path, header + samples.tobytes())
    elif suffix == ".png":
        from PIL import Image as PILImage

        import io

        buf = io.BytesIO()
        PILImage.fromarray(samples, mode="L").save(buf, format="PNG")
        _write_bytes(path, buf.getvalue())
    else:
        raise UnsupportedFormatError(f"unsupported output format: {path}")


def save_color_image(img: ColorImage, path) -> None:
    """Write an RGB raster as 8-bit PNG. Fixture/stimulus plumbing."""
    path = Path(path)
    if path.suffix.lower() != ".png":
        raise UnsupportedFormatError(f"color output must be PNG: {path}")
    from PIL import Image as PILImage

    import io

    buf = io.BytesIO()
    PILImage.fromarray(_to_uint8(img.pixels), mode="RGB").save(buf, format="PNG")
    _write_bytes(path, buf.getvalue())


def _write_bytes(path: Path, data: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise UnreadableFileError(f"cannot write {path}: {exc}") from exc


def image_from_array(values, clip: bool = False) -> Image:
    """Wrap an array as an Image, optionally clamping to [0, 1] first."""
    arr = np.asarray(values, dtype=np.float64)
    if clip:
        arr = np.clip(arr, 0.0, 1.0)
    return Image(arr)
