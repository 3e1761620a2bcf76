"""Image and JSON I/O with deterministic quantization and atomic writes.

All pixel math in the package is float64 in [0, 1]; this module is the
only place bytes are converted to and from that representation. Files
are written to a temporary sibling and renamed into place so a crashed
run never leaves a partial artifact behind.
"""

from __future__ import annotations

import io
import json
import os
import tempfile

import numpy as np
from PIL import Image, UnidentifiedImageError

SUPPORTED_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

# ITU-R BT.601 luma weights, applied in float64.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class ImageLoadError(ValueError):
    """A file could not be decoded into a supported grayscale image."""


def quantize_u8(image) -> np.ndarray:
    """Map [0, 1] floats to uint8 with round-half-up at every level."""
    arr = np.asarray(image, dtype=np.float64)
    return np.clip(np.floor(arr * 255.0 + 0.5), 0.0, 255.0).astype(np.uint8)


def quantize_u16(image) -> np.ndarray:
    arr = np.asarray(image, dtype=np.float64)
    return np.clip(np.floor(arr * 65535.0 + 0.5), 0.0, 65535.0).astype(np.uint16)


def load_image(path) -> np.ndarray:
    """Decode a PNG, JPEG, or BMP file into a [0, 1] float64 grayscale matrix.

    8-bit samples divide by 255, 16-bit by 65535. RGB collapses through
    the 0.299 / 0.587 / 0.114 luma weights in float; an alpha channel, if
    present, is ignored.
    """
    try:
        with Image.open(path) as img:
            img.load()
            return _to_gray_float(img)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageLoadError(f"cannot decode {path}: {exc}") from None


def _to_gray_float(img: Image.Image) -> np.ndarray:
    mode = img.mode
    if mode == "P":
        img = img.convert("RGB")
        mode = "RGB"
    if mode in ("LA", "RGBA"):
        img = img.convert("RGB" if mode == "RGBA" else "L")
        mode = img.mode
    if mode == "L":
        return np.asarray(img, dtype=np.float64) / 255.0
    if mode in ("I;16", "I;16B", "I;16L"):
        arr = np.asarray(img, dtype=np.float64)
        return arr / 65535.0
    if mode == "I":
        # Pillow promotes some 16-bit grayscale PNGs to 32-bit integers.
        arr = np.asarray(img, dtype=np.float64)
        if arr.size and arr.max() > 65535:
            raise ImageLoadError("integer image exceeds 16-bit range")
        return arr / 65535.0
    if mode == "RGB":
        arr = np.asarray(img, dtype=np.float64) / 255.0
        return arr @ _LUMA_WEIGHTS
    raise ImageLoadError(f"unsupported image mode {mode!r}")


def _atomic_write_bytes(path, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    handle = tempfile.NamedTemporaryFile(dir=directory, suffix=".part", delete=False)
    try:
        handle.write(payload)
        handle.flush()
        os.fsync(handle.fileno())
        handle.close()
        os.replace(handle.name, path)
    except BaseException:
        handle.close()
        if os.path.exists(handle.name):
            os.unlink(handle.name)
        raise


def _encode_png(array: np.ndarray) -> bytes:
    # Mode is inferred from the dtype: uint8 2D -> L, uint16 -> I;16,
    # uint8 (H, W, 3) -> RGB.
    buffer = io.BytesIO()
    Image.fromarray(array).save(buffer, format="PNG")
    return buffer.getvalue()


def save_gray8(path, image) -> None:
    """Write a [0, 1] matrix as an 8-bit grayscale PNG, atomically."""
    _atomic_write_bytes(path, _encode_png(quantize_u8(image)))


def save_gray16(path, image) -> None:
    """Write a [0, 1] matrix as a 16-bit grayscale PNG, atomically."""
    _atomic_write_bytes(path, _encode_png(quantize_u16(image)))


def save_rgb8(path, image) -> None:
    """Write an (H, W, 3) [0, 1] array as an 8-bit RGB PNG, atomically."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) array")
    _atomic_write_bytes(path, _encode_png(quantize_u8(arr)))


def save_indicator(path, bits) -> None:
    """Write indicator bits as an 8-bit PNG holding only 0 and 255."""
    arr = np.asarray(bits)
    if arr.dtype != np.uint8 or (arr.size and arr.max() > 1):
        raise ValueError("indicator must be uint8 bits in {0, 1}")
    _atomic_write_bytes(path, _encode_png(arr * np.uint8(255)))


def write_json(path, document) -> None:
    """Serialize with a stable layout (insertion order, two-space indent)."""
    payload = (json.dumps(document, indent=2, ensure_ascii=True) + "\n").encode("ascii")
    _atomic_write_bytes(path, payload)


def encode_jpeg(image, libjpeg_quality: int) -> bytes:
    """Quantize to 8 bits and JPEG-encode in memory at the given quality."""
    if not (1 <= libjpeg_quality <= 100):
        raise ValueError("libjpeg quality must lie in [1, 100]")
    buffer = io.BytesIO()
    Image.fromarray(quantize_u8(image)).save(
        buffer, format="JPEG", quality=int(libjpeg_quality))
    return buffer.getvalue()


def decode_jpeg(payload: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(payload)) as img:
        img.load()
        return _to_gray_float(img)
