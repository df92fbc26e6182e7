"""8-bit image decoding and encoding."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = ["ImageReadError", "read_image", "write_image", "to_uint8"]

# PIL modes whose samples are 8-bit
_EIGHT_BIT_MODES = {"1", "L", "LA", "P", "PA", "RGB", "RGBA", "RGBX", "CMYK", "YCbCr", "LAB", "HSV"}


class ImageReadError(OSError):
    """Image missing, unreadable or in an unsupported sample format."""


def read_image(path) -> np.ndarray:
    """Decode an 8-bit PNG/JPEG into an ``(H, W, 3)`` float64 array in [0, 1].

    Grayscale and palette images are expanded to RGB, alpha is dropped.
    16-bit and floating-point images are rejected.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode not in _EIGHT_BIT_MODES:
                raise ImageReadError(
                    f"{path}: unsupported sample format {im.mode!r}; only 8-bit images are accepted")
            rgb = im.convert("RGB")
            data = np.asarray(rgb, dtype=np.uint8)
    except FileNotFoundError:
        raise ImageReadError(f"{path}: no such file") from None
    except UnidentifiedImageError:
        raise ImageReadError(f"{path}: not a readable image") from None
    except ImageReadError:
        raise
    except OSError as exc:
        raise ImageReadError(f"{path}: {exc}") from None
    return data.astype(np.float64) / 255.0


def to_uint8(image) -> np.ndarray:
    """``round(clip(x, 0, 1) * 255)`` as uint8."""
    image = np.asarray(image, dtype=np.float64)
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_image(path, image) -> None:
    """Encode a float image in [0, 1] as 8-bit; format follows the extension."""
    path = Path(path)
    data = to_uint8(image)
    ext = path.suffix.lower()
    kwargs = {"quality": 95} if ext in (".jpg", ".jpeg") else {}
    Image.fromarray(data).save(path, **kwargs)
