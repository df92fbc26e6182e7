"""Color conversions, resampling, box filtering and the guided filter.

Images are float numpy arrays: ``(H, W)`` planes or ``(H, W, 3)`` RGB stacks,
values in [0, 1] (LAB output excepted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SizeMismatchError",
    "as_rgb",
    "rgb_to_v",
    "rgb_to_s",
    "rgb_to_lab",
    "resize",
    "downsample",
    "box_filter",
    "GuidedFilterParams",
    "guided_filter",
    "guided_filter_fast",
]

# sRGB primaries to XYZ, D65 white
_RGB_TO_XYZ = np.array([
    [0.412453, 0.357580, 0.180423],
    [0.212671, 0.715160, 0.072169],
    [0.019334, 0.119193, 0.950227],
])
_WHITE_D65 = _RGB_TO_XYZ.sum(axis=1)


class SizeMismatchError(ValueError):
    """Two images that must share dimensions do not."""


def as_rgb(image) -> np.ndarray:
    """Check for an ``(H, W, 3)`` array and return it as float64."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {image.shape}")
    return image


def rgb_to_v(image) -> np.ndarray:
    """HSV value channel, ``max(R, G, B)``."""
    return as_rgb(image).max(axis=2)


def rgb_to_s(image) -> np.ndarray:
    """HSV saturation ``(max - min) / max`` with 0 for black pixels."""
    image = as_rgb(image)
    mx = image.max(axis=2)
    mn = image.min(axis=2)
    out = np.zeros_like(mx)
    np.divide(mx - mn, mx, out=out, where=mx > 0)
    return out


def rgb_to_lab(image) -> np.ndarray:
    """sRGB (D65) to CIELAB.  L in [0, 100]."""
    image = as_rgb(image)
    lin = np.where(image > 0.04045, ((image + 0.055) / 1.055) ** 2.4, image / 12.92)
    xyz = lin @ _RGB_TO_XYZ.T / _WHITE_D65
    eps = (6.0 / 29.0) ** 3
    f = np.where(xyz > eps, np.cbrt(xyz), xyz / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    lab = np.empty_like(image)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def _sample_coords(n_in: int, n_out: int) -> np.ndarray:
    # corner-aligned: first and last output samples land on the first and last input pixels
    if n_out == 1 or n_in == 1:
        return np.zeros(n_out) if n_in == 1 else np.full(n_out, (n_in - 1) / 2.0)
    return np.arange(n_out) * ((n_in - 1) / (n_out - 1))


def _interp_axis(arr: np.ndarray, n_out: int, axis: int, method: str) -> np.ndarray:
    n_in = arr.shape[axis]
    if n_in == n_out:
        return arr
    pos = _sample_coords(n_in, n_out)
    if method == "nearest":
        idx = np.floor(pos + 0.5).astype(np.intp)
        return np.take(arr, idx, axis=axis)
    i0 = np.floor(pos).astype(np.intp)
    i0 = np.clip(i0, 0, n_in - 1)
    i1 = np.minimum(i0 + 1, n_in - 1)
    frac = pos - i0
    shape = [1] * arr.ndim
    shape[axis] = n_out
    frac = frac.reshape(shape)
    lo = np.take(arr, i0, axis=axis)
    hi = np.take(arr, i1, axis=axis)
    # lo + frac*(hi-lo) keeps constants exact
    return lo + frac * (hi - lo)


def resize(image, width: int, height: int, method: str = "bilinear") -> np.ndarray:
    """Resample a plane or RGB image to ``(height, width)``.

    Sampling is corner aligned, so the border pixels of the input map onto
    the border pixels of the output and constant images stay constant.
    """
    if method not in ("bilinear", "nearest"):
        raise ValueError(f"unknown resize method {method!r}")
    if width < 1 or height < 1:
        raise ValueError(f"target size must be positive, got {width}x{height}")
    image = np.asarray(image, dtype=np.float64)
    out = _interp_axis(image, int(height), 0, method)
    out = _interp_axis(out, int(width), 1, method)
    return out if out is not image else image.copy()


def downsample(image, rate: int) -> np.ndarray:
    """Shrink by an integer ``rate`` to ``ceil(dim / rate)`` pixels per side."""
    rate = int(rate)
    if rate < 1:
        raise ValueError(f"downsampling rate must be >= 1, got {rate}")
    image = np.asarray(image, dtype=np.float64)
    if rate == 1:
        return image.copy()
    h, w = image.shape[:2]
    return resize(image, math.ceil(w / rate), math.ceil(h / rate))


def _window_sums(plane: np.ndarray, radius: int) -> np.ndarray:
    """Sum over the in-bounds part of each (2r+1)^2 window via an integral image."""
    h, w = plane.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(np.cumsum(plane, axis=0), axis=1, out=ii[1:, 1:])
    rows = np.arange(h)
    cols = np.arange(w)
    r0 = np.clip(rows - radius, 0, h)
    r1 = np.clip(rows + radius + 1, 0, h)
    c0 = np.clip(cols - radius, 0, w)
    c1 = np.clip(cols + radius + 1, 0, w)
    return (ii[np.ix_(r1, c1)] - ii[np.ix_(r0, c1)]
            - ii[np.ix_(r1, c0)] + ii[np.ix_(r0, c0)])


def _window_counts(shape, radius: int) -> np.ndarray:
    h, w = shape
    rows = np.arange(h)
    cols = np.arange(w)
    nr = np.minimum(rows + radius, h - 1) - np.maximum(rows - radius, 0) + 1
    nc = np.minimum(cols + radius, w - 1) - np.maximum(cols - radius, 0) + 1
    return np.outer(nr, nc).astype(np.float64)


def box_filter(plane, radius: int) -> np.ndarray:
    """Mean over the ``(2 radius + 1)^2`` window, truncated at the borders.

    Border windows are normalized by their in-bounds pixel count, so
    constant planes are fixed points.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise ValueError("box_filter expects a single plane")
    radius = int(radius)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius == 0:
        return plane.copy()
    return _window_sums(plane, radius) / _window_counts(plane.shape, radius)


@dataclass(frozen=True)
class GuidedFilterParams:
    """Window radius (full-scale pixels), internal subsample rate and regularizer."""

    radius: int
    subsample: int = 1
    eta: float = 0.04

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"guided filter radius must be >= 1, got {self.radius}")
        if self.subsample < 1:
            raise ValueError(f"subsample rate must be >= 1, got {self.subsample}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    @property
    def small_radius(self) -> int:
        return max(1, round(self.radius / self.subsample))


def _linear_coefficients(guide, src, radius, eta):
    counts = _window_counts(guide.shape, radius)
    mean_i = _window_sums(guide, radius) / counts
    mean_p = _window_sums(src, radius) / counts
    corr_ip = _window_sums(guide * src, radius) / counts
    corr_ii = _window_sums(guide * guide, radius) / counts
    var_i = corr_ii - mean_i * mean_i
    cov_ip = corr_ip - mean_i * mean_p
    a = cov_ip / (var_i + eta)
    b = mean_p - a * mean_i
    mean_a = _window_sums(a, radius) / counts
    mean_b = _window_sums(b, radius) / counts
    return mean_a, mean_b


def _check_pair(guide, src):
    guide = np.asarray(guide, dtype=np.float64)
    src = np.asarray(src, dtype=np.float64)
    if guide.ndim != 2 or guide.shape != src.shape:
        raise SizeMismatchError(
            f"guide {guide.shape} and input {src.shape} must be planes of equal size")
    return guide, src


def guided_filter(guide, src, radius: int, eta: float = 0.04) -> np.ndarray:
    """Exact guided filter at full resolution."""
    guide, src = _check_pair(guide, src)
    mean_a, mean_b = _linear_coefficients(guide, src, int(radius), eta)
    return mean_a * guide + mean_b


def guided_filter_fast(guide, src, params: GuidedFilterParams) -> np.ndarray:
    """Subsampled guided filter.

    The linear coefficients are computed on a copy shrunk by
    ``params.subsample`` with radius ``max(1, round(radius / subsample))``,
    upsampled bilinearly, and applied to the full-resolution guide.
    """
    guide, src = _check_pair(guide, src)
    if params.subsample == 1:
        return guided_filter(guide, src, params.radius, params.eta)
    guide_s = downsample(guide, params.subsample)
    src_s = downsample(src, params.subsample)
    mean_a, mean_b = _linear_coefficients(guide_s, src_s, params.small_radius, params.eta)
    h, w = guide.shape
    mean_a = resize(mean_a, w, h)
    mean_b = resize(mean_b, w, h)
    return mean_a * guide + mean_b
