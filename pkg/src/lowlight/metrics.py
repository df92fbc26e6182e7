"""Full-reference quality metrics and lightness/saturation statistics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .imageops import SizeMismatchError, as_rgb, resize, rgb_to_lab, rgb_to_s, rgb_to_v
from .tone import mean_nonzero_lightness

__all__ = [
    "PSNR_CAP",
    "MetricsReport",
    "delta_e",
    "psnr",
    "mssim",
    "ssim_map",
    "loe",
    "loe_planes",
    "statistical_states",
    "evaluate_pair",
]

PSNR_CAP = 99.0
_MSE_FLOOR = 1e-10
_LUMA = np.array([0.299, 0.587, 0.114])


def _same_shape(a, b):
    a = as_rgb(a)
    b = as_rgb(b)
    if a.shape != b.shape:
        raise SizeMismatchError(f"image sizes differ: {a.shape} vs {b.shape}")
    return a, b


def delta_e(enhanced, reference) -> float:
    """Mean CIE76 color difference (Euclidean distance in CIELAB)."""
    a, b = _same_shape(enhanced, reference)
    diff = rgb_to_lab(a) - rgb_to_lab(b)
    return float(np.mean(np.sqrt(np.sum(diff * diff, axis=2))))


def psnr(a, b) -> float:
    """PSNR in dB for data in [0, 1]; ``PSNR_CAP`` when MSE < 1e-10."""
    a, b = _same_shape(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse < _MSE_FLOOR:
        return PSNR_CAP
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # separable correlation keeping only windows fully inside the plane
    rows = sliding_window_view(plane, kernel.size, axis=0) @ kernel
    return sliding_window_view(rows, kernel.size, axis=1) @ kernel


def ssim_map(x, y, window: int = 11, sigma: float = 1.5, k1: float = 0.01,
             k2: float = 0.03, data_range: float = 1.0) -> np.ndarray:
    """Local SSIM of two planes over Gaussian windows that fit inside the image."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise SizeMismatchError(f"plane sizes differ: {x.shape} vs {y.shape}")
    if min(x.shape) < window:
        raise ValueError(f"image too small for SSIM: min side {min(x.shape)} < {window}")
    g = _gaussian_window(window, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mu_x = _filter_valid(x, g)
    mu_y = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mu_x * mu_x
    syy = _filter_valid(y * y, g) - mu_y * mu_y
    sxy = _filter_valid(x * y, g) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    return num / den


def mssim(a, b) -> float:
    """Mean SSIM on the BT.601 luma plane (11x11 Gaussian window, sigma 1.5)."""
    a, b = _same_shape(a, b)
    return float(np.mean(ssim_map(a @ _LUMA, b @ _LUMA)))


def _loe_downsample(plane: np.ndarray, target: int) -> np.ndarray:
    h, w = plane.shape
    scale = target / min(h, w)
    if scale >= 1:
        return plane
    return resize(plane, max(1, round(w * scale)), max(1, round(h * scale)), method="nearest")


def _dominance_counts(ranks_a, ranks_b, na, nb):
    """For each pixel, how many pixels are <= it in both rank planes."""
    joint = np.zeros((na, nb), dtype=np.int64)
    np.add.at(joint, (ranks_a, ranks_b), 1)
    cum = joint.cumsum(axis=0).cumsum(axis=1)
    return cum[ranks_a, ranks_b]


def loe_planes(light_a, light_b, chunk: int = 2048) -> float:
    """Lightness order error between two equal-size lightness planes.

    For every pixel ``x`` counts the pixels ``y`` where ``L_a(x) >= L_a(y)``
    and ``L_b(x) >= L_b(y)`` disagree, then averages over ``x``.  No
    downsampling happens here.
    """
    la = np.asarray(light_a, dtype=np.float64).ravel()
    lb = np.asarray(light_b, dtype=np.float64).ravel()
    if la.shape != lb.shape:
        raise SizeMismatchError("lightness planes differ in size")
    n = la.size
    if n == 0:
        return 0.0
    ua, ra = np.unique(la, return_inverse=True)
    ub, rb = np.unique(lb, return_inverse=True)
    ra = ra.ravel()
    rb = rb.ravel()
    if ua.size * ub.size <= 4_000_000:
        # #{y: a(y)<=a(x)} + #{y: b(y)<=b(x)} - 2 #{y: both}
        le_a = np.bincount(ra, minlength=ua.size).cumsum()[ra]
        le_b = np.bincount(rb, minlength=ub.size).cumsum()[rb]
        both = _dominance_counts(ra, rb, ua.size, ub.size)
        flips = le_a + le_b - 2 * both
        return float(flips.sum() / n)
    total = 0
    for start in range(0, n, chunk):
        xa = la[start:start + chunk, None]
        xb = lb[start:start + chunk, None]
        total += int(np.count_nonzero((xa >= la[None, :]) ^ (xb >= lb[None, :])))
    return total / n


def loe(enhanced, original, target: int = 100) -> float:
    """Lightness order error between an enhanced image and its source.

    Lightness is the per-pixel RGB maximum; both planes are shrunk with
    nearest sampling so the short side is about ``target`` pixels.
    """
    a, b = _same_shape(enhanced, original)
    la = _loe_downsample(rgb_to_v(a), target)
    lb = _loe_downsample(rgb_to_v(b), target)
    return loe_planes(la, lb)


def statistical_states(fused, source):
    """Lightness gain, saturation loss and lightness-saturation gap.

    Returns ``(dv_m, ds_m, d_m)`` with ``dv_m = F_vm - I_vm``,
    ``ds_m = I_sm - F_sm`` and ``d_m = F_vm - F_sm``.  V means skip zero
    pixels; S means cover every pixel.
    """
    f, i = _same_shape(fused, source)
    f_vm = mean_nonzero_lightness(rgb_to_v(f))
    i_vm = mean_nonzero_lightness(rgb_to_v(i))
    f_sm = float(rgb_to_s(f).mean())
    i_sm = float(rgb_to_s(i).mean())
    return f_vm - i_vm, i_sm - f_sm, f_vm - f_sm


@dataclass
class MetricsReport:
    """Scores of one enhanced image.  Reference-based fields may be None."""

    id: str
    delta_e: float | None = None
    psnr: float | None = None
    mssim: float | None = None
    loe: float | None = None
    dv_m: float | None = None
    ds_m: float | None = None
    d_m: float | None = None

    FIELDS = ("delta_e", "psnr", "mssim", "loe", "dv_m", "ds_m", "d_m")

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_pair(enhanced, reference=None, low=None, image_id: str = "") -> MetricsReport:
    """Score ``enhanced`` against ``reference`` and/or the ``low`` source.

    LOE and the statistical states use ``low`` when given, else ``reference``.
    """
    if reference is None and low is None:
        raise ValueError("need a reference or a low-light source to score against")
    report = MetricsReport(id=image_id)
    if reference is not None:
        report.delta_e = delta_e(enhanced, reference)
        report.psnr = psnr(enhanced, reference)
        report.mssim = mssim(enhanced, reference)
    source = low if low is not None else reference
    report.loe = loe(enhanced, source)
    report.dv_m, report.ds_m, report.d_m = statistical_states(enhanced, source)
    return report
