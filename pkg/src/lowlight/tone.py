"""Global lightness enhancement.

The tone map multiplies a normalized gamma curve by the cycle stimulation
energy, which is large for dark pixels and small for bright ones.  For a
given image the gain in mean nonzero V-channel lightness follows
``dv = c + 1/(a * gamma + b)`` closely; probing a handful of gammas, fitting
that curve and inverting it at the requested gain yields the gamma to apply.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .config import EnhanceConfig
from .curvefit import CurveParams, FitProblem, evaluate, solve
from .imageops import as_rgb, rgb_to_v
from .vibration import cycle_energy

__all__ = [
    "LightnessError",
    "GammaClampWarning",
    "modified_gamma_map",
    "mean_nonzero_lightness",
    "lightness_gains",
    "perceive_curve",
    "invert_curve",
    "enhance_global",
    "sweep_grid",
    "gamma_sweep",
    "gamma_sweep_mse",
]


class LightnessError(ValueError):
    """The lightness curve cannot be measured or inverted."""


class GammaClampWarning(UserWarning):
    """The inverted gamma fell outside the working range and was clamped."""


def modified_gamma_map(plane, lam: float, gamma: float, use_energy: bool = True) -> np.ndarray:
    """Energy-weighted gamma correction normalized at the plane maximum.

    ``C = I^gamma E(lam, I) / (Imax^gamma E(lam, Imax))`` clamped to [0, 1].
    The maximum pixel maps to exactly 1, zeros stay 0, and an all-zero plane
    is returned unchanged.  With ``use_energy=False`` the energy factor is
    dropped (plain normalized gamma).
    """
    plane = np.asarray(plane, dtype=np.float64)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if plane.size == 0 or plane.max() <= 0:
        return plane.copy()
    peak = int(np.argmax(plane))
    # (I/Imax)^gamma rather than I^gamma / Imax^gamma: no underflow for tiny planes
    num = np.power(plane / plane.flat[peak], gamma)
    if use_energy:
        energy = cycle_energy(lam, plane)
        num *= energy / energy.flat[peak]
    return np.clip(num, 0.0, 1.0, out=num)


def mean_nonzero_lightness(plane) -> float:
    """Mean of the nonzero pixels; 0 for an all-zero plane."""
    plane = np.asarray(plane, dtype=np.float64)
    nz = np.count_nonzero(plane)
    if nz == 0:
        return 0.0
    return float(plane.sum() / nz)


def lightness_gains(v_plane, gammas, lam: float, use_energy: bool = True) -> np.ndarray:
    """Gain of mean nonzero lightness for each gamma."""
    v_plane = np.asarray(v_plane, dtype=np.float64)
    base = mean_nonzero_lightness(v_plane)
    return np.array([
        mean_nonzero_lightness(modified_gamma_map(v_plane, lam, g, use_energy)) - base
        for g in gammas
    ])


def perceive_curve(v_plane, cfg: EnhanceConfig = EnhanceConfig()):
    """Probe the configured gammas and fit the lightness curve.

    Returns
    -------
    params : CurveParams
    dv : list of float
        Measured gains, one per probe gamma.
    """
    v_plane = np.asarray(v_plane, dtype=np.float64)
    if v_plane.size == 0 or not np.any(v_plane > 0):
        raise LightnessError("empty lightness: the V channel has no nonzero pixels")
    dv = lightness_gains(v_plane, cfg.gammas, cfg.lam, cfg.use_energy)
    params = solve(FitProblem(cfg.gammas, dv), pole_guard=cfg.gamma_clamp)
    return params, dv.tolist()


def _raw_inverse(params: CurveParams, dv_star: float) -> float:
    gap = dv_star - params.c
    if gap == 0 or params.a == 0:
        return math.nan
    return ((1.0 / gap) - params.b) / params.a


def invert_curve(params: CurveParams, dv_star: float, clamp=(0.1, 5.0)) -> float:
    """Gamma at which the fitted curve reaches ``dv_star``, clamped to ``clamp``.

    When no positive gamma solves the equation the lower clamp bound (the
    strongest brightening available) is returned.  Any clamping emits a
    :class:`GammaClampWarning`.
    """
    if params.degenerate:
        raise LightnessError("uncontrollable lightness: the lightness curve is flat")
    lo, hi = clamp
    g = _raw_inverse(params, dv_star)
    if not math.isfinite(g) or g <= 0:
        warnings.warn(f"no positive gamma reaches dv={dv_star}; using {lo}",
                      GammaClampWarning, stacklevel=2)
        return float(lo)
    # rounding noise at the bounds is not worth a warning
    slack = 1e-9 * max(abs(lo), abs(hi))
    if lo - slack <= g <= hi + slack:
        return float(min(max(g, lo), hi))
    clamped = min(max(g, lo), hi)
    warnings.warn(f"gamma {g:.4g} outside [{lo}, {hi}]; clamped to {clamped}",
                  GammaClampWarning, stacklevel=2)
    return float(clamped)


def apply_gamma_rgb(image, lam: float, gamma: float, use_energy: bool = True) -> np.ndarray:
    """Apply the tone map to each RGB channel with its own maximum."""
    image = as_rgb(image)
    out = np.empty_like(image)
    for ch in range(3):
        out[..., ch] = modified_gamma_map(image[..., ch], lam, gamma, use_energy)
    return out


def enhance_global(image, cfg: EnhanceConfig = EnhanceConfig()):
    """Two-phase global enhancement.

    The lightness curve is measured on the HSV V channel, inverted at
    ``cfg.dv_star`` and the resulting gamma applied to every RGB channel.

    Returns
    -------
    enhanced : ndarray
    gamma_star : float
    params : CurveParams
    """
    image = as_rgb(image)
    params, _ = perceive_curve(rgb_to_v(image), cfg)
    gamma_star = invert_curve(params, cfg.dv_star, cfg.gamma_clamp)
    return apply_gamma_rgb(image, cfg.lam, gamma_star, cfg.use_energy), gamma_star, params


def sweep_grid(lo: float = 0.3, hi: float = 2.2, step: float = 0.05) -> np.ndarray:
    """Inclusive evenly spaced gammas from ``lo`` to ``hi``."""
    if not step > 0:
        raise ValueError("sweep step must be positive")
    if hi < lo:
        raise ValueError(f"sweep upper bound {hi} is below lower bound {lo}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def gamma_sweep(v_plane, cfg: EnhanceConfig = EnhanceConfig(), lo=0.3, hi=2.2, step=0.05):
    """Measured and fitted gains over a gamma grid.

    Returns ``(params, grid, measured, fitted)``; the curve is fitted on
    ``cfg.gammas`` only.
    """
    params, _ = perceive_curve(v_plane, cfg)
    grid = sweep_grid(lo, hi, step)
    measured = lightness_gains(v_plane, grid, cfg.lam, cfg.use_energy)
    fitted = np.asarray(evaluate(params, grid), dtype=np.float64)
    return params, grid, measured, fitted


def gamma_sweep_mse(v_plane, cfg: EnhanceConfig = EnhanceConfig(), lo=0.3, hi=2.2, step=0.05) -> float:
    """Mean squared gap between fitted and measured gains over the grid."""
    _, _, measured, fitted = gamma_sweep(v_plane, cfg, lo, hi, step)
    return float(np.mean((measured - fitted) ** 2))
