"""Damped least-squares fit of the reciprocal-affine curve ``y = c + 1/(a x + b)``.

The solver is a Levenberg-Marquardt iteration with an analytic Jacobian and
multiplicative damping updates.  Steps that would move the pole ``x = -b/a``
into the protected interval are rejected like any other failed step, so a fit
never jumps across its own singularity.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

__all__ = ["CurveParams", "FitProblem", "solve", "evaluate", "jacobian", "FLAT_RANGE"]

# ys spanning less than this are treated as a constant curve
FLAT_RANGE = 1e-4


@dataclass(frozen=True)
class CurveParams:
    """Parameters of ``dv = c + 1/(a * gamma + b)`` plus fit diagnostics."""

    a: float
    b: float
    c: float
    fit_mse: float = 0.0
    degenerate: bool = False
    converged: bool = True
    n_iter: int = 0

    def __post_init__(self):
        if self.fit_mse < 0:
            raise ValueError("fit_mse must be non-negative")

    @property
    def pole(self) -> float:
        """Location of the singularity, ``-b/a`` (nan for degenerate or a == 0)."""
        if self.degenerate or self.a == 0:
            return float("nan")
        return -self.b / self.a

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FitProblem:
    """Observed (x, y) pairs; at least four points with distinct x."""

    xs: tuple
    ys: tuple

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise ValueError("xs and ys must be 1-D sequences of equal length")
        if xs.size < 4:
            raise ValueError("at least four points are needed to fit three parameters")
        if np.unique(xs).size != xs.size:
            raise ValueError("xs must be distinct")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("xs and ys must be finite")
        order = np.argsort(xs, kind="stable")
        object.__setattr__(self, "xs", tuple(xs[order].tolist()))
        object.__setattr__(self, "ys", tuple(ys[order].tolist()))


def evaluate(params: CurveParams, x):
    """Curve value at ``x``.  Raises ``ZeroDivisionError`` at the pole."""
    x = np.asarray(x, dtype=float)
    if params.degenerate:
        out = np.full_like(x, params.c)
        return out if out.ndim else float(out)
    den = params.a * x + params.b
    if np.any(den == 0):
        raise ZeroDivisionError(f"gamma {x} hits the curve pole at {params.pole}")
    out = params.c + 1.0 / den
    return out if out.ndim else float(out)


def jacobian(p, xs):
    """Rows ``[-x/(ax+b)^2, -1/(ax+b)^2, 1]`` of the residual Jacobian."""
    a, b, _ = p
    xs = np.asarray(xs, dtype=float)
    inv2 = 1.0 / (a * xs + b) ** 2
    return np.column_stack([-xs * inv2, -inv2, np.ones_like(xs)])


def _residuals(p, xs, ys):
    a, b, c = p
    return c + 1.0 / (a * xs + b) - ys


def _pole_free(p, lo, hi) -> bool:
    # a*x + b must keep one sign over [lo, hi]; affine, so endpoints suffice
    a, b, _ = p
    d_lo, d_hi = a * lo + b, a * hi + b
    return bool(np.isfinite(d_lo) and np.isfinite(d_hi) and d_lo * d_hi > 0)


def _sse(p, xs, ys) -> float:
    r = _residuals(p, xs, ys)
    return float(r @ r)


def _levenberg_marquardt(p0, xs, ys, guard, max_iter, tol):
    p = np.asarray(p0, dtype=float)
    sse = _sse(p, xs, ys)
    mu = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        r = _residuals(p, xs, ys)
        J = jacobian(p, xs)
        g = J.T @ r
        if np.linalg.norm(g) <= tol:
            converged = True
            break
        JtJ = J.T @ J
        scale = np.diag(JtJ).copy()
        scale[scale == 0] = 1.0
        improved = False
        while mu < 1e16:
            try:
                step = np.linalg.solve(JtJ + mu * np.diag(scale), -g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            trial = p + step
            if _pole_free(trial, *guard):
                trial_sse = _sse(trial, xs, ys)
                if np.isfinite(trial_sse) and trial_sse < sse:
                    improved = True
                    break
            mu *= 10.0
        if not improved:
            # damping exhausted: the current point is as good as it gets locally
            converged = np.linalg.norm(g) <= np.sqrt(tol)
            break
        rel = (sse - trial_sse) / max(sse, 1e-300)
        p, sse = trial, trial_sse
        mu = max(mu / 10.0, 1e-12)
        if sse == 0.0 or np.linalg.norm(step) <= 1e-15 * (1.0 + np.linalg.norm(p)) or rel < 1e-15:
            converged = True
            break
    return p, sse, converged, it


def _linearized_seed(xs, ys, guard):
    """Scan c, fit ``1/(y - c) = a x + b`` linearly, keep the best nonlinear SSE."""
    best, best_sse = None, np.inf
    span = ys.max() - ys.min()
    lo_c = ys.min() - 4.0 * span - 1.0
    hi_c = ys.max() + 4.0 * span + 1.0
    A = np.column_stack([xs, np.ones_like(xs)])
    for c in np.linspace(lo_c, hi_c, 801):
        d = ys - c
        if np.any(np.abs(d) < 1e-12):
            continue
        (a, b), *_ = np.linalg.lstsq(A, 1.0 / d, rcond=None)
        p = np.array([a, b, c])
        if not _pole_free(p, *guard):
            continue
        s = _sse(p, xs, ys)
        if s < best_sse:
            best, best_sse = p, s
    return best


def solve(problem: FitProblem, init=(1.0, 1.0, 0.0), max_iter: int = 200,
          tol: float = 1e-10, pole_guard=None, restart: bool = True) -> CurveParams:
    """Fit ``y = c + 1/(a x + b)`` to ``problem``.

    Parameters
    ----------
    problem : FitProblem
        Observations; pair order does not matter.
    init : tuple of float
        Starting ``(a, b, c)``.
    max_iter : int
        Iteration cap per Levenberg-Marquardt run.
    tol : float
        Stop once the gradient norm ``|J^T r|`` falls below this.
    pole_guard : (float, float), optional
        Interval that must stay free of the pole.  Defaults to the span of
        ``problem.xs``.
    restart : bool
        Also run from a linearized seed (scan over ``c`` with a linear fit of
        ``1/(y - c)``) and keep whichever run ends with the lower residual.

    Returns
    -------
    CurveParams
        ``fit_mse`` is the mean squared residual.  Flat data (range below
        ``FLAT_RANGE``) returns a degenerate constant curve at the mean.
    """
    xs = np.asarray(problem.xs, dtype=float)
    ys = np.asarray(problem.ys, dtype=float)
    n = xs.size
    if ys.max() - ys.min() < FLAT_RANGE:
        c = float(ys.mean())
        mse = float(np.mean((ys - c) ** 2))
        return CurveParams(a=0.0, b=1.0, c=c, fit_mse=mse, degenerate=True)

    guard = (float(xs[0]), float(xs[-1])) if pole_guard is None else tuple(map(float, pole_guard))
    guard = (min(guard[0], xs[0]), max(guard[1], xs[-1]))

    starts = []
    p0 = np.asarray(init, dtype=float)
    if _pole_free(p0, *guard):
        starts.append(p0)
    if restart or not starts:
        seed = _linearized_seed(xs, ys, guard)
        if seed is not None:
            starts.append(seed)
    if not starts:
        raise ValueError("no pole-free starting point for the curve fit")

    best = None
    for start in starts:
        p, sse, conv, it = _levenberg_marquardt(start, xs, ys, guard, max_iter, tol)
        if best is None or sse < best[1]:
            best = (p, sse, conv, it)
    p, sse, conv, it = best
    return CurveParams(a=float(p[0]), b=float(p[1]), c=float(p[2]), fit_mse=sse / n,
                       degenerate=False, converged=bool(conv), n_iter=int(it))
