"""Cell vibration energy model.

A retinal cell membrane is treated as a critically damped oscillator that is
kicked by a stimulus of intensity ``M``.  The closed-form kinematics give three
energies (repulsive, single stimulation, cycle stimulation).  Replacing the
physical constants ``c1``, ``c2`` and ``k`` by a single joint factor
``lambda`` in (1, 2] turns the stimulation energies into simple functions of a
normalized pixel intensity, which the tone model uses as a gain corrector.

Every function here works on python floats and on numpy arrays alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "VibrationParams",
    "check_lambda",
    "displacement",
    "velocity",
    "repulsive_energy",
    "stimulation_energy_raw",
    "cycle_energy_raw",
    "lambda_to_params",
    "epsilon_s",
    "cycle_energy",
]

# c1 fixed so that the cycle energy loses its 1/(2*sqrt(2)*pi*c1) prefactor
C1_NORMALIZED = 1.0 / (2.0 * math.sqrt(2.0) * math.pi)


@dataclass(frozen=True)
class VibrationParams:
    """Physical parameters of the damped membrane model.

    Parameters
    ----------
    c1, c2 : float
        Integral constants of the critically damped solution.
    k : float
        Membrane stiffness, ``k > 0``.
    m : float
        Stimulus intensity (the equivalent mass), ``m >= 0``.
    beta : float, optional
        Damping rate.  When omitted the system is critically damped and
        ``beta = sqrt(k / m)``; it stays ``None`` for ``m == 0`` where the
        natural frequency is undefined.
    """

    c1: float
    c2: float
    k: float = 1.0
    m: float = 1.0
    beta: float | None = None

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"stiffness k must be positive, got {self.k}")
        if self.c2 < 0:
            raise ValueError(f"c2 must be non-negative, got {self.c2}")
        if self.m < 0:
            raise ValueError(f"stimulus m must be non-negative, got {self.m}")
        if self.beta is None:
            if self.m > 0:
                object.__setattr__(self, "beta", math.sqrt(self.k / self.m))
        elif self.beta < 0:
            raise ValueError(f"damping rate must be non-negative, got {self.beta}")

    @property
    def omega0(self) -> float:
        """Natural angular frequency ``sqrt(k / m)``; requires ``m > 0``."""
        if self.m <= 0:
            raise ValueError("natural frequency is undefined for m == 0")
        return math.sqrt(self.k / self.m)

    def with_stimulus(self, m: float) -> "VibrationParams":
        """Same membrane, new stimulus, critical damping recomputed."""
        return replace(self, m=m, beta=None)


def _require_beta(p: VibrationParams) -> float:
    if p.beta is None:
        raise ValueError("damping rate is undefined (m == 0 and no explicit beta)")
    return p.beta


def displacement(t, p: VibrationParams):
    """Membrane displacement ``exp(-beta t) (c1 + c2 t)``."""
    beta = _require_beta(p)
    return np.exp(-beta * t) * (p.c1 + p.c2 * t)


def velocity(t, p: VibrationParams):
    """Time derivative of :func:`displacement`."""
    beta = _require_beta(p)
    decay = np.exp(-beta * t)
    return p.c2 * decay - beta * decay * (p.c1 + p.c2 * t)


def repulsive_energy(p: VibrationParams) -> float:
    """Energy spent rejecting the stimulus, ``k c1^2 / 2``."""
    return 0.5 * p.k * p.c1 ** 2


def stimulation_energy_raw(p: VibrationParams) -> float:
    """Single stimulation energy ``c1 c2 sqrt(k M) - c2^2 M / 2``."""
    return p.c1 * p.c2 * math.sqrt(p.k * p.m) - 0.5 * p.c2 ** 2 * p.m


def cycle_energy_raw(p: VibrationParams) -> float:
    """Cycle stimulation energy ``c1 c2 k / 2pi - c2^2 sqrt(k M) / 4pi``.

    For ``m > 0`` this equals ``omega0 / 2pi`` times the single stimulation
    energy.  The formula itself is total and is also evaluated at ``m == 0``.
    """
    return (p.c1 * p.c2 * p.k / (2.0 * math.pi)
            - p.c2 ** 2 * math.sqrt(p.k * p.m) / (4.0 * math.pi))


def check_lambda(lam: float) -> float:
    """Validate the joint factor and return it as a float."""
    lam = float(lam)
    if not 1.0 < lam <= 2.0:
        raise ValueError(f"lambda must lie in (1, 2], got {lam}")
    return lam


def lambda_to_params(lam: float, m: float = 0.0) -> VibrationParams:
    """Physical constants implied by the joint factor.

    ``c1 = 1/(2 sqrt(2) pi)``, ``c2 = sqrt(2 (lambda - 1))`` and
    ``k = 4 pi^2 lambda^2 / (lambda - 1)``.  The stimulus is left to the
    caller; pass ``m`` or use :meth:`VibrationParams.with_stimulus`.
    """
    lam = check_lambda(lam)
    c2 = math.sqrt(2.0 * (lam - 1.0))
    k = 4.0 * math.pi ** 2 * lam ** 2 / (lam - 1.0)
    return VibrationParams(c1=C1_NORMALIZED, c2=c2, k=k, m=m)


def epsilon_s(lam: float, i):
    """Single stimulation energy of a normalized intensity.

    ``lambda sqrt(I) + (1 - lambda) I``; maps 0 to 0 and 1 to 1 and lies
    above the identity on (0, 1).
    """
    lam = check_lambda(lam)
    return lam * np.sqrt(i) + (1.0 - lam) * i


def cycle_energy(lam: float, i):
    """Cycle stimulation energy ``lambda^2/sqrt(lambda-1) - lambda sqrt((lambda-1) I)``.

    Strictly decreasing in ``i`` and positive on [0, 1].
    """
    lam = check_lambda(lam)
    return lam ** 2 / math.sqrt(lam - 1.0) - lam * np.sqrt((lam - 1.0) * i)
