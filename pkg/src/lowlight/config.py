"""Enhancement settings and their loading from TOML files."""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, fields, replace

from .vibration import check_lambda

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["EnhanceConfig", "ConfigError", "check_gammas", "load_toml"]


class ConfigError(ValueError):
    """Invalid enhancement setting."""


def check_gammas(gammas) -> tuple:
    """Validate a probe sequence: >= 4 strictly increasing values in (0, 5]."""
    try:
        gammas = tuple(float(g) for g in gammas)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"gamma sequence must be numeric: {exc}") from None
    if len(gammas) < 4:
        raise ConfigError("gamma sequence needs at least four values to fit the curve")
    if any(not 0 < g <= 5 for g in gammas):
        raise ConfigError(f"gamma values must lie in (0, 5], got {gammas}")
    if any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise ConfigError(f"gamma sequence must be strictly increasing, got {gammas}")
    return gammas


def _as_float(name, value) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None


@dataclass(frozen=True)
class EnhanceConfig:
    """All tunables of the enhancement pipeline.

    Attributes
    ----------
    lam : float
        Joint factor of the energy model, in (1, 2].
    gammas : tuple of float
        Probe gamma intensities used to measure the lightness curve.
    dv_star : float
        Target gain of the mean nonzero lightness, in (0, 1).
    seg_threshold : float
        Dark/bright split of the rough weight map, in (0, 1).
    downsample : int
        Rate at which the V planes are shrunk before weight estimation.
    gf_subsample : int
        Internal subsample rate of the fast guided filter.
    eta : float
        Guided filter regularizer.
    gamma_clamp : (float, float)
        Working range for the inverted gamma.
    use_energy : bool
        False switches the tone map to plain normalized gamma correction.
    """

    lam: float = 2.0
    gammas: tuple = (0.3, 0.8, 1.3, 1.8)
    dv_star: float = 0.25
    seg_threshold: float = 0.5
    downsample: int = 2
    gf_subsample: int = 10
    eta: float = 0.04
    gamma_clamp: tuple = (0.1, 5.0)
    use_energy: bool = True

    def __post_init__(self):
        for name in ("lam", "dv_star", "seg_threshold", "eta"):
            object.__setattr__(self, name, _as_float(name, getattr(self, name)))
        try:
            check_lambda(self.lam)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "gammas", check_gammas(self.gammas))
        if not 0 < self.dv_star < 1:
            raise ConfigError(f"dv_star must lie in (0, 1), got {self.dv_star}")
        if not 0 < self.seg_threshold < 1:
            raise ConfigError(f"seg_threshold must lie in (0, 1), got {self.seg_threshold}")
        for name in ("downsample", "gf_subsample"):
            value = _as_float(name, getattr(self, name))
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value}")
            object.__setattr__(self, name, int(value))
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        try:
            lo, hi = (float(v) for v in self.gamma_clamp)
        except (TypeError, ValueError):
            raise ConfigError(f"gamma_clamp must be two numbers, got {self.gamma_clamp!r}") from None
        if not 0 < lo < hi:
            raise ConfigError(f"gamma_clamp must satisfy 0 < lo < hi, got {self.gamma_clamp}")
        object.__setattr__(self, "gamma_clamp", (lo, hi))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gammas"] = list(self.gammas)
        d["gamma_clamp"] = list(self.gamma_clamp)
        return d

    def updated(self, **overrides) -> "EnhanceConfig":
        """Copy with the non-None overrides applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown setting(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


# TOML keys accepted in config files, mapped to field names
_TOML_KEYS = {
    "lambda": "lam",
    "lam": "lam",
    "gammas": "gammas",
    "dv": "dv_star",
    "dv_star": "dv_star",
    "seg_threshold": "seg_threshold",
    "seg_thresh": "seg_threshold",
    "downsample": "downsample",
    "gf_subsample": "gf_subsample",
    "eta": "eta",
    "gamma_clamp": "gamma_clamp",
    "use_energy": "use_energy",
}


def load_toml(path) -> dict:
    """Read overrides from a TOML file (top level or an ``[enhance]`` table)."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    data = data.get("enhance", data)
    out = {}
    for key, value in data.items():
        if key not in _TOML_KEYS:
            raise ConfigError(f"{path}: unknown setting {key!r}")
        out[_TOML_KEYS[key]] = value
    return out
