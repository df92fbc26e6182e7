"""Low-light image enhancement with an energy-weighted gamma model.

The usual entry point is :func:`enhance_full`, which brightens an RGB image
to a target mean-lightness gain and blends the result back in dark regions
only.  Quality metrics live in :mod:`lowlight.metrics`.
"""

from .config import ConfigError, EnhanceConfig, load_toml
from .fusion import Diagnostics, enhance_full
from .imageops import SizeMismatchError
from .imfile import ImageReadError, read_image, write_image
from .metrics import MetricsReport, evaluate_pair
from .tone import LightnessError, enhance_global

__all__ = [
    "ConfigError",
    "Diagnostics",
    "EnhanceConfig",
    "ImageReadError",
    "LightnessError",
    "MetricsReport",
    "SizeMismatchError",
    "enhance_full",
    "enhance_global",
    "evaluate_pair",
    "load_toml",
    "read_image",
    "write_image",
]

__version__ = "0.1.0"
