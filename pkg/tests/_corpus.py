"""Synthetic low/normal image pairs built from bundled sample photographs.

Each normal-light image is darkened in linear light by a soft spotlight
(dim floor plus a Gaussian pool of light) and a random exposure, then
re-encoded to 8 bits.  The result has the uneven illumination of real
night scenes, and the original serves as the reference.
"""

from functools import lru_cache

import numpy as np


def _load_scenes():
    import skimage.data as data
    from sklearn.datasets import load_sample_images

    out = {}
    for name in ("astronaut", "coffee", "chelsea", "rocket", "immunohistochemistry"):
        out[name] = getattr(data, name)()[..., :3]
    left, right, _ = data.stereo_motorcycle()
    out["moto_l"] = left
    out["moto_r"] = right
    china, flower = load_sample_images().images
    out["china"] = china
    out["flower"] = flower
    out["camera"] = np.repeat(data.camera()[..., None], 3, axis=2)
    out["coins"] = np.repeat(data.coins()[..., None], 3, axis=2)
    return out


def darken(img, seed):
    """Spotlit low-light version of an 8-bit image, quantized to 8 bits."""
    rng = np.random.default_rng(seed)
    x = img.astype(np.float64) / 255.0
    lin = x ** 2.2
    h, w = x.shape[:2]
    cy = rng.uniform(0.2, 0.8) * h
    cx = rng.uniform(0.2, 0.8) * w
    sigma = rng.uniform(0.15, 0.3) * min(h, w)
    floor = rng.uniform(0.01, 0.04)
    yy, xx = np.mgrid[:h, :w]
    light = floor + (1 - floor) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sigma ** 2))
    exposure = rng.uniform(0.8, 1.5)
    low = np.clip(exposure * lin * light[..., None], 0, 1) ** (1 / 2.2)
    return np.round(low * 255) / 255, x


@lru_cache(maxsize=1)
def pairs():
    """``{name: (low, reference)}`` as float arrays in [0, 1], fixed seeds."""
    return {name: darken(img, seed) for seed, (name, img) in enumerate(_load_scenes().items())}


def dark_pairs(limit=0.4):
    """Pairs whose low image has mean V below ``limit``."""
    return {k: v for k, v in pairs().items() if v[0].max(axis=2).mean() < limit}
