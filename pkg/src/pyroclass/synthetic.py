"""Synthetic two-class image corpus for demos and pipeline tests.

Positive images are warm (red-dominant) with a bright patch, negatives are
cool and dark, so even low resolutions separate the classes well. All
pixel data derives from seeded generators; writing the same corpus twice
produces byte-identical PNG files.
"""

from pathlib import Path

import numpy as np
from PIL import Image

POS_BASE = (205, 95, 35)
NEG_BASE = (45, 110, 70)


def class_image(kind: str, seed: int, width: int, height: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    base = POS_BASE if kind == "fire" else NEG_BASE
    pixels = np.asarray(base, dtype=np.float64)[None, None, :]
    pixels = pixels + rng.normal(0.0, 18.0, size=(height, width, 3))
    if kind == "fire":
        cy = int(rng.integers(0, height))
        cx = int(rng.integers(0, width))
        yy, xx = np.ogrid[:height, :width]
        blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2)
                      / (0.08 * width * height))
        pixels[..., 0] += 50.0 * blob
        pixels[..., 1] += 35.0 * blob
    return np.clip(pixels, 0, 255).astype(np.uint8)


def write_corpus(root, n_per_class: int, seed: int = 0,
                 min_side: int = 24, max_side: int = 40) -> None:
    """Write root/fire/*.png and root/nofire/*.png."""
    root = Path(root)
    sizer = np.random.default_rng(seed ^ 0x5EED)
    for kind in ("fire", "nofire"):
        sub = root / kind
        sub.mkdir(parents=True, exist_ok=True)
        for i in range(n_per_class):
            width = int(sizer.integers(min_side, max_side + 1))
            height = int(sizer.integers(min_side, max_side + 1))
            arr = class_image(kind, seed * 100003 + i, width, height)
            Image.fromarray(arr, mode="RGB").save(sub / f"{kind}_{i:03d}.png")
