"""Image transforms and the 4x training-set augmentation pipeline.

Resize, horizontal flip, and median blur, all deterministic: repeated
application to equal inputs yields bit-equal outputs. Augmentation applies
to training data only; that rule is enforced by the experiment layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import RgbImage
from .errors import UsageError


@dataclass(frozen=True)
class ResizeSpec:
    """Square resize target, one of the configured resolution ladder."""

    target: int

    def __post_init__(self):
        if self.target < 1:
            raise UsageError(f"resize target must be >= 1, got {self.target}")


@dataclass(frozen=True)
class AugmentPlan:
    """Which label-preserving variants to add per training image.

    With both flags on, each image yields exactly 4 variants.
    """

    enable_flip: bool = True
    enable_median_blur: bool = True
    blur_window: int = 3

    def __post_init__(self):
        if self.blur_window < 3 or self.blur_window % 2 == 0:
            raise UsageError(f"blur window must be an odd integer >= 3, "
                             f"got {self.blur_window}")

    @property
    def variants_per_image(self) -> int:
        return (1 + int(self.enable_flip)) * (1 + int(self.enable_median_blur))


def _source_coords(target: int, source: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pixel-center sampling positions for one axis.

    src = (dst + 0.5) * (source / target) - 0.5, clamped into the valid
    range. Returns (floor index, ceil index, fractional weight).
    """
    src = (np.arange(target, dtype=np.float64) + 0.5) * (source / target) - 0.5
    src = np.clip(src, 0.0, source - 1.0)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, source - 1)
    return lo, hi, src - lo


def resize_bilinear(img: RgbImage, target_w: int, target_h: int) -> RgbImage:
    """Resample to target_w x target_h with per-channel bilinear blending.

    Sampling uses the pixel-center mapping, so resizing to the same size is
    an exact identity. Results round half-up to 8 bits.
    """
    if target_w < 1 or target_h < 1:
        raise UsageError(f"resize targets must be >= 1, "
                         f"got {target_w}x{target_h}")
    x0, x1, fx = _source_coords(target_w, img.width)
    y0, y1, fy = _source_coords(target_h, img.height)
    p = img.pixels.astype(np.float64)
    fx = fx[None, :, None]
    fy = fy[:, None, None]
    top = p[y0][:, x0] * (1.0 - fx) + p[y0][:, x1] * fx
    bottom = p[y1][:, x0] * (1.0 - fx) + p[y1][:, x1] * fx
    blended = top * (1.0 - fy) + bottom * fy
    out = np.floor(blended + 0.5).astype(np.uint8)
    return RgbImage(width=target_w, height=target_h, pixels=out)


def flip_horizontal(img: RgbImage) -> RgbImage:
    """Mirror left-right: out[y][x] = in[y][width-1-x]."""
    return RgbImage(width=img.width, height=img.height,
                    pixels=np.ascontiguousarray(img.pixels[:, ::-1, :]))


def median_blur(img: RgbImage, window: int) -> RgbImage:
    """Median filter each channel over a window x window neighborhood.

    Borders are handled by edge replication. The window must be odd, so the
    median is always an exact order statistic of the neighborhood.
    """
    if window < 3 or window % 2 == 0:
        raise UsageError(f"blur window must be an odd integer >= 3, "
                         f"got {window}")
    half = window // 2
    padded = np.pad(img.pixels, ((half, half), (half, half), (0, 0)),
                    mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(
        padded, (window, window), axis=(0, 1))
    out = np.median(windows, axis=(-2, -1)).astype(np.uint8)
    return RgbImage(width=img.width, height=img.height,
                    pixels=np.ascontiguousarray(out))


def augment(pairs, plan: AugmentPlan) -> list:
    """Expand (image, label) pairs with the planned variants.

    Per input, in order: original, flipped, blurred original, blurred
    flipped (each subject to its flag). Labels are copied unchanged, so the
    output length is variants_per_image * len(pairs).
    """
    out = []
    for img, label in pairs:
        variants = [img]
        if plan.enable_flip:
            variants.append(flip_horizontal(img))
        if plan.enable_median_blur:
            variants += [median_blur(v, plan.blur_window) for v in variants]
        out.extend((v, label) for v in variants)
    return out
