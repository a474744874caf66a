"""Image ingestion, vectorization, and the FFDS dataset file format.

Images come in as class-labeled directory trees (one subdirectory per
class), are decoded to plain 8-bit RGB grids, and leave as rows of a
float64 feature matrix scaled to [0, 1]. Datasets round-trip through FFDS,
a little-endian binary format documented in `save_dataset`, so a resolution
sweep can re-read its inputs bit-exactly instead of re-decoding images.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from ._binio import expect_magic, read_exact, write_header
from .errors import DataError

logger = logging.getLogger(__name__)

FFDS_MAGIC = b"FFDS"
FFDS_VERSION = 1

POSITIVE_LABEL = 1   # "fire"
NEGATIVE_LABEL = -1  # "nofire"


@dataclass(frozen=True, eq=False)
class RgbImage:
    """A width x height grid of 8-bit RGB pixels.

    `pixels` has shape (height, width, 3), dtype uint8, row-major. Treated
    as immutable everywhere in this package.
    """

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DataError(f"image dimensions must be >= 1, "
                            f"got {self.width}x{self.height}")
        if self.pixels.shape != (self.height, self.width, 3):
            raise DataError(f"pixel array shape {self.pixels.shape} does not "
                            f"match {self.height}x{self.width}x3")
        if self.pixels.dtype != np.uint8:
            raise DataError(f"pixel dtype must be uint8, got {self.pixels.dtype}")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature rows in [0, 1] with labels in {+1, -1}.

    `resolution` records the square resize size the rows were produced at;
    0 means the rows did not come from square images.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: Optional[tuple] = None
    resolution: int = 0

    def __post_init__(self):
        X, y = self.features, self.labels
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if X.dtype != np.float64:
            raise DataError(f"features must be float64, got {X.dtype}")
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise DataError(f"labels shape {y.shape} does not match "
                            f"{X.shape[0]} rows")
        if len(y) and not np.all((y == POSITIVE_LABEL) | (y == NEGATIVE_LABEL)):
            bad = y[(y != POSITIVE_LABEL) & (y != NEGATIVE_LABEL)][0]
            raise DataError(f"labels must be +1 or -1, found {bad}")
        if X.size and (np.min(X) < 0.0 or np.max(X) > 1.0):
            raise DataError("feature values must lie in [0, 1]")
        if self.resolution < 0:
            raise DataError(f"resolution must be >= 0, got {self.resolution}")
        if self.resolution and X.shape[1] != self.resolution ** 2 * 3:
            raise DataError(f"feature width {X.shape[1]} does not match "
                            f"resolution {self.resolution} "
                            f"(expected {self.resolution ** 2 * 3})")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _composite_over_black(rgba: np.ndarray) -> np.ndarray:
    """Flatten an RGBA array onto a black background.

    Each channel becomes round(c * a / 255) with ties rounding up, done in
    integer arithmetic so the result is exactly reproducible.
    """
    c = rgba[..., :3].astype(np.uint32)
    a = rgba[..., 3:4].astype(np.uint32)
    return ((2 * c * a + 255) // 510).astype(np.uint8)


def load_image(path) -> RgbImage:
    """Decode a PNG or JPEG file into an RgbImage.

    Grayscale inputs are replicated to three channels; alpha is composited
    over black. Anything unreadable is reported with the offending path.
    """
    p = str(path)
    try:
        with Image.open(path) as img:
            if img.format not in ("PNG", "JPEG"):
                raise DataError(f"{p}: unsupported format {img.format!r} "
                                f"(PNG or JPEG required)")
            has_alpha = (img.mode in ("RGBA", "LA", "PA")
                         or "transparency" in img.info)
            if img.mode == "P" or has_alpha:
                arr = np.asarray(img.convert("RGBA"))
                pixels = _composite_over_black(arr)
            else:
                pixels = np.asarray(img.convert("RGB"))
    except FileNotFoundError:
        raise DataError(f"{p}: file not found") from None
    except UnidentifiedImageError:
        raise DataError(f"{p}: not a recognized image file") from None
    except OSError as exc:
        raise DataError(f"{p}: corrupt image data ({exc})") from None
    h, w = pixels.shape[:2]
    return RgbImage(width=w, height=h, pixels=np.ascontiguousarray(pixels))


def ingest_directory(root, positive_dir_name: str,
                     negative_dir_name: str) -> list:
    """Load every image under root/<positive> and root/<negative>.

    Returns (RgbImage, label) pairs with label +1 for the positive class,
    sorted by file path lexicographically. Files that fail to decode are
    skipped and counted in a single warning.
    """
    rootp = Path(root)
    entries = []
    for dir_name, label in ((positive_dir_name, POSITIVE_LABEL),
                            (negative_dir_name, NEGATIVE_LABEL)):
        class_dir = rootp / dir_name
        if not class_dir.is_dir():
            raise DataError(f"{rootp}: missing subdirectory {dir_name!r}")
        for p in class_dir.iterdir():
            if p.is_file():
                entries.append((str(p), label))
    entries.sort(key=lambda e: e[0])

    out = []
    skipped = 0
    per_class = {POSITIVE_LABEL: 0, NEGATIVE_LABEL: 0}
    for path, label in entries:
        try:
            img = load_image(path)
        except DataError:
            skipped += 1
            continue
        out.append((img, label))
        per_class[label] += 1
    if skipped:
        logger.warning("skipped %d non-image files under %s", skipped, rootp)
    for dir_name, label in ((positive_dir_name, POSITIVE_LABEL),
                            (negative_dir_name, NEGATIVE_LABEL)):
        if per_class[label] == 0:
            raise DataError(f"{rootp}: zero images found in class "
                            f"{dir_name!r}")
    return out


def vectorize(image: RgbImage) -> np.ndarray:
    """Flatten an image into a feature row.

    Row-major pixel order with channels interleaved r, g, b per pixel, each
    channel divided by 255 into [0, 1]. Length = width * height * 3.
    """
    return image.pixels.reshape(-1).astype(np.float64) / 255.0


def images_to_dataset(pairs, resolution: int = 0) -> LabeledDataset:
    """Vectorize (image, label) pairs into a LabeledDataset."""
    if pairs:
        features = np.stack([vectorize(img) for img, _ in pairs])
        labels = np.array([label for _, label in pairs], dtype=np.int64)
    else:
        side = resolution if resolution else 1
        features = np.zeros((0, side * side * 3), dtype=np.float64)
        labels = np.zeros(0, dtype=np.int64)
    return LabeledDataset(features=features, labels=labels,
                          resolution=resolution)


def save_dataset(ds: LabeledDataset, path) -> None:
    """Write a dataset in the FFDS format.

    Layout (little-endian, no padding): magic "FFDS"; u32 version = 1;
    u64 n_samples; u64 n_features; u32 resolution (0 if not derived from
    square images); n_samples i8 labels in {+1, -1}; n_samples * n_features
    f64 features, row-major. Feature names are not persisted.
    """
    n, d = ds.features.shape
    with open(path, "wb") as f:
        write_header(f, FFDS_MAGIC, FFDS_VERSION)
        f.write(struct.pack("<QQI", n, d, ds.resolution))
        f.write(ds.labels.astype("<i1").tobytes())
        f.write(np.ascontiguousarray(ds.features, dtype="<f8").tobytes())


def load_dataset(path) -> LabeledDataset:
    """Read an FFDS file written by save_dataset; bit-exact round-trip."""
    p = str(path)
    try:
        f = open(path, "rb")
    except FileNotFoundError:
        raise DataError(f"{p}: file not found") from None
    with f:
        expect_magic(f, FFDS_MAGIC, FFDS_VERSION, p)
        n, d, resolution = struct.unpack(
            "<QQI", read_exact(f, 20, p, "dataset header"))
        labels = np.frombuffer(read_exact(f, n, p, "labels"),
                               dtype="<i1").astype(np.int64)
        features = np.frombuffer(
            read_exact(f, n * d * 8, p, "feature matrix"),
            dtype="<f8").reshape(n, d)
        if f.read(1):
            raise DataError(f"{p}: trailing bytes after feature matrix")
    try:
        return LabeledDataset(features=features, labels=labels,
                              resolution=resolution)
    except DataError as exc:
        raise DataError(f"{p}: {exc}") from None
