"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

from knitstitch.errors import ShapeError


def as_image(x, name: str = "image") -> np.ndarray:
    """Coerce to an (H, W) or (H, W, C) ndarray with C in {1, 3}."""
    arr = np.asarray(x)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ShapeError(f"{name} must be (H, W) or (H, W, 1|3), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} has a zero dimension: shape {arr.shape}")
    return arr


def check_unit_range(x: np.ndarray, name: str = "image") -> np.ndarray:
    if x.size and (float(x.min()) < 0.0 or float(x.max()) > 1.0):
        raise ShapeError(f"{name} values must lie in [0, 1], got [{x.min()}, {x.max()}]")
    return x


def as_batch(x, height: int | None = None, width: int | None = None, name: str = "batch") -> np.ndarray:
    """Coerce to (N, H, W, C) float64; optionally enforce spatial size."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 4:
        raise ShapeError(f"{name} must be a 4-d (N, H, W, C) array, got shape {arr.shape}")
    if height is not None and (arr.shape[1], arr.shape[2]) != (height, width):
        raise ShapeError(
            f"{name}: expected shape (N, {height}, {width}, C), received {arr.shape}"
        )
    return arr


def as_label_vector(y, n: int | None = None, name: str = "labels") -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-d, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ShapeError(f"{name} length {arr.shape[0]} does not match {n} samples")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.round(arr)):
            raise ShapeError(f"{name} must be integer class indices")
        arr = arr.astype(np.int64)
    return arr.astype(np.int64)
