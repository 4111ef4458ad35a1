"""Image decoding, normalization, and the stochastic augmentation recipe.

Images travel through the pipeline as (H, W, C) float64 arrays in [0, 1]
(raw decodes are uint8 in 0..255). All randomness comes from an explicit
RandomStream, so identical seeds reproduce identical pixels bit for bit.

The training recipe composes horizontal flip (p = 0.5), rotation drawn from
U(-rotation_degrees, +rotation_degrees), shear from U(-shear_range,
+shear_range) and an isotropic zoom from U(zoom low, zoom high) into a
single affine map about the image center, resampled once with bilinear
interpolation. Out-of-bounds reads clamp to the nearest edge pixel, which
is what keeps transformed values inside the input's value envelope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from knitstitch.errors import ConfigError, ShapeError
from knitstitch.rng import RandomStream
from knitstitch.validation import as_image

TARGET_SIZE = (224, 224)


@dataclass(frozen=True)
class AugmentationConfig:
    """Stochastic transform recipe applied to the training split only."""

    horizontal_flip: bool = True
    rotation_degrees: float = 20.0
    zoom_range: tuple[float, float] = (0.8, 1.2)
    shear_range: float = 0.2
    fill_mode: str = "nearest"
    rescale_factor: float = 1.0 / 255.0

    def __post_init__(self):
        low, high = self.zoom_range
        if not (0.0 < low <= 1.0 <= high):
            raise ConfigError(f"zoom_range must satisfy 0 < low <= 1 <= high, got {self.zoom_range}")
        if self.rotation_degrees < 0:
            raise ConfigError("rotation_degrees must be >= 0")
        if self.shear_range < 0:
            raise ConfigError("shear_range must be >= 0")
        if self.fill_mode != "nearest":
            raise ConfigError(f"unsupported fill_mode {self.fill_mode!r}; only 'nearest' is implemented")

    @classmethod
    def identity(cls) -> "AugmentationConfig":
        """Config with every range collapsed; random_affine becomes the exact identity."""
        return cls(horizontal_flip=False, rotation_degrees=0.0, zoom_range=(1.0, 1.0), shear_range=0.0)


def decode_image(path) -> np.ndarray:
    """Read a PNG or JPEG file into an (H, W, 3) uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_image(img: np.ndarray, path) -> None:
    """Write a float image in [0, 1] (or a uint8 image) as PNG."""
    arr = as_image(img, "image")
    if arr.dtype != np.uint8:
        arr = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    Image.fromarray(arr).save(path, format="PNG")


def rescale(img, factor: float = 1.0 / 255.0) -> np.ndarray:
    """Map integer-valued 0..255 pixels to floats via multiplication by ``factor``."""
    arr = as_image(img, "image")
    values = arr.astype(np.float64)
    if not np.all(values == np.round(values)):
        raise ShapeError("rescale expects integer-valued input in 0..255")
    if values.size and (values.min() < 0 or values.max() > 255):
        raise ShapeError(f"rescale expects values in 0..255, got [{values.min()}, {values.max()}]")
    return values * float(factor)


def to_grayscale(img) -> np.ndarray:
    """Luminance (0.299 R + 0.587 G + 0.114 B) replicated across 3 channels.

    Downstream backbones expect 3-channel input, so the single luminance
    plane is replicated. 1-channel input is replicated without conversion.
    """
    arr = as_image(img, "image").astype(np.float64)
    if arr.shape[2] == 1:
        y = arr[:, :, 0]
    else:
        r, g, b = arr[:, :, 0], arr[:, :, 1], arr[:, :, 2]
        # evaluated as B + 0.587 (G - B) + 0.299 (R - B): gray pixels (R=G=B)
        # are exact fixed points, which plain weight sums do not guarantee
        y = b + 0.587 * (g - b) + 0.299 * (r - b)
    return np.repeat(y[:, :, None], 3, axis=2)


def _axis_lerp_coords(n_in: int, n_out: int):
    # pixel-centers convention: src = (dst + 0.5) * n_in/n_out - 0.5
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1.0)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def resize(img, size: tuple[int, int] = TARGET_SIZE) -> np.ndarray:
    """Bilinear resize to (height, width); channel count preserved.

    Separable lerp form: same-size calls reproduce the input bit for bit and
    constant images stay exactly constant.
    """
    arr = as_image(img, "image").astype(np.float64)
    height, width = size
    if height < 1 or width < 1:
        raise ShapeError(f"resize target must be positive, got {size}")
    y0, y1, fy = _axis_lerp_coords(arr.shape[0], height)
    rows = arr[y0] + fy[:, None, None] * (arr[y1] - arr[y0])
    x0, x1, fx = _axis_lerp_coords(arr.shape[1], width)
    return rows[:, x0] + fx[None, :, None] * (rows[:, x1] - rows[:, x0])


def warp_affine(img, matrix: np.ndarray, order: str = "bilinear") -> np.ndarray:
    """Resample ``img`` through a 2x2 output-to-source map about the center.

    ``matrix`` sends centered output coordinates (x right, y down) to
    centered source coordinates. Source reads outside the image clamp to the
    nearest edge pixel (nearest fill). ``order`` is "bilinear" or "nearest".
    """
    arr = as_image(img, "image").astype(np.float64)
    h, w = arr.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    dx, dy = xs - cx, ys - cy
    sx = matrix[0, 0] * dx + matrix[0, 1] * dy + cx
    sy = matrix[1, 0] * dx + matrix[1, 1] * dy + cy

    if order == "nearest":
        iy = np.clip(np.rint(sy).astype(np.int64), 0, h - 1)
        ix = np.clip(np.rint(sx).astype(np.int64), 0, w - 1)
        return arr[iy, ix]
    if order != "bilinear":
        raise ConfigError(f"unknown interpolation order {order!r}")

    sy = np.clip(sy, 0.0, h - 1.0)
    sx = np.clip(sx, 0.0, w - 1.0)
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (sy - y0)[:, :, None]
    fx = (sx - x0)[:, :, None]
    top = arr[y0, x0] + fx * (arr[y0, x1] - arr[y0, x0])
    bottom = arr[y1, x0] + fx * (arr[y1, x1] - arr[y1, x0])
    return top + fy * (bottom - top)


@dataclass(frozen=True)
class AffineDraw:
    """One realization of the augmentation randomness."""

    flip: bool
    rotation: float  # radians
    zoom: float
    shear: float  # radians


def draw_affine_params(cfg: AugmentationConfig, rng: RandomStream) -> AffineDraw:
    """Consume exactly four draws: flip gate, rotation, zoom, shear.

    All four are always consumed so the draw sequence stays aligned across
    configs that disable individual transforms.
    """
    flip_gate = rng.uniform()
    rotation = np.deg2rad(rng.uniform(-cfg.rotation_degrees, cfg.rotation_degrees))
    zoom = rng.uniform(cfg.zoom_range[0], cfg.zoom_range[1])
    shear = rng.uniform(-cfg.shear_range, cfg.shear_range)
    return AffineDraw(
        flip=bool(cfg.horizontal_flip and flip_gate < 0.5),
        rotation=float(rotation),
        zoom=float(zoom),
        shear=float(shear),
    )


def inverse_affine_matrix(draw: AffineDraw) -> np.ndarray:
    """Output-to-source matrix for flip -> rotate -> shear -> zoom.

    Composed analytically from the factor inverses so a degenerate draw
    (no flip, zeros, zoom 1) yields the exact identity matrix.
    """
    flip_inv = np.array([[-1.0, 0.0], [0.0, 1.0]]) if draw.flip else np.eye(2)
    c, s = np.cos(draw.rotation), np.sin(draw.rotation)
    rot_inv = np.array([[c, s], [-s, c]])
    # forward shear is [[1, -sin t], [0, cos t]]
    shear_inv = np.array([[1.0, np.tan(draw.shear)], [0.0, 1.0 / np.cos(draw.shear)]])
    zoom_inv = np.array([[1.0 / draw.zoom, 0.0], [0.0, 1.0 / draw.zoom]])
    return flip_inv @ rot_inv @ shear_inv @ zoom_inv


def random_affine(img, cfg: AugmentationConfig, rng: RandomStream) -> np.ndarray:
    """Apply one random flip/rotate/shear/zoom as a single resampling pass.

    Output has the input's shape; values never leave the input's [min, max]
    envelope (bilinear stays inside it in exact arithmetic, the final clip
    absorbs interpolation rounding).
    """
    arr = as_image(img, "image").astype(np.float64)
    draw = draw_affine_params(cfg, rng)
    out = warp_affine(arr, inverse_affine_matrix(draw))
    if arr.size:
        out = np.clip(out, arr.min(), arr.max())
    return out


def eval_transform(raw: np.ndarray, size: tuple[int, int] = TARGET_SIZE) -> np.ndarray:
    """Deterministic eval-path preprocessing: rescale, grayscale, resize."""
    return resize(to_grayscale(rescale(raw)), size)


def train_transform(
    raw: np.ndarray,
    cfg: AugmentationConfig,
    rng: RandomStream,
    size: tuple[int, int] = TARGET_SIZE,
) -> np.ndarray:
    """Training-path preprocessing: rescale, grayscale, random affine, resize."""
    x = random_affine(to_grayscale(rescale(raw, cfg.rescale_factor)), cfg, rng)
    # resize is a lerp, so clipping to the unit range only absorbs rounding
    return np.clip(resize(x, size), 0.0, 1.0)
