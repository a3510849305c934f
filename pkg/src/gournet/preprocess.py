"""Resize, rescale, and training-time augmentation.

All geometry uses the half-pixel-center convention: sample location for
output pixel i is (i + 0.5) * scale - 0.5 in source coordinates. Positive
rotation turns the image content counterclockwise (0.25 turns of a square
equals np.rot90). These conventions are fixed so golden tests stay
portable; augmentation applies to the training split only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Rng


@dataclass(frozen=True)
class AugmentPolicy:
    flip_horizontal_prob: float = 0.5
    flip_vertical_prob: float = 0.5
    rotation_max_turns: float = 0.1

    def __post_init__(self):
        if not (0 <= self.flip_horizontal_prob <= 1
                and 0 <= self.flip_vertical_prob <= 1):
            raise ValueError("flip probabilities must lie in [0, 1]")
        if not 0 <= self.rotation_max_turns <= 0.5:
            raise ValueError("rotation_max_turns must lie in [0, 0.5]")


NO_AUGMENT = AugmentPolicy(0.0, 0.0, 0.0)


def _axis_coords(out_size: int, in_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(low index, high index, fraction) per output pixel along one axis."""
    src = (np.arange(out_size, dtype=np.float64) + 0.5) * (in_size / out_size) - 0.5
    src = np.clip(src, 0.0, in_size - 1.0)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, in_size - 1)
    return lo, hi, src - lo


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of an HxWxC image to out_h x out_w."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected non-empty HxWxC image, got shape {img.shape}")
    if out_h < 1 or out_w < 1:
        raise ValueError(f"output dims must be >= 1, got {out_h}x{out_w}")
    h, w = img.shape[:2]
    y0, y1, fy = _axis_coords(out_h, h)
    x0, x1, fx = _axis_coords(out_w, w)
    fy = fy[:, None, None]
    fx = fx[None, :, None]
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bottom = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    return (top * (1 - fy) + bottom * fy).astype(img.dtype, copy=False)


def rescale(img: np.ndarray) -> np.ndarray:
    """Map pixel values from [0, 255] to [0, 1] as float32."""
    return (np.asarray(img, dtype=np.float32) / np.float32(255.0))


def flip_horizontal(img: np.ndarray) -> np.ndarray:
    return img[:, ::-1, :]


def flip_vertical(img: np.ndarray) -> np.ndarray:
    return img[::-1, :, :]


def rotate(img: np.ndarray, turns: float) -> np.ndarray:
    """Rotate image content counterclockwise by ``turns`` of a full circle,
    about the image center, bilinear resampling, zero fill outside."""
    img = np.asarray(img)
    if img.ndim != 3:
        raise ValueError(f"expected HxWxC image, got shape {img.shape}")
    h, w = img.shape[:2]
    theta = 2.0 * np.pi * turns
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    dy = np.arange(h, dtype=np.float64)[:, None] - cy
    dx = np.arange(w, dtype=np.float64)[None, :] - cx
    # inverse map: where does each output pixel sample from
    x_src = cx + cos_t * dx - sin_t * dy
    y_src = cy + sin_t * dx + cos_t * dy

    x0 = np.floor(x_src).astype(np.int64)
    y0 = np.floor(y_src).astype(np.int64)
    fx = (x_src - x0)[:, :, None]
    fy = (y_src - y0)[:, :, None]

    out = np.zeros((h, w) + img.shape[2:], dtype=np.float64)
    for yi, wy in ((y0, 1 - fy), (y0 + 1, fy)):
        for xi, wx in ((x0, 1 - fx), (x0 + 1, fx)):
            inside = ((yi >= 0) & (yi < h) & (xi >= 0) & (xi < w))
            yc = np.clip(yi, 0, h - 1)
            xc = np.clip(xi, 0, w - 1)
            out += wy * wx * inside[:, :, None] * img[yc, xc]
    return out.astype(img.dtype, copy=False)


def augment(img: np.ndarray, policy: AugmentPolicy, rng: Rng) -> np.ndarray:
    """Random flips then rotation; expects a rescaled [0, 1] image.

    Consumes exactly three uniform draws (horizontal, vertical, angle) so
    the stream position is independent of which transforms fire.
    """
    u = rng.uniform(3, dtype=np.float64)
    if u[0] < policy.flip_horizontal_prob:
        img = flip_horizontal(img)
    if u[1] < policy.flip_vertical_prob:
        img = flip_vertical(img)
    turns = (2.0 * u[2] - 1.0) * policy.rotation_max_turns
    if turns != 0.0:
        img = rotate(img, turns)
    return np.ascontiguousarray(img)
