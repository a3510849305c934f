"""Image file decoding: binary PPM (P6) natively, JPEG via Pillow.

Decoded images are HxWx3 float32 RGB arrays with values in [0, 255].
"""

from __future__ import annotations

import os

import numpy as np

from .errors import DataError

JPEG_MAGIC = b"\xff\xd8"
PPM_MAGIC = b"P6"


def sniff_format(path: str) -> str | None:
    """'jpeg', 'ppm', or None when the header matches neither."""
    try:
        with open(path, "rb") as f:
            head = f.read(2)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    if head == JPEG_MAGIC:
        return "jpeg"
    if head == PPM_MAGIC:
        return "ppm"
    return None


def _read_ppm_token(f) -> bytes:
    """Next whitespace-delimited token, skipping '#' comment lines."""
    token = b""
    while True:
        ch = f.read(1)
        if not ch:
            break
        if ch == b"#":
            while ch and ch != b"\n":
                ch = f.read(1)
            continue
        if ch.isspace():
            if token:
                break
            continue
        token += ch
    return token


def read_ppm(path: str) -> np.ndarray:
    """Decode a binary (P6) PPM file."""
    with open(path, "rb") as f:
        if f.read(2) != PPM_MAGIC:
            raise DataError(f"{path}: not a P6 PPM file")
        try:
            width = int(_read_ppm_token(f))
            height = int(_read_ppm_token(f))
            maxval = int(_read_ppm_token(f))
        except ValueError as e:
            raise DataError(f"{path}: malformed PPM header") from e
        if width < 1 or height < 1 or not (0 < maxval < 65536):
            raise DataError(f"{path}: bad PPM dimensions {width}x{height}/{maxval}")
        if maxval > 255:
            raise DataError(f"{path}: 16-bit PPM not supported")
        raw = f.read(width * height * 3)
    if len(raw) != width * height * 3:
        raise DataError(f"{path}: truncated PPM pixel data")
    img = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)
    if maxval != 255:
        return img.astype(np.float32) * (255.0 / maxval)
    return img.astype(np.float32)


def write_ppm(path: str, img: np.ndarray) -> None:
    """Write an HxWx3 array (values in [0, 255]) as binary PPM."""
    arr = np.clip(np.asarray(img), 0, 255).astype(np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DataError(f"PPM writer needs HxWx3 data, got {arr.shape}")
    h, w = arr.shape[:2]
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(arr.tobytes())


def read_jpeg(path: str) -> np.ndarray:
    from PIL import Image

    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.float32)
    except Exception as e:
        raise DataError(f"{path}: JPEG decode failed: {e}") from e


def load_image(path: str) -> np.ndarray:
    """Decode a JPEG or PPM file to HxWx3 float32 RGB in [0, 255]."""
    if not os.path.isfile(path):
        raise DataError(f"no such image file: {path}")
    fmt = sniff_format(path)
    if fmt == "ppm":
        return read_ppm(path)
    if fmt == "jpeg":
        return read_jpeg(path)
    raise DataError(f"{path}: not a JPEG or P6 PPM file")
