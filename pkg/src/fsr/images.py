"""Image decode/encode helpers.

All in-memory rasters are float32, linear light, in [0,1], with RGB
channel order. PNG (8/16-bit) and PPM are accepted on input; output is
always 16-bit PNG.
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

MAX_PIXELS = 1_200_000


def decode_to_linear(path: str | Path, gamma: float | str = 2.2) -> np.ndarray:
    """Read an image file into a linear-light float64 RGB array in [0,1].

    @param gamma: display gamma to remove, or "linear" if the file already
        stores linear values.
    """
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IOError(f"cannot decode image: {path}")
    if raw.dtype == np.uint8:
        img = raw.astype(np.float64) / 255.0
    elif raw.dtype == np.uint16:
        img = raw.astype(np.float64) / 65535.0
    else:
        img = np.clip(raw.astype(np.float64), 0.0, 1.0)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    elif img.shape[2] == 4:
        img = img[:, :, :3]
    img = img[:, :, ::-1]  # BGR -> RGB
    if gamma != "linear" and gamma is not None:
        img = np.power(img, float(gamma))
    return np.ascontiguousarray(img)


def encode_png16(img: np.ndarray) -> bytes:
    """Encode a float [0,1] raster (HxW gray or HxWx3 RGB) as 16-bit PNG bytes."""
    q = np.clip(np.rint(np.asarray(img, dtype=np.float64) * 65535.0), 0, 65535).astype(np.uint16)
    if q.ndim == 3:
        q = q[:, :, ::-1]  # RGB -> BGR
    ok, buf = cv2.imencode(".png", q)
    if not ok:
        raise IOError("PNG encoding failed")
    return buf.tobytes()


def encode_png16_indices(indices: np.ndarray) -> bytes:
    """Encode an integer label raster as a 16-bit grayscale PNG, values kept as-is."""
    q = np.asarray(indices)
    if q.min() < 0 or q.max() > 65535:
        raise ValueError("label values outside uint16 range")
    ok, buf = cv2.imencode(".png", q.astype(np.uint16))
    if not ok:
        raise IOError("PNG encoding failed")
    return buf.tobytes()


def decode_png16(data: bytes) -> np.ndarray:
    """Decode 16-bit PNG bytes to float64 [0,1], RGB if 3-channel."""
    raw = cv2.imdecode(np.frombuffer(data, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IOError("cannot decode PNG buffer")
    img = raw.astype(np.float64) / 65535.0
    if img.ndim == 3:
        img = img[:, :, ::-1]
    return np.ascontiguousarray(img)


def decode_png16_indices(data: bytes) -> np.ndarray:
    raw = cv2.imdecode(np.frombuffer(data, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IOError("cannot decode PNG buffer")
    if raw.ndim != 2:
        raise ValueError("expected single-channel label raster")
    return raw.astype(np.int32)


def write_png16(path: str | Path, img: np.ndarray) -> None:
    Path(path).write_bytes(encode_png16(img))


def to_gray(img: np.ndarray) -> np.ndarray:
    """Luminance of an RGB raster (Rec. 601 weights)."""
    if img.ndim == 2:
        return img.astype(np.float64)
    return 0.299 * img[:, :, 0] + 0.587 * img[:, :, 1] + 0.114 * img[:, :, 2]


def quantize_unit(img: np.ndarray) -> np.ndarray:
    """Round a [0,1] raster to the 16-bit grid it would survive on disk."""
    q = np.clip(np.rint(np.asarray(img, dtype=np.float64) * 65535.0), 0, 65535)
    return q / 65535.0


def rescale_to_budget(img: np.ndarray, max_pixels: int = MAX_PIXELS) -> np.ndarray:
    """Downscale so height*width <= max_pixels, preserving aspect ratio."""
    h, w = img.shape[:2]
    if h * w <= max_pixels:
        return img
    s = (max_pixels / (h * w)) ** 0.5
    new_w = max(1, int(w * s))
    new_h = max(1, int(h * s))
    out = cv2.resize(img, (new_w, new_h), interpolation=cv2.INTER_AREA)
    return np.ascontiguousarray(out)
