"""Raster conventions.

Images are plain numpy arrays, row-major:

* gray: ``(height, width)`` uint8
* rgb: ``(height, width, 3)`` uint8, channels R, G, B
* float: ``(height, width)`` float64, all finite

The helpers below validate and convert; they never copy when the input
already conforms.
"""

import numpy as np

# Added before flooring so that x.5 produced by float noise (127.49999...)
# still rounds up.
_HALF_UP_NUDGE = 1e-9


def as_gray(img):
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"gray image must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255):
            raise ValueError("gray samples must lie in [0, 255]")
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("gray samples must be integral")
        arr = arr.astype(np.uint8)
    return arr


def as_rgb(img):
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"rgb image must have shape (h, w, 3), got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255):
            raise ValueError("rgb samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_float(img):
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"float image must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("float image contains non-finite samples")
    return arr


def is_rgb(img):
    return np.ndim(img) == 3


def round_half_up(x):
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5 + _HALF_UP_NUDGE)


def quantize(x):
    """Round half up, clamp to [0, 255], return uint8."""
    return np.clip(round_half_up(x), 0, 255).astype(np.uint8)


def pad_replicate(img, radius):
    return np.pad(img, radius, mode="edge")
