"""Channel decomposition, RGB to HSV conversion and HSV range masks."""

from dataclasses import dataclass

import numpy as np

from .imgcore.image import as_rgb


@dataclass(frozen=True)
class HsvImage:
    """Per-pixel hue in degrees [0, 360), saturation and value in [0, 1]."""

    h: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def shape(self):
        return self.h.shape

    def v_scaled(self):
        """V on the 0..255 scale."""
        return self.v * 255.0


def decompose3(img):
    img = as_rgb(img)
    return (np.ascontiguousarray(img[..., 0]),
            np.ascontiguousarray(img[..., 1]),
            np.ascontiguousarray(img[..., 2]))


def compose3(r, g, b):
    return np.stack([r, g, b], axis=-1).astype(np.uint8)


def rgb_to_hsv(img):
    rgb = as_rgb(img).astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    delta = mx - mn
    s = np.divide(delta, mx, out=np.zeros_like(mx), where=mx > 0)

    safe = np.where(delta > 0, delta, 1.0)
    h = np.zeros_like(mx)
    red_max = (mx == r) & (delta > 0)
    green_max = (mx == g) & (delta > 0) & ~red_max
    blue_max = (delta > 0) & ~red_max & ~green_max
    h = np.where(red_max, 60.0 * np.mod((g - b) / safe, 6.0), h)
    h = np.where(green_max, 60.0 * ((b - r) / safe + 2.0), h)
    h = np.where(blue_max, 60.0 * ((r - g) / safe + 4.0), h)
    h = np.mod(h, 360.0)
    # mod can return 360.0 for tiny negative inputs
    h = np.where(h >= 360.0, 0.0, h)
    return HsvImage(h, s, mx)


def _in_range(values, lo, hi):
    return (values >= lo) & (values <= hi)


def hue_in_range(h, h_range):
    lo, hi = h_range
    if lo <= hi:
        return _in_range(h, lo, hi)
    # wraps through 360 -> 0
    return (h >= lo) | (h <= hi)


def hsv_mask(hsv, h_range=(0.0, 360.0), s_range=(0.0, 1.0), v_range=(0.0, 1.0)):
    """Boolean mask of pixels inside all three ranges (closed intervals).

    ``h_range`` with ``lo > hi`` wraps across 360 -> 0. An empty ``s_range`` or
    ``v_range`` (``lo > hi``) selects nothing.
    """
    return (hue_in_range(hsv.h, h_range)
            & _in_range(hsv.s, *s_range)
            & _in_range(hsv.v, *v_range))
