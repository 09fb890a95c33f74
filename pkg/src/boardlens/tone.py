"""Gray conversion and tonal transforms.

Every transform evaluates in float64, then clamps to [0, 255] and rounds
half up.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConstantImage, DomainError
from .filters import mean_filter
from .imgcore.image import as_gray, as_rgb, quantize

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


_LEVELS = np.arange(256, dtype=np.float64)
# Per-channel products looked up instead of multiplied; the sums are formed
# in the same order, so results match the direct formula bit for bit.
_GRAY_LUTS = tuple(w * _LEVELS for w in GRAY_WEIGHTS)


def rgb_to_gray(img):
    """0.299 R + 0.587 G + 0.114 B, rounded half up."""
    img = as_rgb(img)
    lr, lg, lb = _GRAY_LUTS
    return quantize(lr[img[..., 0]] + lg[img[..., 1]] + lb[img[..., 2]])


@dataclass(frozen=True)
class LinearMap:
    """Map gray range [a, b] onto [c, d]."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need b > a, got a={self.a} b={self.b}")

    @property
    def k(self):
        return (self.d - self.c) / (self.b - self.a)


def linear_transform(img, lmap):
    f = as_gray(img).astype(np.float64)
    # (d-c)*(f-a)/(b-a) rather than k*(f-a): keeps exact halves exact.
    g = (lmap.d - lmap.c) * (f - lmap.a) / (lmap.b - lmap.a) + lmap.c
    return quantize(g)


@dataclass(frozen=True)
class LogParams:
    a: float = 0.0
    b: float = 10.0
    c: float = 1.0

    def __post_init__(self):
        if not self.b > 0 or self.b == 1:
            raise ValueError(f"log base must be > 0 and != 1, got {self.b}")


@dataclass(frozen=True)
class ExpParams:
    a: float = 1.0
    b: float = 0.0
    c: float = 1.0


def log_transform(img, p):
    """g = a + log(f + c) / log(b)."""
    f = as_gray(img).astype(np.float64)
    arg = f + p.c
    if np.any(arg <= 0):
        raise DomainError(f"log argument f + c <= 0 (c={p.c}, min f={f.min():g})")
    return quantize(p.a + np.log(arg) / math.log(p.b))


def log_curve(f, p):
    """Unrounded log transform of scalar/array gray values."""
    return p.a + np.log(np.asarray(f, dtype=np.float64) + p.c) / math.log(p.b)


def exp_transform(img, p):
    """g = a * (f + b) ** c."""
    f = as_gray(img).astype(np.float64)
    return quantize(exp_curve(f, p))


def exp_curve(f, p):
    base = np.asarray(f, dtype=np.float64) + p.b
    if float(p.c) != int(p.c) and np.any(base < 0):
        raise DomainError(f"negative base f + b with fractional exponent c={p.c}")
    with np.errstate(over="ignore"):
        return p.a * np.power(base, p.c)


@dataclass(frozen=True)
class StretchParams:
    mult: float
    add: float
    gmin: int
    gmax: int


def stretch_params(img):
    img = as_gray(img)
    gmin, gmax = int(img.min()), int(img.max())
    if gmax == gmin:
        raise ConstantImage(f"cannot stretch a constant image (value {gmin})")
    mult = 255.0 / (gmax - gmin)
    return StretchParams(mult, -255.0 * gmin / (gmax - gmin), gmin, gmax)


def stretch(img):
    """Map [GMin, GMax] onto [0, 255]; returns ``(image, StretchParams)``."""
    img = as_gray(img)
    p = stretch_params(img)
    # Same as mult*f + add, written so that exact halves survive.
    g = 255.0 * (img.astype(np.float64) - p.gmin) / (p.gmax - p.gmin)
    return quantize(g), p


def emphasize(img, mask=7, factor=1.0):
    """Local contrast boost: f + factor * (f - local_mean(f))."""
    img = as_gray(img)
    if int(mask) != mask or mask < 3 or mask % 2 == 0:
        raise ValueError(f"mask must be an odd integer >= 3, got {mask}")
    if factor < 0:
        raise ValueError(f"factor must be >= 0, got {factor}")
    f = img.astype(np.float64)
    local = mean_filter(img, int(mask) // 2).astype(np.float64)
    return quantize((f - local) * factor + f)
