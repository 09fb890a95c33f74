"""Edge extraction: Roberts cross, Sobel/Prewitt gradients, non-maximum
suppression, hysteresis and the composed Canny detector.

Gradient conventions: ``gx`` grows to the right, ``gy`` grows upward (the
top kernel row carries the positive weights), and ``direction`` is
``atan2(gy, gx)`` in (-pi, pi].
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmall
from .filters import GaussianSpec, gaussian_filter
from .imgcore.image import as_float, as_gray

SOBEL_X = np.array([[-1, 0, 1],
                    [-2, 0, 2],
                    [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = np.array([[1, 2, 1],
                    [0, 0, 0],
                    [-1, -2, -1]], dtype=np.float64)
PREWITT_X = np.array([[-1, 0, 1],
                      [-1, 0, 1],
                      [-1, 0, 1]], dtype=np.float64)
PREWITT_Y = np.array([[1, 1, 1],
                      [0, 0, 0],
                      [-1, -1, -1]], dtype=np.float64)

_KERNELS = {"sobel": (SOBEL_X, SOBEL_Y), "prewitt": (PREWITT_X, PREWITT_Y)}

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class HysteresisThresholds:
    t_low: float = 50.0
    t_high: float = 120.0

    def __post_init__(self):
        if not (0 <= self.t_low < self.t_high):
            raise ValueError(f"need 0 <= t_low < t_high, got {self.t_low}, {self.t_high}")


def roberts(img):
    """Roberts cross magnitude; the last row and column are zero."""
    f = as_gray(img).astype(np.float64)
    h, w = f.shape
    if h < 2 or w < 2:
        raise ImageTooSmall(f"roberts needs at least 2x2, got {w}x{h}")
    out = np.zeros_like(f)
    d1 = f[:-1, :-1] - f[1:, 1:]
    d2 = f[1:, :-1] - f[:-1, 1:]
    out[:-1, :-1] = np.sqrt(d1 * d1 + d2 * d2)
    return out


def _correlate3(f, kernel):
    h, w = f.shape
    out = np.zeros((h, w), dtype=np.float64)
    acc = np.zeros((h - 2, w - 2), dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            k = kernel[dy, dx]
            if k != 0.0:
                acc += k * f[dy:dy + h - 2, dx:dx + w - 2]
    out[1:-1, 1:-1] = acc
    return out


def _sobel_int(f):
    # Separable Sobel on integer samples; exact, so equal to the 3x3 correlation.
    h, w = f.shape
    gx = np.zeros((h, w), dtype=np.float64)
    gy = np.zeros((h, w), dtype=np.float64)
    d = f[:, 2:] - f[:, :-2]
    gx[1:-1, 1:-1] = d[:-2] + 2 * d[1:-1] + d[2:]
    s = f[:, :-2] + 2 * f[:, 1:-1] + f[:, 2:]
    gy[1:-1, 1:-1] = s[:-2] - s[2:]
    return gx, gy


def gradient(img, operator="sobel"):
    """Gradient field with a zero-filled one-pixel frame."""
    if operator not in _KERNELS:
        raise ValueError(f"unknown operator {operator!r}; expected sobel or prewitt")
    g = as_gray(img)
    h, w = g.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(f"{operator} needs at least 3x3, got {w}x{h}")
    if operator == "sobel":
        gx, gy = _sobel_int(g.astype(np.int32))
    else:
        f = g.astype(np.float64)
        kx, ky = _KERNELS[operator]
        gx = _correlate3(f, kx)
        gy = _correlate3(f, ky)
    mag = np.sqrt(gx * gx + gy * gy)
    theta = np.arctan2(gy, gx)
    theta[theta <= -math.pi] = math.pi
    return GradientField(gx, gy, mag, theta)


# Neighbour offsets (drow, dcol) along the gradient for the four direction
# bins 0, 45, 90 and 135 degrees. Rows grow downward while gy grows upward,
# hence the sign flip on drow.
_BIN_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1))


def direction_bins(direction):
    """Quantize directions to 0, 45, 90, 135 degrees (bins 0..3), modulo 180."""
    # Shifted by a half turn so the argument is positive and truncation floors.
    shifted = np.asarray(direction, dtype=np.float64) * (4.0 / math.pi) + 4.5
    return shifted.astype(np.int64) % 4


def nms(field):
    """Keep M where it is >= both neighbours along the quantized gradient."""
    mag = as_float(field.magnitude)
    bins = direction_bins(field.direction)
    padded = np.pad(mag, 1, mode="constant")
    h, w = mag.shape
    keep = np.zeros((h, w), dtype=bool)
    for b, (dr, dc) in enumerate(_BIN_OFFSETS):
        fwd = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        bwd = padded[1 - dr:1 - dr + h, 1 - dc:1 - dc + w]
        keep |= (bins == b) & (mag >= fwd) & (mag >= bwd)
    return np.where(keep, mag, 0.0)


def hysteresis(nms_img, th):
    """Binary (0/255) edge map: strong pixels plus weak pixels 8-connected to them."""
    n = as_float(nms_img)
    candidates = n > th.t_low
    strong = n > th.t_high
    labels, count = ndimage.label(candidates, structure=_EIGHT)
    if count == 0:
        return np.zeros(n.shape, dtype=np.uint8)
    seeded = np.zeros(count + 1, dtype=bool)
    seeded[np.unique(labels[strong])] = True
    seeded[0] = False
    return np.where(seeded[labels], 255, 0).astype(np.uint8)


def canny_with_field(img, spec=None, th=None):
    """Canny edge map together with the Sobel field it was computed from."""
    smoothed = gaussian_filter(img, spec or GaussianSpec())
    field = gradient(smoothed, "sobel")
    return hysteresis(nms(field), th or HysteresisThresholds()), field


def canny(img, spec=None, th=None):
    """Gaussian smoothing, Sobel gradient, NMS and hysteresis; 0/255 edge map."""
    return canny_with_field(img, spec, th)[0]
