"""Noise suppression: mean, median and Gaussian smoothing.

All filters pad by replicating the border and return uint8 images.
"""

from dataclasses import dataclass
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .imgcore.image import as_gray, pad_replicate, quantize

# Sigma at which neighbouring weights at unit squared distance halve, so the
# radius-1 kernel is exactly [1 2 1; 2 4 2; 1 2 1] / 16.
DEFAULT_SIGMA = 1.0 / math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class GaussianSpec:
    sigma: float = DEFAULT_SIGMA
    radius: int = 1

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if int(self.radius) != self.radius or self.radius < 1:
            raise ValueError(f"radius must be an integer >= 1, got {self.radius}")

    @property
    def side(self):
        return 2 * self.radius + 1


def _check_radius(radius):
    if int(radius) != radius or radius < 1:
        raise ValueError(f"radius must be an integer >= 1, got {radius}")
    return int(radius)


def _box_sum(img, radius):
    """Sum over each (2r+1)^2 replicate-padded window, as int64."""
    padded = pad_replicate(img.astype(np.int64), radius)
    # Summed-area table keeps this O(pixels) regardless of radius.
    sat = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=sat[1:, 1:])
    side = 2 * radius + 1
    h, w = img.shape
    return (sat[side:side + h, side:side + w] - sat[:h, side:side + w]
            - sat[side:side + h, :w] + sat[:h, :w])


def mean_filter(img, radius=1):
    img = as_gray(img)
    radius = _check_radius(radius)
    n = (2 * radius + 1) ** 2
    total = _box_sum(img, radius)
    # Integer round-half-up of total / n.
    return ((2 * total + n) // (2 * n)).astype(np.uint8)


def median_filter(img, radius=1):
    img = as_gray(img)
    radius = _check_radius(radius)
    windows = sliding_window_view(pad_replicate(img, radius), (2 * radius + 1,) * 2)
    flat = windows.reshape(img.shape + (-1,))
    mid = flat.shape[-1] // 2
    return np.partition(flat, mid, axis=-1)[..., mid].astype(np.uint8)


def gaussian_kernel_1d(sigma, radius):
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def gaussian_kernel(spec=None):
    """Normalized (2r+1)x(2r+1) Gaussian weights, summing to 1."""
    spec = spec or GaussianSpec()
    r = spec.radius
    y, x = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    w = np.exp(-(x * x + y * y) / (2.0 * spec.sigma ** 2))
    return w / w.sum()


def correlate(img, kernel):
    """Float correlation of ``img`` with ``kernel`` under replicate padding."""
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
        raise ValueError(f"kernel sides must be odd, got {kernel.shape}")
    return ndimage.correlate(np.asarray(img, dtype=np.float64), kernel, mode="nearest")


def gaussian_filter(img, spec=None, separable=False):
    """Gaussian smoothing with round-half-up quantization.

    ``separable=True`` runs two 1-D passes instead of the direct 2-D
    correlation; results agree to within one gray level.
    """
    img = as_gray(img)
    spec = spec or GaussianSpec()
    if separable:
        k = gaussian_kernel_1d(spec.sigma, spec.radius)
        tmp = correlate(img, k[None, :])
        out = correlate(tmp, k[:, None])
    else:
        out = correlate(img, gaussian_kernel(spec))
    return quantize(out)
