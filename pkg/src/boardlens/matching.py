"""Template matching: normalized cross-correlation, SAD and SSD.

Positions are ``(x, y)`` in matrix order: ``x`` is the row and ``y`` the
column of the window's top-left pixel.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConstantTemplate, WindowOutOfBounds
from .imgcore.image import as_gray


@dataclass(frozen=True)
class Template:
    patch: np.ndarray
    mean: float
    centered_norm: float

    @classmethod
    def from_patch(cls, patch):
        patch = as_gray(patch)
        t = patch.astype(np.float64)
        mean = float(t.mean())
        norm = math.sqrt(float(((t - mean) ** 2).sum()))
        return cls(patch, mean, norm)

    @property
    def shape(self):
        return self.patch.shape


@dataclass(frozen=True)
class MatchResult:
    position: tuple
    score: float
    score_map: np.ndarray


def _as_template(tmpl):
    return tmpl if isinstance(tmpl, Template) else Template.from_patch(tmpl)


def _window_sums(img, m, n):
    """Per-window sum and sum of squares (exact int64) for all m x n windows."""
    f = img.astype(np.int64)
    h, w = f.shape

    def box(a):
        sat = np.zeros((h + 1, w + 1), dtype=np.int64)
        np.cumsum(np.cumsum(a, axis=0), axis=1, out=sat[1:, 1:])
        return sat[m:, n:] - sat[:-m, n:] - sat[m:, :-n] + sat[:-m, :-n]

    return box(f), box(f * f)


def _cross_sums(img, patch):
    """Sum of I*T over every valid window, exact in int64."""
    f = img.astype(np.int64)
    t = patch.astype(np.int64)
    m, n = t.shape
    oh, ow = f.shape[0] - m + 1, f.shape[1] - n + 1
    out = np.zeros((oh, ow), dtype=np.int64)
    if oh * ow <= m * n:
        for r in range(oh):
            for c in range(ow):
                out[r, c] = np.sum(f[r:r + m, c:c + n] * t)
    else:
        for i in range(m):
            for j in range(n):
                v = t[i, j]
                if v:
                    out += v * f[i:i + oh, j:j + ow]
    return out


def ncc_map(img, tmpl):
    """Correlation coefficient R for every in-bounds window position."""
    img = as_gray(img)
    tmpl = _as_template(tmpl)
    m, n = tmpl.shape
    if m > img.shape[0] or n > img.shape[1]:
        raise WindowOutOfBounds(f"template {n}x{m} larger than image {img.shape[1]}x{img.shape[0]}")
    if tmpl.centered_norm == 0:
        raise ConstantTemplate("template has zero variance")
    k = m * n
    t = tmpl.patch.astype(np.int64)
    st, stt = int(t.sum()), int((t * t).sum())
    si, sii = _window_sums(img, m, n)
    sit = _cross_sums(img, tmpl.patch)
    # k * sum((I - Ibar)(T - Tbar)) and k * sum((I - Ibar)^2), kept integral.
    num = k * sit - si * st
    var_i = k * sii - si * si
    var_t = k * stt - st * st
    denom = np.sqrt(var_i.astype(np.float64)) * math.sqrt(float(var_t))
    r = np.divide(num.astype(np.float64), denom,
                  out=np.zeros(num.shape, dtype=np.float64), where=var_i > 0)
    return np.clip(r, -1.0, 1.0)


def correlation_coefficient(window, patch):
    """R between two equally shaped real-valued arrays (0 if either is flat)."""
    a = np.asarray(window, dtype=np.float64)
    b = np.asarray(patch, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float((a * a).sum())) * math.sqrt(float((b * b).sum()))
    if denom == 0:
        return 0.0
    return float((a * b).sum() / denom)


def ncc_match(img, tmpl):
    """Best NCC position; ties go to the first window in row-major order."""
    scores = ncc_map(img, tmpl)
    flat = int(np.argmax(scores))
    pos = np.unravel_index(flat, scores.shape)
    return MatchResult((int(pos[0]), int(pos[1])), float(scores.flat[flat]), scores)


def _window(img, tmpl, at):
    img = as_gray(img)
    tmpl = _as_template(tmpl)
    x, y = at
    m, n = tmpl.shape
    if x < 0 or y < 0 or x + m > img.shape[0] or y + n > img.shape[1]:
        raise WindowOutOfBounds(f"window at {at} of size {m}x{n} leaves the image")
    return img[x:x + m, y:y + n].astype(np.float64), tmpl.patch.astype(np.float64)


def sad(img, tmpl, at):
    """Mean absolute difference between template and the window at ``at``."""
    win, t = _window(img, tmpl, at)
    return float(np.abs(t - win).sum() / t.size)


def ssd(img, tmpl, at):
    """Mean squared difference between template and the window at ``at``."""
    win, t = _window(img, tmpl, at)
    return float(((t - win) ** 2).sum() / t.size)
