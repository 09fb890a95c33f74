"""Shared fixtures and naive-loop oracles.

The oracles are written pixel by pixel on purpose: they are the independent
reference the vectorized code is checked against.
"""

import math

import numpy as np
import pytest
from scipy import ndimage

EIGHT = np.ones((3, 3), dtype=bool)
TAU = 2.0
DIAG = math.sqrt(0.5)


# Acceptance lines keyed by criterion number, echoed after the run.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_gray(rng, h=None, w=None, lo=0, hi=256):
    h = h or int(rng.integers(16, 65))
    w = w or int(rng.integers(16, 65))
    return rng.integers(lo, hi, size=(h, w)).astype(np.uint8)


def half_up(x):
    return int(math.floor(x + 0.5 + 1e-9))


def clamp8(x):
    return min(255, max(0, half_up(x)))


def replicate(img, r, c):
    h, w = img.shape
    return img[min(max(r, 0), h - 1), min(max(c, 0), w - 1)]


def naive_mean(img, radius):
    h, w = img.shape
    out = np.zeros_like(img)
    n = (2 * radius + 1) ** 2
    for r in range(h):
        for c in range(w):
            s = 0
            for dr in range(-radius, radius + 1):
                for dc in range(-radius, radius + 1):
                    s += int(replicate(img, r + dr, c + dc))
            out[r, c] = clamp8(s / n)
    return out


def naive_median(img, radius):
    h, w = img.shape
    out = np.zeros_like(img)
    for r in range(h):
        for c in range(w):
            vals = sorted(int(replicate(img, r + dr, c + dc))
                          for dr in range(-radius, radius + 1)
                          for dc in range(-radius, radius + 1))
            out[r, c] = vals[len(vals) // 2]
    return out


def naive_correlate(img, kernel):
    h, w = img.shape
    kr = kernel.shape[0] // 2
    kc = kernel.shape[1] // 2
    out = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            s = 0.0
            for i in range(kernel.shape[0]):
                for j in range(kernel.shape[1]):
                    s += kernel[i, j] * float(replicate(img, r + i - kr, c + j - kc))
            out[r, c] = s
    return out


def naive_roberts(img):
    f = img.astype(float)
    h, w = f.shape
    out = np.zeros((h, w))
    for m in range(h - 1):
        for n in range(w - 1):
            a = f[m, n] - f[m + 1, n + 1]
            b = f[m + 1, n] - f[m, n + 1]
            out[m, n] = math.sqrt(a * a + b * b)
    return out


def naive_sobel(img):
    f = img.astype(float)
    h, w = f.shape
    kx = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
    ky = [[1, 2, 1], [0, 0, 0], [-1, -2, -1]]
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            sx = sy = 0.0
            for i in range(3):
                for j in range(3):
                    v = f[r + i - 1, c + j - 1]
                    sx += kx[i][j] * v
                    sy += ky[i][j] * v
            gx[r, c] = sx
            gy[r, c] = sy
    return gx, gy


def naive_ncc(img, tmpl):
    f = img.astype(float)
    t = tmpl.astype(float)
    m, n = t.shape
    tbar = t.mean()
    tc = t - tbar
    tnorm = math.sqrt((tc * tc).sum())
    oh, ow = f.shape[0] - m + 1, f.shape[1] - n + 1
    out = np.zeros((oh, ow))
    for x in range(oh):
        for y in range(ow):
            num = 0.0
            ss = 0.0
            win = f[x:x + m, y:y + n]
            fbar = sum(win[u, v] for u in range(m) for v in range(n)) / (m * n)
            for u in range(m):
                for v in range(n):
                    d = win[u, v] - fbar
                    num += d * tc[u, v]
                    ss += d * d
            out[x, y] = 0.0 if ss == 0 else num / (math.sqrt(ss) * tnorm)
    return out


def naive_sad(img, tmpl, at):
    x, y = at
    m, n = tmpl.shape
    return sum(abs(int(tmpl[u, v]) - int(img[x + u, y + v]))
               for u in range(m) for v in range(n)) / (m * n)


def naive_ssd(img, tmpl, at):
    x, y = at
    m, n = tmpl.shape
    return sum((int(tmpl[u, v]) - int(img[x + u, y + v])) ** 2
               for u in range(m) for v in range(n)) / (m * n)


def naive_region_stats(img, pixels):
    vals = [float(img[r, c]) for r, c in pixels]
    mean = sum(vals) / len(vals)
    dev = math.sqrt(sum((v - mean) ** 2 for v in vals) / len(vals))
    return mean, dev


def hexcone(r, g, b):
    """Scalar RGB (0..255) to HSV, coded straight from the sector formulas."""
    r, g, b = r / 255.0, g / 255.0, b / 255.0
    mx, mn = max(r, g, b), min(r, g, b)
    d = mx - mn
    if d == 0:
        h = 0.0
    elif mx == r:
        h = (60.0 * ((g - b) / d)) % 360.0
    elif mx == g:
        h = 60.0 * ((b - r) / d) + 120.0
    else:
        h = 60.0 * ((r - g) / d) + 240.0
    s = 0.0 if mx == 0 else d / mx
    return h, s, mx


def square_image(size=96, side=64, lo=0, hi=255):
    img = np.full((size, size), lo, dtype=np.uint8)
    o = (size - side) // 2
    img[o:o + side, o:o + side] = hi
    return img, o


def barcode_board(seed=0, angle=0.0, noise=0.0, bars=20, size=(240, 360)):
    """Gray board with a pasted 20-bar code; returns (image, ground-truth mask).

    Bars are 3..6 px wide, black on a white label. ``angle`` rotates the label
    (degrees); the truth mask covers the bars only, not the quiet zones.
    """
    rng = np.random.default_rng(seed)
    h, w = size
    img = np.full((h, w), 128.0)
    widths = [(int(rng.integers(3, 7)), int(rng.integers(3, 7))) for _ in range(bars)]
    total = sum(b + s for b, s in widths) - widths[-1][1]
    label = np.full((70, total + 24), 225.0)
    x = 12
    for b, s in widths:
        label[8:62, x:x + b] = 25
        x += b + s
    truth = np.zeros(label.shape, dtype=bool)
    truth[8:62, 12:12 + total] = True
    if angle:
        label = ndimage.rotate(label, angle, reshape=True, order=1, cval=128)
        truth = ndimage.rotate(truth.astype(float), angle, reshape=True, order=1) > 0.5
    lh, lw = label.shape
    r0, c0 = (h - lh) // 2, (w - lw) // 2
    img[r0:r0 + lh, c0:c0 + lw] = label
    gt = np.zeros((h, w), dtype=bool)
    gt[r0:r0 + lh, c0:c0 + lw] = truth
    if noise:
        img += rng.normal(0, noise, img.shape)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8), gt


def iou(a, b):
    return float((a & b).sum() / (a | b).sum())


def aa_square(size=96, side=64, top=16.3, left=16.6, hi=255, ss=8):
    """Square with area-weighted (anti-aliased) border pixels."""
    y = (np.arange(size * ss) + 0.5) / ss
    in_r = (y >= top) & (y < top + side)
    in_c = (y >= left) & (y < left + side)
    cover = (in_r[:, None] & in_c[None, :]).reshape(size, ss, size, ss).mean(axis=(1, 3))
    return np.floor(cover * hi + 0.5).astype(np.uint8)


def hard_square(size=96, side=64, origin=16):
    img = np.zeros((size, size), dtype=np.uint8)
    img[origin:origin + side, origin:origin + side] = 255
    return img


def perimeter_distance(r, c, top, left, side):
    """Distance from pixel center (r, c) to the outline of the square."""
    bottom, right = top + side, left + side
    if top <= r <= bottom and left <= c <= right:
        return min(r - top, bottom - r, c - left, right - c)
    return math.hypot(max(top - r, 0, r - bottom), max(left - c, 0, c - right))


def square_geometry(edges, top, left, side):
    """(max edge distance to outline, outline recall at 1 px, closed?)"""
    rs, cs = np.nonzero(edges)
    worst = max(perimeter_distance(r, c, top, left, side) for r, c in zip(rs, cs))
    pts = []
    for t in np.arange(side) + 0.5:
        pts += [(top, left + t), (top + side, left + t), (top + t, left), (top + t, left + side)]
    er = np.column_stack([rs, cs]).astype(float)
    hits = [np.hypot(er[:, 0] - p[0], er[:, 1] - p[1]).min() <= 1.0 for p in pts]
    _, n = ndimage.label(edges, EIGHT)
    enclosed = ndimage.binary_fill_holes(edges) & ~edges
    closed = n == 1 and enclosed[int(top + side / 2), int(left + side / 2)]
    return worst, float(np.mean(hits)), bool(closed)


def contaminated():
    """20 points on y = x and two outliers 10 tau off the line, same side."""
    x = np.arange(20.0)
    inliers = np.column_stack([x, x])
    off = 10 * TAU * DIAG
    outliers = np.array([[5 - off, 5 + off], [14 - off, 14 + off]])
    return np.vstack([inliers, outliers])


def deviation_from_diagonal(line, lo=0.0, hi=19.0):
    """Largest vertical gap between ``line`` and y = x over [lo, hi]."""
    xs = np.array([lo, hi])
    ys = (line.d - line.nx * xs) / line.ny
    return float(np.abs(ys - xs).max())
