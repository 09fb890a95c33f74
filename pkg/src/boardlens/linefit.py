"""Robust straight-line fitting by iteratively reweighted total least squares."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateInput


@dataclass(frozen=True)
class Line2D:
    """Line ``nx*x + ny*y = d`` with a unit normal."""

    nx: float
    ny: float
    d: float

    def distance(self, points):
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        return np.abs(self.nx * pts[:, 0] + self.ny * pts[:, 1] - self.d)

    @property
    def direction(self):
        return (-self.ny, self.nx)

    @property
    def angle(self):
        """Orientation of the line direction in [0, pi)."""
        return math.atan2(self.nx, -self.ny) % math.pi

    def canonical(self):
        """Same line with the sign chosen so the normal points to a fixed half-plane."""
        if self.nx < 0 or (self.nx == 0 and self.ny < 0):
            return Line2D(-self.nx, -self.ny, -self.d)
        return self


@dataclass(frozen=True)
class TukeySpec:
    """IRLS settings.

    ``classic_tukey=True`` zeroes the weight of points beyond ``tau``. With
    ``False`` those points keep ``tau/|delta|``, which caps how far an
    outlier can be suppressed (about 0.1 at ten times ``tau``).
    """

    tau: float = 2.0
    max_iters: int = 20
    tol: float = 1e-6
    classic_tukey: bool = True

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True)
class LineFit:
    line: Line2D
    weights: np.ndarray
    iterations: int
    converged: bool


def tukey_weight(delta, tau, classic=False):
    """Weight of a point at distance ``delta`` from the current line.

    Inside ``tau`` this is the biweight ``(1 - (delta/tau)^2)^2``. Outside, the
    default keeps a ``tau/|delta|`` tail; ``classic=True`` uses 0 instead.
    """
    delta = np.abs(np.asarray(delta, dtype=np.float64))
    inner = (1.0 - (delta / tau) ** 2) ** 2
    if classic:
        outer = np.zeros_like(delta)
    else:
        outer = tau / np.where(delta > 0, delta, 1.0)
    w = np.where(delta <= tau, inner, outer)
    return float(w) if w.ndim == 0 else w


def fit_line_tls(points, weights=None):
    """Weighted orthogonal-distance line through ``points``."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    w = np.ones(len(pts)) if weights is None else np.asarray(weights, dtype=np.float64)
    total = w.sum()
    if len(pts) < 2 or not total > 0:
        raise DegenerateInput("need at least two points with positive weight")
    centroid = (w[:, None] * pts).sum(axis=0) / total
    centered = pts - centroid
    wc = w[:, None] * centered
    sxx = float(wc[:, 0] @ centered[:, 0])
    syy = float(wc[:, 1] @ centered[:, 1])
    sxy = float(wc[:, 0] @ centered[:, 1])
    # Closed-form eigen-decomposition of the 2x2 scatter matrix: the line runs
    # along the major axis, the normal along the minor one.
    spread = math.hypot(sxx - syy, 2.0 * sxy)
    if (sxx + syy + spread) / 2.0 <= 1e-18:
        raise DegenerateInput("all weighted points coincide")
    theta = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
    nx, ny = -math.sin(theta), math.cos(theta)
    return Line2D(nx, ny, nx * float(centroid[0]) + ny * float(centroid[1])).canonical()


def _movement(a, b):
    return max(abs(a.nx - b.nx), abs(a.ny - b.ny), abs(a.d - b.d))


def fit_line_irls(points, spec=None):
    """Fit a line, downweighting far points with the Tukey weight each pass.

    Starts from the unweighted fit and stops once no line parameter moves by
    more than ``spec.tol`` or after ``spec.max_iters`` reweighting passes.
    """
    spec = spec or TukeySpec()
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 2:
        raise DegenerateInput("need at least two points")
    if np.all(np.abs(pts - pts[0]).max(axis=1) == 0):
        raise DegenerateInput("all points coincide")
    line = fit_line_tls(pts)
    weights = tukey_weight(line.distance(pts), spec.tau, spec.classic_tukey)
    for it in range(1, spec.max_iters + 1):
        if np.count_nonzero(np.asarray(weights) > 0) < 2:
            # Nothing left to fit; keep the previous line.
            break
        new = fit_line_tls(pts, weights)
        moved = _movement(new, line)
        line = new
        weights = tukey_weight(line.distance(pts), spec.tau, spec.classic_tukey)
        if moved < spec.tol:
            return LineFit(line, np.atleast_1d(weights), it, True)
    return LineFit(line, np.atleast_1d(weights), spec.max_iters, False)
