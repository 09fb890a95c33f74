"""Barcode region enhancement and localization by the black/white area ratio.

Only the region is found; decoding bar widths into characters is not
attempted.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy import ndimage

from .aco import between_class_variance
from .edges import HysteresisThresholds, canny_with_field
from .errors import AllOneClass, DegenerateInput
from .imgcore.image import as_gray
from .imgcore.regions import Region, region_mask
from .linefit import TukeySpec, fit_line_irls
from .tone import emphasize, stretch

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class BarcodeConfig:
    ratio_lo: float = 0.7
    ratio_hi: float = 1.5
    max_angle_deg: float = 5.0      # near-parallel tolerance between bar edges
    min_chains: int = 8             # edge chains needed to call a cluster a barcode
    min_chain_pixels: int = 8
    max_gap: float = 12.0           # pixels between neighbouring bar edges
    min_overlap: float = 0.8        # shared extent along the bars, fraction of the longer
    end_tolerance: float = 0.1      # end segments off the median bar extent by more than this
                                    # fraction of its length are trimmed (label borders)
    emphasize_mask: int = 7
    emphasize_factor: float = 1.0
    hysteresis: HysteresisThresholds = field(default_factory=HysteresisThresholds)
    # Sub-pixel line placement is plenty for localization.
    tukey: TukeySpec = field(default_factory=lambda: TukeySpec(tol=1e-3))

    def __post_init__(self):
        if not 0 <= self.ratio_lo <= self.ratio_hi:
            raise ValueError("need 0 <= ratio_lo <= ratio_hi")
        if self.min_chains < 1 or self.min_chain_pixels < 2:
            raise ValueError("min_chains must be >= 1 and min_chain_pixels >= 2")
        if not 0 < self.max_angle_deg < 90:
            raise ValueError("max_angle_deg must lie in (0, 90)")

    def accepts(self, ratio):
        return self.ratio_lo <= ratio <= self.ratio_hi


@dataclass(frozen=True)
class BarcodeCandidate:
    region: Region
    bw_ratio: float
    accepted: bool

    def to_dict(self):
        return {"region": self.region.to_dict(), "bw_ratio": self.bw_ratio,
                "accepted": self.accepted}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def enhance_barcode(img, mask=7, factor=1.0):
    """Gray stretch to the full range, then local contrast emphasis."""
    stretched, _ = stretch(img)
    return emphasize(stretched, mask, factor)


def bw_area_ratio(img, region, threshold):
    """White pixel count (g > threshold) over black count (g <= threshold)."""
    img = as_gray(img)
    mask = region_mask(region, (img.shape[1], img.shape[0]))
    vals = img[mask]
    white = int(np.count_nonzero(vals > threshold))
    black = vals.size - white
    if white == 0 or black == 0:
        raise AllOneClass(f"region has {white} white and {black} black pixels at t={threshold}")
    return white / black


def otsu_threshold(values):
    """Gray level maximizing between-class variance; classes are g <= t and g > t."""
    vals = np.asarray(values, dtype=np.uint8).ravel()
    hist = np.bincount(vals, minlength=256).astype(np.float64)
    occupied = np.flatnonzero(hist)
    if occupied.size < 2:
        raise AllOneClass("values hold a single gray level")
    best_t, best_v = None, -1.0
    for t in occupied[:-1]:
        v = between_class_variance(hist, [t])
        if v > best_v:
            best_t, best_v = int(t), v
    return best_t


def _edge_chains(gray, cfg):
    """Pixel lists of 8-connected edge chains whose gradient is mostly horizontal."""
    edges, field = canny_with_field(gray, th=cfg.hysteresis)
    vertical = (edges > 0) & (np.abs(field.gx) >= np.abs(field.gy))
    labels, count = ndimage.label(vertical, structure=_EIGHT)
    chains = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        rows, cols = np.nonzero(labels[sl] == idx)
        if rows.size < cfg.min_chain_pixels:
            continue
        pts = np.column_stack([cols + sl[1].start, rows + sl[0].start]).astype(np.float64)
        chains.append(pts)
    return chains


@dataclass
class _Segment:
    points: np.ndarray      # (x=col, y=row)
    normal: np.ndarray      # unit, x component >= 0
    offset: float           # position along the cluster normal
    lo: float               # extent along the line direction
    hi: float
    angle: float            # line orientation in [0, pi)


def _fit_segments(chains, cfg):
    segs = []
    for pts in chains:
        try:
            fit = fit_line_irls(pts, cfg.tukey)
        except DegenerateInput:
            continue
        line = fit.line
        # Bars of a barcode run along their edges, so keep near-vertical lines.
        if abs(math.cos(line.angle)) > math.sin(math.radians(45)):
            continue
        n = np.array([line.nx, line.ny])
        if n[0] < 0:
            n = -n
        d = np.array([-n[1], n[0]])
        along = pts @ d
        segs.append(_Segment(pts, n, float(np.mean(pts @ n)), float(along.min()),
                             float(along.max()), line.angle))
    return segs


def _angle_diff(a, b):
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


def _cluster(segs, cfg):
    """Group near-parallel segments that sit side by side with small gaps."""
    if not segs:
        return []
    segs = sorted(segs, key=lambda s: (s.offset, s.lo))
    tol = math.radians(cfg.max_angle_deg)
    clusters = []
    for s in segs:
        placed = False
        for cl in clusters:
            last = cl[-1]
            if _angle_diff(s.angle, last.angle) >= tol:
                continue
            if s.offset - last.offset > cfg.max_gap:
                continue
            shared = min(s.hi, last.hi) - max(s.lo, last.lo)
            longer = max(s.hi - s.lo, last.hi - last.lo)
            if shared < cfg.min_overlap * longer:
                continue
            cl.append(s)
            placed = True
            break
        if not placed:
            clusters.append([s])
    clusters = [_trim_ends(cl, cfg.end_tolerance) for cl in clusters]
    return [cl for cl in clusters if len(cl) >= cfg.min_chains]


def _trim_ends(cluster, tolerance):
    """Drop leading and trailing segments whose extent departs from the median bar."""
    lo = float(np.median([s.lo for s in cluster]))
    hi = float(np.median([s.hi for s in cluster]))
    slack = tolerance * (hi - lo)

    def fits(s):
        return abs(s.lo - lo) <= slack and abs(s.hi - hi) <= slack

    start, stop = 0, len(cluster)
    while start < stop and not fits(cluster[start]):
        start += 1
    while stop > start and not fits(cluster[stop - 1]):
        stop -= 1
    return cluster[start:stop]


def _cluster_region(cluster):
    pts = np.vstack([s.points for s in cluster])
    n = np.mean([s.normal for s in cluster], axis=0)
    n /= np.linalg.norm(n)
    d = np.array([-n[1], n[0]])
    across = pts @ n
    along = pts @ d
    a_mid = (across.min() + across.max()) / 2
    l_mid = (along.min() + along.max()) / 2
    cx, cy = a_mid * n + l_mid * d
    half_across = (across.max() - across.min()) / 2
    half_along = (along.max() - along.min()) / 2
    angle = math.atan2(n[1], n[0])
    if abs(angle) < 1e-3:
        return Region.rect((cy, cx), (half_along, half_across))
    # The region's column axis points across the bars, along the normal.
    return Region.rotated((cy, cx), (half_along, half_across), angle)


def locate_barcode(img, config=None):
    """Candidate barcode regions, largest first; empty when nothing is found."""
    cfg = config or BarcodeConfig()
    gray = as_gray(img)
    if gray.min() == gray.max():
        return []
    enhanced = enhance_barcode(gray, cfg.emphasize_mask, cfg.emphasize_factor)
    segs = _fit_segments(_edge_chains(enhanced, cfg), cfg)
    bounds = (gray.shape[1], gray.shape[0])
    found = []
    for cl in _cluster(segs, cfg):
        region = _cluster_region(cl)
        mask = region_mask(region, bounds)
        vals = enhanced[mask]
        try:
            ratio = bw_area_ratio(enhanced, region, otsu_threshold(vals))
        except AllOneClass:
            found.append((int(mask.sum()), BarcodeCandidate(region, 0.0, False)))
            continue
        found.append((int(mask.sum()), BarcodeCandidate(region, float(ratio), cfg.accepts(ratio))))
    found.sort(key=lambda item: -item[0])
    return [c for _, c in found]
