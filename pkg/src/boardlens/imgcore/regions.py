"""Regions of interest and their feature statistics.

A region is described geometrically (axis rectangle, rotated rectangle, or
a union of other regions) and only becomes a pixel set when rasterized
against concrete image bounds.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ..errors import EmptyRegion
from .image import as_gray

AXIS_RECT = "axis-rect"
ROTATED_RECT = "rotated-rect"
UNION = "union"
MASK = "mask"


@dataclass(frozen=True)
class Region:
    kind: str
    center: tuple = (0.0, 0.0)          # (row, col), subpixel
    half_extents: tuple = (0.0, 0.0)    # (rows, cols)
    angle: float = 0.0                  # radians, rotated-rect only
    members: tuple = field(default=())  # union only
    mask: object = field(default=None, compare=False)  # bool array, mask only

    @classmethod
    def rect(cls, center, half_extents):
        return cls(AXIS_RECT, tuple(map(float, center)), tuple(map(float, half_extents)))

    @classmethod
    def rotated(cls, center, half_extents, angle):
        return cls(ROTATED_RECT, tuple(map(float, center)),
                   tuple(map(float, half_extents)), float(angle))

    @classmethod
    def from_box(cls, row0, col0, row1, col1):
        """Axis rectangle covering rows ``row0..row1`` and cols ``col0..col1`` inclusive."""
        return cls.rect(((row0 + row1) / 2, (col0 + col1) / 2),
                        ((row1 - row0) / 2, (col1 - col0) / 2))

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        mask.setflags(write=False)
        return cls(MASK, mask=mask)

    def __or__(self, other):
        return union(self, other)

    def to_dict(self):
        if self.kind == UNION:
            return {"kind": UNION, "members": [m.to_dict() for m in self.members]}
        if self.kind == MASK:
            rows, cols = np.nonzero(self.mask)
            return {"kind": MASK, "shape": list(self.mask.shape),
                    "pixels": [[int(r), int(c)] for r, c in zip(rows, cols)]}
        out = {"kind": self.kind, "center": list(self.center),
               "half_extents": list(self.half_extents)}
        if self.kind == ROTATED_RECT:
            out["angle"] = self.angle
        return out

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        if kind == UNION:
            return union(*(cls.from_dict(m) for m in d["members"]))
        if kind == MASK:
            mask = np.zeros(d["shape"], dtype=bool)
            for r, c in d["pixels"]:
                mask[r, c] = True
            return cls.from_mask(mask)
        if kind == AXIS_RECT:
            return cls.rect(d["center"], d["half_extents"])
        if kind == ROTATED_RECT:
            return cls.rotated(d["center"], d["half_extents"], d.get("angle", 0.0))
        raise ValueError(f"unknown region kind {kind!r}")


def union(*regions):
    members = []
    for r in regions:
        if r.kind == UNION:
            members.extend(r.members)
        else:
            members.append(r)
    if not members:
        raise ValueError("union of zero regions")
    return Region(UNION, members=tuple(members))


def region_mask(region, bounds):
    """Boolean ``(height, width)`` mask of the region clipped to ``bounds``.

    ``bounds`` is ``(width, height)``.
    """
    width, height = bounds
    if width < 1 or height < 1:
        raise ValueError("bounds must be nonzero")
    mask = _raw_mask(region, width, height)
    if not mask.any():
        raise EmptyRegion(f"{region.kind} region is empty inside {width}x{height}")
    return mask


def _raw_mask(region, width, height):
    if region.kind == UNION:
        out = np.zeros((height, width), dtype=bool)
        for m in region.members:
            out |= _raw_mask(m, width, height)
        return out
    if region.kind == MASK:
        m = region.mask
        out = np.zeros((height, width), dtype=bool)
        h, w = min(height, m.shape[0]), min(width, m.shape[1])
        out[:h, :w] = m[:h, :w]
        return out
    rows = np.arange(height, dtype=np.float64)[:, None]
    cols = np.arange(width, dtype=np.float64)[None, :]
    dr = rows - region.center[0]
    dc = cols - region.center[1]
    hr, hc = region.half_extents
    if region.kind == ROTATED_RECT and region.angle != 0.0:
        # Rotate the pixel center by -angle about the region center.
        ca, sa = math.cos(region.angle), math.sin(region.angle)
        dr, dc = ca * dr - sa * dc, sa * dr + ca * dc
    eps = 1e-9
    return (np.abs(dr) <= hr + eps) & (np.abs(dc) <= hc + eps)


def rasterize_region(region, bounds):
    """Sorted list of ``(row, col)`` pixels in the region, clipped to bounds."""
    rows, cols = np.nonzero(region_mask(region, bounds))
    return list(zip(rows.tolist(), cols.tolist()))


@dataclass(frozen=True)
class RegionStats:
    mean: float
    deviation: float
    area: int


def region_stats(img, region):
    """Mean and population deviation of gray values over ``region``."""
    img = np.asarray(img)
    if img.ndim != 2:
        img = as_gray(img)
    mask = region_mask(region, (img.shape[1], img.shape[0]))
    return stats_over_mask(img, mask)


def stats_over_mask(values, mask):
    vals = np.asarray(values, dtype=np.float64)[mask]
    area = vals.size
    if area == 0:
        raise EmptyRegion("mask selects no pixels")
    mean = vals.sum() / area
    dev = math.sqrt(float(((vals - mean) ** 2).sum()) / area)
    return RegionStats(float(mean), dev, int(area))
