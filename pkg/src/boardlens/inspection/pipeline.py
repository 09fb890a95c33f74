"""Board inspection: color gating on two ROIs, then surface checks against a
golden board."""

from dataclasses import dataclass
import functools
import logging
import time

import numpy as np
from scipy import ndimage

from ..barcode import BarcodeConfig, locate_barcode
from ..colorspace import decompose3, rgb_to_hsv
from ..edges import HysteresisThresholds, canny
from ..errors import BoardlensError, StageError
from ..filters import GaussianSpec
from ..imgcore.image import as_rgb
from ..imgcore.pnm import read_image
from ..imgcore.regions import region_mask, stats_over_mask, union
from ..matching import Template, ncc_match
from ..tone import rgb_to_gray
from .config import PipelineConfig, box_region
from .report import InspectionReport
from .synth import reference_board

logger = logging.getLogger(__name__)

_EIGHT = np.ones((3, 3), dtype=bool)
MIN_ALIGN_SCORE = 0.5


def letterbox(img, window):
    """Center ``img`` in a black ``window`` (width, height), cropping any excess."""
    img = np.asarray(img)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    img = as_rgb(img)
    w, h = window
    if img.shape[:2] == (h, w):
        return img
    out = np.zeros((h, w, 3), dtype=np.uint8)
    ih, iw = img.shape[:2]
    src_r, dst_r = max(0, (ih - h) // 2), max(0, (h - ih) // 2)
    src_c, dst_c = max(0, (iw - w) // 2), max(0, (w - iw) // 2)
    rows, cols = min(h, ih), min(w, iw)
    out[dst_r:dst_r + rows, dst_c:dst_c + cols] = img[src_r:src_r + rows, src_c:src_c + cols]
    return out


def _box_slices(mask):
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return slice(rows[0], rows[-1] + 1), slice(cols[0], cols[-1] + 1)


def _stats_dict(values, mask):
    s = stats_over_mask(values, mask)
    return {"mean": s.mean, "deviation": s.deviation}


def classify_roi(img, roi, cfg=None):
    """Hue/saturation/brightness statistics over ``roi`` and the brightness verdict.

    Qualified means the brightness mean is strictly above the threshold (and,
    when configured, the hue and saturation means fall inside their ranges).
    """
    cfg = cfg or PipelineConfig()
    img = np.asarray(img)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    img = as_rgb(img)
    mask = region_mask(roi, (img.shape[1], img.shape[0]))
    rs, cs = _box_slices(mask)
    crop, sub = img[rs, cs], mask[rs, cs]
    hsv = rgb_to_hsv(crop)
    if cfg.brightness_source == "gray":
        brightness = rgb_to_gray(crop).astype(np.float64)
    else:
        brightness = hsv.v_scaled()
    features = {
        "hue": _stats_dict(hsv.h, sub),
        "saturation": _stats_dict(hsv.s, sub),
        "brightness": _stats_dict(brightness, sub),
        "area": int(sub.sum()),
    }
    qualified = features["brightness"]["mean"] > cfg.brightness_threshold
    if cfg.hue_range is not None:
        lo, hi = cfg.hue_range
        qualified = qualified and lo <= features["hue"]["mean"] <= hi
    if cfg.saturation_range is not None:
        lo, hi = cfg.saturation_range
        qualified = qualified and lo <= features["saturation"]["mean"] <= hi
    features["qualified"] = bool(qualified)
    return features, bool(qualified)


@dataclass(frozen=True)
class Reference:
    """Golden board data reused across inspections."""

    gray: np.ndarray
    edges: np.ndarray           # bool
    fiducial: Template
    fiducial_origin: tuple      # (row, col)


def _surface_key(cfg):
    return (cfg.golden, cfg.window, cfg.sigma, cfg.low, cfg.high, cfg.fiducial)


@functools.lru_cache(maxsize=4)
def _cached_reference(key):
    golden, window, sigma, low, high, fiducial = key
    rgb = reference_board() if golden is None else read_image(golden)
    return build_reference(letterbox(rgb, window), sigma, low, high, fiducial)


def build_reference(golden_rgb, sigma, low, high, fiducial):
    gray = rgb_to_gray(golden_rgb)
    edges = canny(gray, GaussianSpec(sigma), HysteresisThresholds(low, high)) > 0
    r0, c0, r1, c1 = fiducial
    tmpl = Template.from_patch(gray[r0:r1 + 1, c0:c1 + 1])
    return Reference(gray, edges, tmpl, (r0, c0))


def reference_for(cfg):
    return _cached_reference(_surface_key(cfg))


def align(gray, ref, radius):
    """Integer shift (rows, cols) of ``gray`` relative to the golden board, and the NCC score."""
    r0, c0 = ref.fiducial_origin
    m, n = ref.fiducial.shape
    h, w = gray.shape
    top, left = max(0, r0 - radius), max(0, c0 - radius)
    bottom, right = min(h, r0 + m + radius), min(w, c0 + n + radius)
    window = gray[top:bottom, left:right]
    if window.shape[0] < m or window.shape[1] < n:
        return (0, 0), 0.0
    res = ncc_match(window, ref.fiducial)
    return (top + res.position[0] - r0, left + res.position[1] - c0), res.score


def _overlap(shape, shift):
    """Slices pairing test pixels with golden pixels under ``shift``."""
    h, w = shape
    dr, dc = shift
    test = (slice(max(0, dr), h + min(0, dr)), slice(max(0, dc), w + min(0, dc)))
    gold = (slice(max(0, -dr), h + min(0, -dr)), slice(max(0, -dc), w + min(0, -dc)))
    return test, gold


def _largest_blob(mask):
    labels, count = ndimage.label(mask, structure=_EIGHT)
    if count == 0:
        return 0
    return int(np.bincount(labels.ravel())[1:].max())


def check_matching(gray, ref, shift, cfg):
    ts, gs = _overlap(gray.shape, shift)
    diff = np.abs(gray[ts].astype(np.int16) - ref.gray[gs].astype(np.int16))
    return _largest_blob(diff > cfg.diff_threshold) >= cfg.min_defect_area


def check_edges(gray, ref, shift, cfg):
    edges = canny(gray, GaussianSpec(cfg.sigma), HysteresisThresholds(cfg.low, cfg.high)) > 0
    ts, gs = _overlap(gray.shape, shift)
    test_e, gold_e = edges[ts], ref.edges[gs]
    size = 2 * cfg.edge_tolerance + 1
    extra = test_e & ~ndimage.maximum_filter(gold_e, size=size)
    missing = gold_e & ~ndimage.maximum_filter(test_e, size=size)
    return max(_largest_blob(extra), _largest_blob(missing)) >= cfg.edge_min_pixels


def check_barcode(gray, shift, cfg):
    r0, c0, r1, c1 = cfg.barcode_zone
    h, w = gray.shape
    r0, r1 = max(0, r0 + shift[0]), min(h, r1 + shift[0] + 1)
    c0, c1 = max(0, c0 + shift[1]), min(w, c1 + shift[1] + 1)
    zone = gray[r0:r1, c0:c1]
    if zone.size == 0:
        return False
    found = locate_barcode(zone, BarcodeConfig(ratio_lo=cfg.ratio_lo, ratio_hi=cfg.ratio_hi))
    return any(c.accepted for c in found)


class _Timer:
    def __init__(self):
        self.timings = {}

    def run(self, stage, fn, *args):
        start = time.perf_counter()
        try:
            return fn(*args)
        except BoardlensError as exc:
            raise StageError(stage, exc) from exc
        finally:
            self.timings[stage] = self.timings.get(stage, 0.0) + time.perf_counter() - start


def run_pipeline(img, cfg=None, board_id="board", reference=None):
    """Inspect one board and return its report.

    Color gating needs both ROIs qualified. Surface checks run only on
    color-qualified boards, each enabled by ``cfg.defect_checks``.
    """
    cfg = cfg or PipelineConfig()
    clock = _Timer()
    rgb = clock.run("window", letterbox, img, cfg.window)
    gray = clock.run("gray", rgb_to_gray, rgb)
    rois = (cfg.roi_region(0), cfg.roi_region(1))
    clock.run("roi", lambda: region_mask(union(*rois), cfg.window))
    clock.run("decompose", decompose3, rgb)
    features = {}
    tags = []
    verdicts = []
    for i, roi in enumerate(rois):
        feats, ok = clock.run("features", classify_roi, rgb, roi, cfg)
        features[f"roi_{i}"] = feats
        verdicts.append(ok)
    if "color" in cfg.defect_checks and not all(verdicts):
        tags.append("color_difference")
    checks = cfg.defect_checks
    if not tags and any(c in checks for c in ("edges", "matching", "barcode")):
        ref = reference or clock.run("reference", reference_for, cfg)
        shift, score = clock.run("align", align, gray, ref, cfg.search_radius)
        if "matching" in checks:
            if score < MIN_ALIGN_SCORE or clock.run("matching", check_matching, gray, ref, shift, cfg):
                tags.append("match_fail")
        if "edges" in checks and clock.run("edges", check_edges, gray, ref, shift, cfg):
            tags.append("edge_defect")
        if "barcode" in checks and not clock.run("barcode", check_barcode, gray, shift, cfg):
            tags.append("barcode_missing")
    verdict = "defective" if tags else "qualified"
    return InspectionReport(board_id, features, verdict, tuple(tags), clock.timings,
                            verdict == "defective")
