"""DeepPCB-style template/test pairs: ingestion and a diff-based evaluation.

Expected layout, searched recursively under the root::

    <dir>/<id>_temp.pgm        defect-free template
    <dir>/<id>_test.pgm        inspected image
    <dir>_not/<id>.txt         annotations (or <dir>/<id>.txt)

Each annotation line is ``x1 y1 x2 y2 class_id`` separated by spaces or
commas. Boxes are half-open: columns ``x1 <= x < x2``, rows ``y1 <= y < y2``.
"""

from dataclasses import dataclass
import logging
import os
import re

import numpy as np
from scipy import ndimage

from ..errors import AnnotationError, ConstantTemplate
from ..imgcore.pnm import read_image, read_size
from ..matching import ncc_match
from ..tone import rgb_to_gray

logger = logging.getLogger(__name__)

# open, short, mousebite, spur, spurious copper, pin-hole
CLASS_IDS = (1, 2, 3, 4, 5, 6)
_EXTS = (".pgm", ".ppm", ".pnm", ".pbm")
_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Box:
    x1: int
    y1: int
    x2: int
    y2: int

    @property
    def area(self):
        return max(0, self.x2 - self.x1) * max(0, self.y2 - self.y1)

    def iou(self, other):
        w = min(self.x2, other.x2) - max(self.x1, other.x1)
        h = min(self.y2, other.y2) - max(self.y1, other.y1)
        if w <= 0 or h <= 0:
            return 0.0
        inter = w * h
        return inter / (self.area + other.area - inter)

    def as_list(self):
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class Annotation:
    box: Box
    class_id: int


@dataclass(frozen=True)
class DeepPcbSample:
    sample_id: str
    template_path: str
    test_path: str
    annotations: tuple
    annotation_path: str = None


@dataclass(frozen=True)
class DeepPcbConfig:
    diff_threshold: float = 60.0
    min_area: int = 20
    search_radius: int = 4
    iou_threshold: float = 0.3


def parse_annotations(text, path, width, height):
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p for p in re.split(r"[,\s]+", line) if p]
        if len(parts) != 5:
            raise AnnotationError(f"{path}:{lineno}: expected 'x1 y1 x2 y2 class_id', got {line!r}")
        try:
            x1, y1, x2, y2, cls = (int(p) for p in parts)
        except ValueError:
            raise AnnotationError(f"{path}:{lineno}: non-integer field in {line!r}") from None
        if not (0 <= x1 < x2 <= width and 0 <= y1 < y2 <= height):
            raise AnnotationError(f"{path}:{lineno}: box {x1},{y1},{x2},{y2} outside "
                                  f"{width}x{height} image")
        if cls not in CLASS_IDS:
            raise AnnotationError(f"{path}:{lineno}: unknown class id {cls}")
        out.append(Annotation(Box(x1, y1, x2, y2), cls))
    return tuple(out)


def _find_image(directory, stem):
    for ext in _EXTS:
        p = os.path.join(directory, stem + ext)
        if os.path.exists(p):
            return p
    return None


def _find_annotation(directory, sample_id):
    for cand in (os.path.join(directory + "_not", sample_id + ".txt"),
                 os.path.join(directory, sample_id + ".txt")):
        if os.path.exists(cand):
            return cand
    return None


def ingest_deeppcb(root):
    """All samples under ``root``, ordered by path."""
    samples = []
    for directory, dirs, files in os.walk(root):
        dirs.sort()
        for name in sorted(files):
            stem, ext = os.path.splitext(name)
            if ext not in _EXTS or not stem.endswith("_test"):
                continue
            sample_id = stem[:-len("_test")]
            test_path = os.path.join(directory, name)
            temp_path = _find_image(directory, sample_id + "_temp")
            if temp_path is None:
                raise AnnotationError(f"{test_path}: no matching {sample_id}_temp image")
            ann_path = _find_annotation(directory, sample_id)
            if ann_path is None:
                raise AnnotationError(f"{test_path}: no annotation file {sample_id}.txt")
            width, height = read_size(test_path)
            if read_size(temp_path) != (width, height):
                raise AnnotationError(f"{temp_path}: size differs from {test_path}")
            with open(ann_path, "r", encoding="utf-8") as fh:
                anns = parse_annotations(fh.read(), ann_path, width, height)
            samples.append(DeepPcbSample(sample_id, temp_path, test_path, anns, ann_path))
    if not samples:
        logger.warning("no DeepPCB samples found under %s", root)
    else:
        logger.info("ingested %d DeepPCB samples", len(samples))
    return samples


def _gray(path):
    img = read_image(path)
    return rgb_to_gray(img) if img.ndim == 3 else img


def _align(test, template, radius):
    """Shift (rows, cols) placing the template's center crop in the test image."""
    h, w = template.shape
    if radius <= 0 or h <= 2 * radius or w <= 2 * radius:
        return (0, 0)
    core = template[radius:h - radius, radius:w - radius]
    try:
        res = ncc_match(test, core)
    except ConstantTemplate:
        return (0, 0)
    return (res.position[0] - radius, res.position[1] - radius)


def predict_boxes(test, template, cfg=None):
    """Boxes around connected blobs where the aligned pair differs."""
    cfg = cfg or DeepPcbConfig()
    dr, dc = _align(test, template, cfg.search_radius)
    h, w = test.shape
    diff = np.zeros((h, w), dtype=bool)
    ts = (slice(max(0, dr), h + min(0, dr)), slice(max(0, dc), w + min(0, dc)))
    gs = (slice(max(0, -dr), h + min(0, -dr)), slice(max(0, -dc), w + min(0, -dc)))
    diff[ts] = np.abs(test[ts].astype(np.int16) - template[gs].astype(np.int16)) > cfg.diff_threshold
    labels, count = ndimage.label(diff, structure=_EIGHT)
    boxes = []
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sizes[idx] >= cfg.min_area:
            boxes.append(Box(sl[1].start, sl[0].start, sl[1].stop, sl[0].stop))
    return boxes


def match_boxes(predicted, truth, threshold):
    """Greedy one-to-one matching by descending IoU; returns true positive count."""
    pairs = sorted(((p.iou(t), i, j) for i, p in enumerate(predicted)
                    for j, t in enumerate(truth)), reverse=True)
    used_p, used_t, tp = set(), set(), 0
    for iou, i, j in pairs:
        if iou < threshold:
            break
        if i in used_p or j in used_t:
            continue
        used_p.add(i)
        used_t.add(j)
        tp += 1
    return tp


def _ratio(num, den):
    return num / den if den else 1.0


def evaluate_deeppcb(samples, cfg=None):
    """Per-sample and pooled precision/recall at the configured IoU.

    With no predictions precision is 1; with no annotations recall is 1.
    """
    cfg = cfg or DeepPcbConfig()
    if not samples:
        raise ValueError("no samples to evaluate")
    per_sample = []
    tp_all = pred_all = truth_all = 0
    for s in samples:
        boxes = predict_boxes(_gray(s.test_path), _gray(s.template_path), cfg)
        truth = [a.box for a in s.annotations]
        tp = match_boxes(boxes, truth, cfg.iou_threshold)
        per_sample.append({
            "sample_id": s.sample_id,
            "predictions": [b.as_list() for b in boxes],
            "annotations": len(truth),
            "true_positives": tp,
            "precision": _ratio(tp, len(boxes)),
            "recall": _ratio(tp, len(truth)),
        })
        tp_all += tp
        pred_all += len(boxes)
        truth_all += len(truth)
    return {
        "samples": per_sample,
        "true_positives": tp_all,
        "predictions": pred_all,
        "annotations": truth_all,
        "precision": _ratio(tp_all, pred_all),
        "recall": _ratio(tp_all, truth_all),
        "iou_threshold": cfg.iou_threshold,
    }
