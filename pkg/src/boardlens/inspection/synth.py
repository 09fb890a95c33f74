"""Deterministic synthetic boards with known ground truth.

Every board shares one layout: green substrate, a trace grid with pads, a
fiducial mark, a barcode label and two bright silkscreen zones under the
default ROIs. A seed picks a small integer shift, a global gain and, for
defect kinds, what is damaged and where.
"""

from dataclasses import dataclass, asdict
import functools

import numpy as np

from ..imgcore.image import quantize

SIZE = 512
_PAD = 8            # canvas margin so shifted boards never expose an edge
MAX_SHIFT = 3

SUBSTRATE = (30, 110, 50)
TRACE = (70, 200, 90)
PAD_COLOR = (205, 185, 110)
SILK = (238, 238, 228)
LABEL = (235, 235, 235)
INK = (20, 20, 20)
SCRATCH = (8, 30, 12)

# Layout boxes as (row0, col0, row1, col1), end-exclusive, in board pixels.
ROI_ZONES = ((40, 384, 101, 469), (404, 40, 465, 125))
LABEL_BOX = (360, 262, 481, 493)
BAR_ROWS = (380, 460)
BAR_START = 285
FIDUCIAL_CENTER = (31, 31)
TRACE_ROWS = tuple(range(130, 341, 30))        # horizontal trace centers
TRACE_COLS = tuple(range(100, 461, 60))        # vertical trace centers
TRACE_SPAN_COLS = (70, 451)
TRACE_SPAN_ROWS = (120, 351)
TRACE_HALF = 2

KINDS = ("standard", "defect", "color_diff")
DEFECTS = ("scratch", "short", "missing_pad", "missing_barcode")


@dataclass(frozen=True)
class GroundTruth:
    kind: str
    label: str                  # "qualified" or "defective"
    defect: str = None          # one of DEFECTS for kind "defect"
    dark_rois: tuple = ()       # ROI indices dimmed for kind "color_diff"
    shift: tuple = (0, 0)       # (rows, cols)
    gain: float = 1.0
    seed: int = 0

    def to_dict(self):
        out = asdict(self)
        out["dark_rois"] = list(self.dark_rois)
        out["shift"] = list(self.shift)
        return out


def _fill(canvas, box, color):
    r0, c0, r1, c1 = box
    canvas[r0 + _PAD:r1 + _PAD, c0 + _PAD:c1 + _PAD] = color


def bar_widths():
    """Alternating bar/space widths (3..6 px) of the label's 20-bar code."""
    rng = np.random.default_rng(20)
    return [(int(rng.integers(3, 7)), int(rng.integers(3, 7))) for _ in range(20)]


def barcode_box():
    """Ground-truth bar area, end-exclusive."""
    width = sum(b + s for b, s in bar_widths()) - bar_widths()[-1][1]
    return (BAR_ROWS[0], BAR_START, BAR_ROWS[1], BAR_START + width)


def _pads():
    pads = []
    for r in TRACE_ROWS:
        for c in (TRACE_SPAN_COLS[0], TRACE_SPAN_COLS[1] - 1):
            pads.append((r - 6, c - 6, r + 6, c + 6))
    for c in TRACE_COLS:
        pads.append((TRACE_SPAN_ROWS[1] - 7, c - 6, TRACE_SPAN_ROWS[1] + 5, c + 6))
    return pads


@functools.lru_cache(maxsize=1)
def _base_canvas():
    side = SIZE + 2 * _PAD
    canvas = np.empty((side, side, 3), dtype=np.uint8)
    canvas[:] = SUBSTRATE
    for r in TRACE_ROWS:
        _fill(canvas, (r - TRACE_HALF, TRACE_SPAN_COLS[0], r + TRACE_HALF + 1, TRACE_SPAN_COLS[1]), TRACE)
    for c in TRACE_COLS:
        _fill(canvas, (TRACE_SPAN_ROWS[0], c - TRACE_HALF, TRACE_SPAN_ROWS[1], c + TRACE_HALF + 1), TRACE)
    for box in _pads():
        _fill(canvas, box, PAD_COLOR)
    for box in ROI_ZONES:
        _fill(canvas, box, SILK)
    _fill(canvas, LABEL_BOX, LABEL)
    col = BAR_START
    for bar, space in bar_widths():
        _fill(canvas, (BAR_ROWS[0], col, BAR_ROWS[1], col + bar), INK)
        col += bar + space
    # Fiducial: bright disc with a dark cross, unambiguous under NCC.
    rr, cc = np.mgrid[0:SIZE, 0:SIZE]
    fr, fc = FIDUCIAL_CENTER
    disc = (rr - fr) ** 2 + (cc - fc) ** 2 <= 14 ** 2
    canvas[_PAD:_PAD + SIZE, _PAD:_PAD + SIZE][disc] = SILK
    _fill(canvas, (fr - 1, fc - 10, fr + 2, fc + 11), INK)
    _fill(canvas, (fr - 10, fc - 1, fr + 11, fc + 2), INK)
    canvas.setflags(write=False)
    return canvas


def _draw_defect(canvas, defect, rng):
    if defect == "scratch":
        # Dark stroke across one horizontal trace, cutting it open.
        r = int(rng.choice(TRACE_ROWS[1:-1]))
        gaps = [c for c in range(TRACE_SPAN_COLS[0] + 20, TRACE_SPAN_COLS[1] - 20)
                if min(abs(c - t) for t in TRACE_COLS) > 10]
        c = int(rng.choice(gaps))
        length = int(rng.integers(20, 41))
        top = r - int(rng.integers(5, length - 5))
        _fill(canvas, (top, c, top + length, c + 3), SCRATCH)
    elif defect == "short":
        # Copper bridge between two neighbouring horizontal traces.
        i = int(rng.integers(0, len(TRACE_ROWS) - 1))
        r0, r1 = TRACE_ROWS[i], TRACE_ROWS[i + 1]
        gaps = [c for c in range(TRACE_SPAN_COLS[0] + 20, TRACE_SPAN_COLS[1] - 20)
                if min(abs(c - t) for t in TRACE_COLS) > 12]
        c = int(rng.choice(gaps))
        _fill(canvas, (r0, c, r1, c + 4), TRACE)
    elif defect == "missing_pad":
        pads = _pads()
        r0, c0, r1, c1 = pads[int(rng.integers(0, len(pads)))]
        _fill(canvas, (r0, c0, r1, c1), SUBSTRATE)
        # Restore the trace stub that ran under the pad.
        for r in TRACE_ROWS:
            if r0 <= r < r1:
                lo, hi = max(c0, TRACE_SPAN_COLS[0]), min(c1, TRACE_SPAN_COLS[1])
                _fill(canvas, (r - TRACE_HALF, lo, r + TRACE_HALF + 1, hi), TRACE)
        for c in TRACE_COLS:
            if c0 <= c < c1:
                lo, hi = max(r0, TRACE_SPAN_ROWS[0]), min(r1, TRACE_SPAN_ROWS[1])
                _fill(canvas, (lo, c - TRACE_HALF, hi, c + TRACE_HALF + 1), TRACE)
    elif defect == "missing_barcode":
        _fill(canvas, LABEL_BOX, SUBSTRATE)
    else:
        raise ValueError(f"unknown defect {defect!r}")


def generate_board(kind="standard", seed=0, noise_sigma=0.0, defect=None):
    """Render one board; returns ``(rgb image, GroundTruth)``.

    ``noise_sigma`` adds zero-mean Gaussian noise (gray levels) per channel.
    ``defect`` forces the damage type for kind ``defect``.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    shift = tuple(int(v) for v in rng.integers(-MAX_SHIFT, MAX_SHIFT + 1, size=2))
    gain = float(rng.uniform(0.97, 1.03))
    canvas = _base_canvas().copy()
    dark = ()
    chosen = None
    if kind == "defect":
        chosen = defect or DEFECTS[int(rng.integers(0, len(DEFECTS)))]
        _draw_defect(canvas, chosen, rng)
    elif kind == "color_diff":
        dark = ((0,), (1,), (0, 1))[int(rng.integers(0, 3))]
        for i in dark:
            level = int(rng.integers(90, 116))
            _fill(canvas, ROI_ZONES[i], (level, level, level - 8))
    r0 = _PAD - shift[0]
    c0 = _PAD - shift[1]
    board = canvas[r0:r0 + SIZE, c0:c0 + SIZE].astype(np.float64) * gain
    if noise_sigma > 0:
        board += rng.normal(0.0, noise_sigma, board.shape)
    label = "qualified" if kind == "standard" else "defective"
    return quantize(board), GroundTruth(kind, label, chosen, dark, shift, gain, int(seed))


def reference_board():
    """Golden board: standard layout, no shift, unit gain, no noise."""
    return np.ascontiguousarray(_base_canvas()[_PAD:_PAD + SIZE, _PAD:_PAD + SIZE])
