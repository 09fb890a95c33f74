"""Pipeline configuration and its key=value file form.

File sections mirror module names::

    [inspect]
    window = 512x512
    roi_0 = 48,392,92,460          # row0,col0,row1,col1 inclusive
    roi_1 = 412,48,456,116
    brightness_threshold = 150
    brightness_source = hsv_v_scaled_0_255
    defect_checks = color,edges,matching,barcode

    [edges]
    sigma = 0.849322
    low = 50
    high = 120
"""

from dataclasses import asdict, dataclass, field, fields, replace
import os

from .. import kvfile
from ..errors import SchemaError
from ..filters import DEFAULT_SIGMA
from ..imgcore.regions import Region, region_mask

BRIGHTNESS_SOURCES = ("hsv_v_scaled_0_255", "gray")
CHECKS = ("color", "edges", "matching", "barcode")


def box_region(box):
    return Region.from_box(*box)


@dataclass(frozen=True)
class PipelineConfig:
    window: tuple = (512, 512)                  # (width, height)
    roi_0: tuple = (48, 392, 92, 460)           # row0, col0, row1, col1
    roi_1: tuple = (412, 48, 456, 116)
    brightness_threshold: float = 150.0
    brightness_source: str = "hsv_v_scaled_0_255"
    hue_range: tuple = None                     # degrees; None disables
    saturation_range: tuple = None              # [0, 1]; None disables
    defect_checks: tuple = CHECKS
    # edges
    sigma: float = DEFAULT_SIGMA
    low: float = 50.0
    high: float = 120.0
    edge_tolerance: int = 2                     # pixels of slack around golden edges
    edge_min_pixels: int = 12                   # smallest unexplained edge blob
    # matching
    fiducial: tuple = (8, 8, 55, 55)            # golden patch used for alignment
    search_radius: int = 8
    diff_threshold: float = 40.0
    min_defect_area: int = 12
    # barcode
    barcode_zone: tuple = (350, 250, 490, 500)
    ratio_lo: float = 0.7
    ratio_hi: float = 1.5
    golden: str = None                          # PNM path; None uses the synthetic reference

    def __post_init__(self):
        w, h = self.window
        if w < 1 or h < 1:
            raise ValueError(f"window must be positive, got {w}x{h}")
        if not 0 <= self.brightness_threshold <= 255:
            raise ValueError(f"brightness_threshold must lie in [0, 255], got {self.brightness_threshold}")
        if self.brightness_source not in BRIGHTNESS_SOURCES:
            raise ValueError(f"brightness_source must be one of {BRIGHTNESS_SOURCES}")
        unknown = set(self.defect_checks) - set(CHECKS)
        if unknown:
            raise ValueError(f"unknown defect checks {sorted(unknown)}")
        if not 0 <= self.low < self.high:
            raise ValueError("need 0 <= low < high")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.search_radius < 0 or self.edge_tolerance < 0:
            raise ValueError("search_radius and edge_tolerance must be >= 0")
        if not 0 <= self.ratio_lo <= self.ratio_hi:
            raise ValueError("need 0 <= ratio_lo <= ratio_hi")
        for name in ("roi_0", "roi_1", "fiducial", "barcode_zone"):
            r0, c0, r1, c1 = getattr(self, name)
            if r1 < r0 or c1 < c0:
                raise ValueError(f"{name} box is inverted")
        # ROIs must hold pixels inside the window.
        region_mask(self.roi_region(0), self.window)
        region_mask(self.roi_region(1), self.window)

    def roi_region(self, index):
        return box_region(self.roi_0 if index == 0 else self.roi_1)

    def with_overrides(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self):
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        return out


def _parse_ints(raw, n, field_name):
    parts = [p.strip() for p in raw.replace("x", ",").split(",")]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated integers for {field_name}")
    return tuple(int(p) for p in parts)


def _parse_floats(raw, n, field_name):
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated numbers for {field_name}")
    return tuple(float(p) for p in parts)


# section -> key -> (config field, parser)
_SCHEMA = {
    "inspect": {
        "window": ("window", lambda v: _parse_ints(v, 2, "window")),
        "roi_0": ("roi_0", lambda v: _parse_ints(v, 4, "roi_0")),
        "roi_1": ("roi_1", lambda v: _parse_ints(v, 4, "roi_1")),
        "brightness_threshold": ("brightness_threshold", float),
        "brightness_source": ("brightness_source", str),
        "hue_range": ("hue_range", lambda v: _parse_floats(v, 2, "hue_range")),
        "saturation_range": ("saturation_range", lambda v: _parse_floats(v, 2, "saturation_range")),
        "defect_checks": ("defect_checks",
                          lambda v: tuple(p.strip() for p in v.split(",") if p.strip())),
        "golden": ("golden", str),
    },
    "edges": {
        "sigma": ("sigma", float),
        "low": ("low", float),
        "high": ("high", float),
        "tolerance": ("edge_tolerance", int),
        "min_pixels": ("edge_min_pixels", int),
    },
    "matching": {
        "fiducial": ("fiducial", lambda v: _parse_ints(v, 4, "fiducial")),
        "search_radius": ("search_radius", int),
        "diff_threshold": ("diff_threshold", float),
        "min_area": ("min_defect_area", int),
    },
    "barcode": {
        "zone": ("barcode_zone", lambda v: _parse_ints(v, 4, "zone")),
        "ratio_lo": ("ratio_lo", float),
        "ratio_hi": ("ratio_hi", float),
    },
}

# Sections other commands read from the same file; ignored here.
_FOREIGN = ("aco", "camera", "filter", "tone", "deeppcb", "experiment")


def config_from_kv(kv, base=None):
    values = {}
    for section, entries in kv.sections.items():
        if section in _FOREIGN:
            continue
        if section not in _SCHEMA:
            raise SchemaError(f"unknown section [{section}]",
                              line=kv.header_line.get(section), path=kv.path)
        for key, (raw, line) in entries.items():
            if key not in _SCHEMA[section]:
                raise SchemaError("unknown key", field=f"{section}.{key}", line=line, path=kv.path)
            name, parse = _SCHEMA[section][key]
            try:
                values[name] = parse(raw)
            except ValueError as exc:
                raise SchemaError(str(exc), field=f"{section}.{key}", line=line, path=kv.path) from None
    if "golden" in values and kv.path and not os.path.isabs(values["golden"]):
        values["golden"] = os.path.join(os.path.dirname(kv.path), values["golden"])
    try:
        return replace(base or PipelineConfig(), **values)
    except ValueError as exc:
        raise SchemaError(f"invalid configuration: {exc}", path=kv.path) from None


def load_config(path):
    return config_from_kv(kvfile.load(path))


def config_field_names():
    return [f.name for f in fields(PipelineConfig)]
