"""Pinhole stereo camera model: parameter files, projection and
reprojection error.

Calibration file layout (sections in this order, keys in this order)::

    [left]
    sx = 2199.9132      # pixel width, micrometres
    sy = 2199.9985      # pixel height, micrometres
    f = 0               # focal length, millimetres
    u0 = 662.418        # principal point, pixels
    v0 = 453.05
    err = 0.247863      # mean calibration error, pixels

    [right]
    ...

    [extrinsics_left]   # optional; identity when absent
    r11 = 1 ... r33 = 1 # row-major rotation
    tx = 0  ty = 0  tz = 0  (millimetres, one per line)

``[distortion_*]`` sections are accepted and ignored.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from . import kvfile
from .errors import BehindCamera, SchemaError

logger = logging.getLogger(__name__)

_INTRINSIC_KEYS = ("sx", "sy", "f", "u0", "v0", "err")
_ROT_KEYS = tuple(f"r{i}{j}" for i in range(1, 4) for j in range(1, 4))
_T_KEYS = ("tx", "ty", "tz")


@dataclass(frozen=True)
class Intrinsics:
    sx: float   # micrometres per pixel, horizontal
    sy: float   # micrometres per pixel, vertical
    f: float    # millimetres
    u0: float
    v0: float
    err: float = 0.0

    def __post_init__(self):
        if not (self.sx > 0 and self.sy > 0):
            raise ValueError("pixel sizes sx, sy must be > 0")
        if self.f < 0:
            raise ValueError("focal length must be >= 0")


@dataclass(frozen=True)
class Extrinsics:
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if r.shape != (3, 3) or t.shape != (3,):
            raise ValueError("rotation must be 3x3 and translation a 3-vector")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9) or abs(np.linalg.det(r) - 1) > 1e-9:
            raise ValueError("rotation must be orthonormal with determinant 1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    def __eq__(self, other):
        if not isinstance(other, Extrinsics):
            return NotImplemented
        return (np.array_equal(self.rotation, other.rotation)
                and np.array_equal(self.translation, other.translation))

    __hash__ = None

    def is_identity(self):
        return np.array_equal(self.rotation, np.eye(3)) and not self.translation.any()


@dataclass(frozen=True)
class Camera:
    intrinsics: Intrinsics
    extrinsics: Extrinsics = field(default_factory=Extrinsics)


@dataclass(frozen=True)
class StereoRig:
    left: Camera
    right: Camera

    @property
    def err(self):
        return (self.left.intrinsics.err + self.right.intrinsics.err) / 2.0


def project(point, cam):
    """World point (mm) to pixel ``(u, v)``."""
    intr, ext = cam.intrinsics, cam.extrinsics
    pc = ext.rotation @ np.asarray(point, dtype=np.float64) + ext.translation
    if pc[2] <= 0:
        raise BehindCamera(f"point {tuple(point)} has camera depth {pc[2]:g} <= 0")
    x = intr.f * pc[0] / pc[2]
    y = intr.f * pc[1] / pc[2]
    # sx, sy are micrometres; image-plane coordinates are millimetres.
    return (x / (intr.sx * 1e-3) + intr.u0, y / (intr.sy * 1e-3) + intr.v0)


def reprojection_error(correspondences, cam):
    """Mean Euclidean pixel distance between projections and observations."""
    pairs = list(correspondences)
    if not pairs:
        raise ValueError("need at least one correspondence")
    total = 0.0
    for world, observed in pairs:
        u, v = project(world, cam)
        total += math.hypot(u - observed[0], v - observed[1])
    return total / len(pairs)


def _fmt(x):
    return repr(float(x))


def _camera_from(kv, side):
    if side not in kv.sections:
        raise SchemaError(f"missing section [{side}]", path=kv.path)
    vals = {k: kvfile.get_float(kv, side, k) for k in _INTRINSIC_KEYS}
    for key in kv.section(side):
        if key not in _INTRINSIC_KEYS:
            raise SchemaError("unknown key", field=f"{side}.{key}",
                              line=kv.line_of(side, key), path=kv.path)
    for key in ("sx", "sy"):
        if not vals[key] > 0:
            raise SchemaError("must be > 0", field=f"{side}.{key}",
                              line=kv.line_of(side, key), path=kv.path)
    if vals["f"] < 0:
        raise SchemaError("must be >= 0", field=f"{side}.f",
                          line=kv.line_of(side, "f"), path=kv.path)
    if vals["f"] == 0:
        logger.warning("%s camera has f = 0 mm; projection collapses to the principal point", side)
    intr = Intrinsics(**vals)

    ext_name = f"extrinsics_{side}"
    if ext_name in kv.sections:
        rot = [kvfile.get_float(kv, ext_name, k) for k in _ROT_KEYS]
        trans = [kvfile.get_float(kv, ext_name, k) for k in _T_KEYS]
        try:
            ext = Extrinsics(np.array(rot).reshape(3, 3), np.array(trans))
        except ValueError as exc:
            raise SchemaError(str(exc), field=ext_name,
                              line=kv.header_line.get(ext_name), path=kv.path) from None
    else:
        ext = Extrinsics()
    return Camera(intr, ext)


def parse_calibration(text, path=None):
    kv = kvfile.parse(text, path)
    for name in kv.sections:
        if name not in ("left", "right", "extrinsics_left", "extrinsics_right") \
                and not name.startswith("distortion_"):
            raise SchemaError(f"unknown section [{name}]", line=kv.header_line[name], path=path)
    return StereoRig(_camera_from(kv, "left"), _camera_from(kv, "right"))


def load_calibration(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_calibration(fh.read(), path)


def dump_calibration(rig):
    sections = {}
    for side, cam in (("left", rig.left), ("right", rig.right)):
        i = cam.intrinsics
        sections[side] = {k: _fmt(getattr(i, k)) for k in _INTRINSIC_KEYS}
    for side, cam in (("left", rig.left), ("right", rig.right)):
        ext = cam.extrinsics
        if ext.is_identity():
            continue
        entries = {k: _fmt(v) for k, v in zip(_ROT_KEYS, ext.rotation.ravel())}
        entries.update({k: _fmt(v) for k, v in zip(_T_KEYS, ext.translation)})
        sections[f"extrinsics_{side}"] = entries
    return kvfile.dump(sections)


def save_calibration(rig, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_calibration(rig))
