"""Netpbm codec: P2/P5 (graymap) and P3/P6 (pixmap), maxval 255 only."""

import numpy as np

from ..errors import FormatMismatch, PnmHeaderError, PnmMaxvalError, PnmTruncatedError

_WHITESPACE = b" \t\n\r\v\f"
_GRAY_FORMATS = ("P2", "P5")
_RGB_FORMATS = ("P3", "P6")


class _Cursor:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def skip_space_and_comments(self):
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos:self.pos + 1]
            if ch in _WHITESPACE:
                self.pos += 1
            elif ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            else:
                break

    def token(self, what):
        self.skip_space_and_comments()
        start = self.pos
        data = self.data
        while self.pos < len(data) and data[self.pos:self.pos + 1] not in _WHITESPACE \
                and data[self.pos:self.pos + 1] != b"#":
            self.pos += 1
        if start == self.pos:
            raise PnmTruncatedError(f"missing {what}", start)
        return data[start:self.pos], start

    def integer(self, what):
        tok, at = self.token(what)
        if not tok.isdigit():
            raise PnmHeaderError(f"{what} is not a non-negative integer: {tok[:16]!r}", at)
        return int(tok), at


def read_header(data):
    """Parse the header and return ``(magic, width, height, maxval, raster_offset)``."""
    if len(data) < 2:
        raise PnmTruncatedError("file shorter than magic number", 0)
    magic = data[:2].decode("latin-1")
    if magic not in _GRAY_FORMATS + _RGB_FORMATS:
        raise PnmHeaderError(f"unsupported magic number {magic!r}", 0)
    cur = _Cursor(data)
    cur.pos = 2
    width, at = cur.integer("width")
    if width < 1:
        raise PnmHeaderError("width must be >= 1", at)
    height, at = cur.integer("height")
    if height < 1:
        raise PnmHeaderError("height must be >= 1", at)
    maxval, at = cur.integer("maxval")
    if maxval != 255:
        raise PnmMaxvalError(f"maxval {maxval} unsupported (only 255)", at)
    if magic in ("P5", "P6"):
        # Exactly one whitespace byte separates the header from the raster.
        if cur.pos >= len(data):
            raise PnmTruncatedError("missing raster", cur.pos)
        if data[cur.pos:cur.pos + 1] not in _WHITESPACE:
            raise PnmHeaderError("expected whitespace after maxval", cur.pos)
        cur.pos += 1
    return magic, width, height, maxval, cur.pos


def decode_image(data):
    """Decode PNM bytes into a gray ``(h, w)`` or rgb ``(h, w, 3)`` uint8 array."""
    data = bytes(data)
    magic, width, height, _, offset = read_header(data)
    channels = 3 if magic in _RGB_FORMATS else 1
    count = width * height * channels
    if magic in ("P5", "P6"):
        end = offset + count
        if len(data) < end:
            raise PnmTruncatedError(
                f"raster needs {count} bytes, only {len(data) - offset} present", len(data))
        samples = np.frombuffer(data, dtype=np.uint8, count=count, offset=offset).copy()
    elif b"#" not in data[offset:]:
        tokens = data[offset:].split()
        if len(tokens) < count:
            raise PnmTruncatedError(
                f"raster needs {count} samples, only {len(tokens)} present", len(data))
        try:
            samples = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError:
            # Fall back to the slow path to report the exact byte offset.
            samples = _ascii_samples(data, offset, count)
        if samples.size and (samples.max() > 255 or samples.min() < 0):
            samples = _ascii_samples(data, offset, count)
        samples = samples.astype(np.uint8)
    else:
        samples = _ascii_samples(data, offset, count).astype(np.uint8)
    if channels == 3:
        return samples.reshape(height, width, 3)
    return samples.reshape(height, width)


def _ascii_samples(data, offset, count):
    cur = _Cursor(data)
    cur.pos = offset
    values = []
    for _ in range(count):
        v, at = cur.integer("sample")
        if v > 255:
            raise PnmHeaderError(f"sample {v} exceeds maxval", at)
        values.append(v)
    return np.array(values, dtype=np.int64)


def encode_image(img, fmt=None):
    """Encode an image as PNM bytes. ``fmt`` defaults to P5 (gray) / P6 (rgb)."""
    arr = np.asarray(img)
    rgb = arr.ndim == 3
    if fmt is None:
        fmt = "P6" if rgb else "P5"
    if fmt not in _GRAY_FORMATS + _RGB_FORMATS:
        raise FormatMismatch(f"unknown PNM format {fmt!r}")
    if rgb != (fmt in _RGB_FORMATS):
        kind = "rgb" if rgb else "gray"
        raise FormatMismatch(f"format {fmt} cannot hold a {kind} image")
    if rgb and arr.shape[2] != 3:
        raise FormatMismatch(f"rgb image must have 3 channels, got {arr.shape[2]}")
    if arr.dtype != np.uint8:
        raise FormatMismatch(f"samples must be uint8, got {arr.dtype}")
    height, width = arr.shape[:2]
    header = f"{fmt}\n{width} {height}\n255\n".encode("ascii")
    if fmt in ("P5", "P6"):
        return header + np.ascontiguousarray(arr).tobytes()
    per_row = width * (3 if rgb else 1)
    rows = arr.reshape(height, per_row)
    lines = [" ".join(map(str, row.tolist())) for row in rows]
    return header + ("\n".join(lines) + "\n").encode("ascii")


def read_image(path):
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def write_image(path, img, fmt=None):
    with open(path, "wb") as fh:
        fh.write(encode_image(img, fmt))


def read_size(path):
    """``(width, height)`` from the header only."""
    with open(path, "rb") as fh:
        head = fh.read(4096)
    _, width, height, _, _ = read_header(head)
    return width, height
