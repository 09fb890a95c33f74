"""Line-oriented ``key = value`` files with ``[section]`` headers.

Used for calibration files and CLI configs. ``configparser`` does not report
line numbers for values, which schema errors here need, so parsing is done by
hand. Keys are lowercase; ``#`` and ``;`` start comment lines.
"""

from .errors import SchemaError


class KvFile:
    """Ordered sections of ordered ``key -> (value, line)`` entries."""

    def __init__(self, path=None):
        self.path = path
        self.sections = {}

    def section(self, name):
        return self.sections.get(name, {})

    def get(self, section, key, default=None):
        entry = self.sections.get(section, {}).get(key)
        return default if entry is None else entry[0]

    def line_of(self, section, key):
        entry = self.sections.get(section, {}).get(key)
        return None if entry is None else entry[1]

    def set(self, section, key, value):
        self.sections.setdefault(section, {})[key] = (str(value), None)


def parse(text, path=None):
    kv = KvFile(path)
    current = None
    header_line = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise SchemaError("malformed section header", line=lineno, path=path)
            current = line[1:-1].strip().lower()
            if current in kv.sections:
                raise SchemaError(f"duplicate section [{current}]", line=lineno, path=path)
            kv.sections[current] = {}
            header_line[current] = lineno
            continue
        if "=" not in line:
            raise SchemaError("expected 'key = value'", line=lineno, path=path)
        if current is None:
            raise SchemaError("entry before any [section]", line=lineno, path=path)
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if not key:
            raise SchemaError("empty key", line=lineno, path=path)
        if key in kv.sections[current]:
            raise SchemaError("duplicate key", field=f"{current}.{key}", line=lineno, path=path)
        kv.sections[current][key] = (value.strip(), lineno)
    kv.header_line = header_line
    return kv


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read(), path)


def dump(sections):
    """Serialize ``{section: {key: value}}`` in the given order."""
    out = []
    for name, entries in sections.items():
        if out:
            out.append("")
        out.append(f"[{name}]")
        for key, value in entries.items():
            out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"


def get_float(kv, section, key, required=True, default=None):
    raw = kv.get(section, key)
    if raw is None:
        if required:
            line = getattr(kv, "header_line", {}).get(section)
            raise SchemaError("missing required key", field=f"{section}.{key}",
                              line=line, path=kv.path)
        return default
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(f"not a number: {raw!r}", field=f"{section}.{key}",
                          line=kv.line_of(section, key), path=kv.path) from None
