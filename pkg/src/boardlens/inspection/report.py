"""Inspection reports (one JSON object per board per line) and the removal log."""

from dataclasses import dataclass, field
import datetime
import json
import os

SCHEMA_VERSION = 1
TAGS = ("color_difference", "edge_defect", "match_fail", "barcode_missing")


@dataclass(frozen=True)
class InspectionReport:
    board_id: str
    features: dict              # roi_0 / roi_1 -> feature dict
    verdict: str                # "qualified" or "defective"
    defect_tags: tuple = ()
    timings: dict = field(default_factory=dict)     # stage -> seconds
    removal_event: bool = False
    config: dict = None

    def __post_init__(self):
        if self.verdict not in ("qualified", "defective"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if (self.verdict == "defective") != bool(self.defect_tags):
            raise ValueError("verdict must be defective exactly when tags are present")
        if any(t < 0 for t in self.timings.values()):
            raise ValueError("timings must be >= 0")

    @property
    def qualified(self):
        return self.verdict == "qualified"

    def to_dict(self, include_timings=True, include_config=True):
        out = {
            "schema": SCHEMA_VERSION,
            "board_id": self.board_id,
            "features": self.features,
            "verdict": self.verdict,
            "defect_tags": list(self.defect_tags),
            "removal_event": self.removal_event,
        }
        if include_timings:
            out["timings"] = dict(self.timings)
        if include_config and self.config is not None:
            out["config"] = self.config
        return out

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(**kwargs), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(d["board_id"], d["features"], d["verdict"], tuple(d["defect_tags"]),
                   dict(d.get("timings", {})), bool(d["removal_event"]), d.get("config"))

    @classmethod
    def from_json(cls, line):
        return cls.from_dict(json.loads(line))


def event_timestamp():
    """UTC timestamp for the removal log; honours SOURCE_DATE_EPOCH for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.datetime.fromtimestamp(int(epoch), tz=datetime.timezone.utc)
    else:
        moment = datetime.datetime.now(tz=datetime.timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def append_removal(path, report, timestamp=None):
    """Append ``REMOVE <board_id> <timestamp>`` for a defective board; no-op otherwise."""
    if not report.removal_event:
        return False
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(f"REMOVE {report.board_id} {timestamp or event_timestamp()}\n")
    return True
