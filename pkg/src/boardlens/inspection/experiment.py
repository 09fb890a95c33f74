"""Batch accuracy experiments on synthetic boards."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import logging

import numpy as np

from .. import kvfile
from ..errors import InvalidPlan, SchemaError
from .config import PipelineConfig
from .pipeline import run_pipeline
from .synth import KINDS, generate_board

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("group", "standard_n", "standard_correct", "defect_n", "defect_correct",
               "color_diff_n", "color_diff_correct", "accuracy")


@dataclass(frozen=True)
class GroupSpec:
    standard: int = 0
    defect: int = 0
    color_diff: int = 0

    def count(self, kind):
        return getattr(self, kind)

    @property
    def total(self):
        return self.standard + self.defect + self.color_diff


@dataclass(frozen=True)
class ExperimentPlan:
    groups: tuple
    repetitions: int = 1
    seed: int = 0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not self.groups:
            raise InvalidPlan("plan has no groups")
        for g in self.groups:
            if min(g.standard, g.defect, g.color_diff) < 0:
                raise InvalidPlan(f"negative board count in {g}")
        if not any(g.total for g in self.groups):
            raise InvalidPlan("every group is empty")
        if self.repetitions < 1:
            raise InvalidPlan(f"repetitions must be >= 1, got {self.repetitions}")
        if self.noise_sigma < 0:
            raise InvalidPlan("noise_sigma must be >= 0")

    @classmethod
    def uniform(cls, n_groups, standard, defect, color_diff, **kwargs):
        return cls(tuple(GroupSpec(standard, defect, color_diff) for _ in range(n_groups)), **kwargs)


@dataclass
class GroupResult:
    group: str
    n: dict = field(default_factory=lambda: {k: 0 for k in KINDS})
    correct: dict = field(default_factory=lambda: {k: 0 for k in KINDS})

    @property
    def total(self):
        return sum(self.n.values())

    @property
    def total_correct(self):
        return sum(self.correct.values())

    @property
    def accuracy(self):
        return self.total_correct / self.total if self.total else 1.0

    def row(self):
        return [self.group,
                self.n["standard"], self.correct["standard"],
                self.n["defect"], self.correct["defect"],
                self.n["color_diff"], self.correct["color_diff"],
                f"{self.accuracy:.4f}"]


@dataclass
class ExperimentResult:
    groups: list
    misclassified: list         # (group, kind, board seed, verdict, tags)

    @property
    def overall(self):
        total = GroupResult("total")
        for g in self.groups:
            for k in KINDS:
                total.n[k] += g.n[k]
                total.correct[k] += g.correct[k]
        return total

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for g in self.groups:
            w.writerow(g.row())
        w.writerow(self.overall.row())
        return buf.getvalue()


def board_seed(plan_seed, group, rep, kind, index):
    """Stable per-board seed derived from the board's place in the plan."""
    seq = np.random.SeedSequence([plan_seed, group, rep, KINDS.index(kind), index])
    return int(seq.generate_state(1)[0])


def is_correct(kind, report):
    if kind == "standard":
        return report.verdict == "qualified"
    if kind == "color_diff":
        return report.verdict == "defective" and "color_difference" in report.defect_tags
    return report.verdict == "defective"


def _inspect_one(job):
    kind, seed, noise, cfg = job
    img, _ = generate_board(kind, seed, noise)
    report = run_pipeline(img, cfg, board_id=f"{kind}-{seed}")
    return is_correct(kind, report), report.verdict, report.defect_tags


def run_experiment(plan, cfg=None, workers=1):
    """Generate, inspect and tabulate every board of the plan.

    Results do not depend on ``workers``: jobs are mapped in plan order.
    """
    cfg = cfg or PipelineConfig()
    jobs, places = [], []
    for gi, group in enumerate(plan.groups):
        for rep in range(plan.repetitions):
            for kind in KINDS:
                for i in range(group.count(kind)):
                    seed = board_seed(plan.seed, gi, rep, kind, i)
                    jobs.append((kind, seed, plan.noise_sigma, cfg))
                    places.append((gi, kind, seed))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_inspect_one, jobs, chunksize=16))
    else:
        outcomes = [_inspect_one(job) for job in jobs]
    groups = [GroupResult(str(i + 1)) for i in range(len(plan.groups))]
    missed = []
    for (gi, kind, seed), (ok, verdict, tags) in zip(places, outcomes):
        groups[gi].n[kind] += 1
        if ok:
            groups[gi].correct[kind] += 1
        else:
            missed.append((gi + 1, kind, seed, verdict, list(tags)))
    if missed:
        logger.info("%d of %d boards misclassified", len(missed), len(jobs))
    return ExperimentResult(groups, missed)


def _int(kv, section, key, default):
    value = kvfile.get_float(kv, section, key, required=False, default=default)
    if value != int(value):
        raise SchemaError("must be an integer", field=f"{section}.{key}",
                          line=kv.line_of(section, key), path=kv.path)
    return int(value)


def parse_plan(text, path=None):
    """Plan file: a ``[plan]`` section (seed, repetitions, noise_sigma) and one
    section per group with ``standard``, ``defect`` and ``color_diff`` counts."""
    kv = kvfile.parse(text, path)
    groups = []
    for name, entries in kv.sections.items():
        allowed = ("seed", "repetitions", "noise_sigma") if name == "plan" else KINDS
        for key, (_, line) in entries.items():
            if key not in allowed:
                raise SchemaError("unknown key", field=f"{name}.{key}", line=line, path=path)
        if name != "plan":
            groups.append(GroupSpec(*(_int(kv, name, k, 0) for k in KINDS)))
    return ExperimentPlan(tuple(groups),
                          repetitions=_int(kv, "plan", "repetitions", 1),
                          seed=_int(kv, "plan", "seed", 0),
                          noise_sigma=kvfile.get_float(kv, "plan", "noise_sigma",
                                                       required=False, default=0.0))


def load_plan(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_plan(fh.read(), path)
