import csv
import io
from importlib import resources

import pytest

from boardlens.errors import InvalidPlan, SchemaError
from boardlens.inspection import ExperimentPlan, GroupSpec, InspectionReport, load_plan, run_experiment
from boardlens.inspection.experiment import CSV_COLUMNS, board_seed, is_correct, parse_plan


def small_plan(**kw):
    return ExperimentPlan((GroupSpec(3, 2, 2), GroupSpec(2, 1, 1)), **kw)


def test_plan_validation():
    with pytest.raises(InvalidPlan):
        ExperimentPlan(())
    with pytest.raises(InvalidPlan):
        ExperimentPlan((GroupSpec(0, 0, 0),))
    with pytest.raises(InvalidPlan):
        ExperimentPlan((GroupSpec(-1, 2, 0),))
    with pytest.raises(InvalidPlan):
        ExperimentPlan((GroupSpec(1, 0, 0),), repetitions=0)
    with pytest.raises(InvalidPlan):
        ExperimentPlan((GroupSpec(1, 0, 0),), noise_sigma=-1)


def test_uniform_plan():
    plan = ExperimentPlan.uniform(4, 150, 50, 50)
    assert len(plan.groups) == 4 and all(g.total == 250 for g in plan.groups)


def test_shipped_plan():
    plan = load_plan(str(resources.files("boardlens") / "data" / "four_groups.plan"))
    assert plan == ExperimentPlan.uniform(4, 150, 50, 50)


def test_parse_plan_errors():
    text = "[plan]\nseed = 3\nrepetitions = 2\n[g]\nstandard = 4\ndefect = 1\n"
    plan = parse_plan(text)
    assert plan.seed == 3 and plan.repetitions == 2 and plan.groups == (GroupSpec(4, 1, 0),)
    with pytest.raises(SchemaError) as info:
        parse_plan("[g]\nstandard = 4\nbroken = 1\n")
    assert info.value.line == 3
    with pytest.raises(SchemaError):
        parse_plan("[g]\nstandard = 2.5\n")
    with pytest.raises(InvalidPlan):
        parse_plan("[plan]\nseed = 1\n")


def test_board_seed_stable_and_distinct():
    assert board_seed(0, 1, 0, "defect", 5) == board_seed(0, 1, 0, "defect", 5)
    seeds = {board_seed(0, g, 0, k, i) for g in range(2) for k in ("standard", "defect") for i in range(20)}
    assert len(seeds) == 80


def test_correctness_rule():
    ok = InspectionReport("a", {}, "qualified")
    bad = InspectionReport("a", {}, "defective", ("match_fail",))
    col = InspectionReport("a", {}, "defective", ("color_difference",))
    assert is_correct("standard", ok) and not is_correct("standard", bad)
    assert is_correct("defect", bad) and is_correct("defect", col)
    assert is_correct("color_diff", col) and not is_correct("color_diff", bad)


def test_csv_layout_and_overall():
    res = run_experiment(small_plan())
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [r[0] for r in rows[1:]] == ["1", "2", "total"]
    total = res.overall
    assert total.total == 11
    assert total.accuracy == sum(g.total_correct for g in res.groups) / sum(g.total for g in res.groups)
    assert rows[-1][1:7] == [str(total.n["standard"]), str(total.correct["standard"]),
                             str(total.n["defect"]), str(total.correct["defect"]),
                             str(total.n["color_diff"]), str(total.correct["color_diff"])]
    assert len(res.misclassified) == total.total - total.total_correct


def test_repetitions_multiply_counts():
    res = run_experiment(ExperimentPlan((GroupSpec(1, 1, 1),), repetitions=2))
    assert res.groups[0].n == {"standard": 2, "defect": 2, "color_diff": 2}


def test_deterministic_and_worker_independent():
    plan = small_plan(seed=9, noise_sigma=4)
    a = run_experiment(plan).to_csv()
    assert run_experiment(plan).to_csv() == a
    assert run_experiment(plan, workers=2).to_csv() == a
