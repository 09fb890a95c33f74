from importlib import resources
import json

import numpy as np
import pytest

from boardlens import aco, barcode, camera, cli, edges, filters, matching
from boardlens.imgcore.pnm import read_image, write_image
from boardlens.inspection import generate_board, run_pipeline
from conftest import barcode_board, square_image

DATA = resources.files("boardlens") / "data"


def run(argv, capsys):
    status = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return status, out, err


@pytest.fixture
def workdir(tmp_path):
    sq, _ = square_image(64, 32, 20, 220)
    write_image(str(tmp_path / "sq.pgm"), sq)
    rng = np.random.default_rng(5)
    noisy = rng.integers(0, 256, (40, 48)).astype(np.uint8)
    write_image(str(tmp_path / "noisy.pgm"), noisy)
    write_image(str(tmp_path / "tmpl.pgm"), noisy[10:20, 12:26])
    write_image(str(tmp_path / "code.pgm"), barcode_board(2)[0])
    bimodal = np.where(rng.random((32, 32)) < 0.5, 50, 200).astype(np.uint8)
    write_image(str(tmp_path / "bimodal.pgm"), bimodal)
    (tmp_path / "cities.csv").write_text("x,y\n0,0\n0,3\n4,3\n4,0\n")
    (tmp_path / "pts.csv").write_text("".join(f"{i},{i}\n" for i in range(10)) + "3,40\n")
    (tmp_path / "pairs.csv").write_text("0,0,500,662.418,453.05\n")
    board, _ = generate_board("color_diff", 3)
    write_image(str(tmp_path / "board.ppm"), board)
    (tmp_path / "plan.plan").write_text("[plan]\nseed = 1\n[g]\nstandard = 2\ndefect = 1\ncolor_diff = 1\n")
    return tmp_path


def commands(d):
    fixture = str(resources.files("boardlens").parent.parent / "tests" / "fixtures" / "deeppcb")
    return [
        ["filter", "mean", d / "noisy.pgm", "-o", d / "out.pgm", "--radius", 2],
        ["filter", "median", d / "noisy.pgm", "-o", d / "out.pgm"],
        ["filter", "gaussian", d / "noisy.pgm", "-o", d / "out.pgm", "--separable"],
        ["tone", "stretch", d / "noisy.pgm", "-o", d / "out.pgm"],
        ["tone", "log", d / "noisy.pgm", "-o", d / "out.pgm"],
        ["tone", "emphasize", d / "noisy.pgm", "-o", d / "out.pgm", "--factor", 2],
        ["tone", "gray", d / "board.ppm", "-o", d / "out.pgm"],
        ["edges", "sobel", d / "sq.pgm", "-o", d / "out.pgm"],
        ["edges", "canny", d / "sq.pgm", "-o", d / "out.pgm"],
        ["match", "ncc", d / "noisy.pgm", d / "tmpl.pgm", "--score-map", d / "map.csv"],
        ["match", "sad", d / "noisy.pgm", d / "tmpl.pgm", "--at", "3,4"],
        ["fitline", d / "pts.csv"],
        ["barcode", "locate", d / "code.pgm"],
        ["aco", "tsp", d / "cities.csv", "--seed", 3, "--iterations", 20, "--trace", d / "trace.csv"],
        ["aco", "threshold", d / "bimodal.pgm", "--seed", 1, "--iterations", 20,
         "--segmented", d / "out.pgm"],
        ["camera", "project", "--calib", DATA / "stereo_rig_f8.cal", "--point", "10,5,400"],
        ["camera", "reproject", "--calib", DATA / "stereo_rig.cal", "--pairs", d / "pairs.csv"],
        ["inspect", d / "board.ppm", "--event-log", d / "events.log"],
        ["experiment", d / "plan.plan", "--workers", 1],
        ["deeppcb", "evaluate", fixture],
        ["synth", "defect", "-o", d / "out.ppm", "--seed", 4, "--truth", d / "truth.json"],
    ]


def snapshot(d):
    files = {}
    for p in sorted(d.iterdir()):
        if p.name not in ("events.log",):
            files[p.name] = p.read_bytes()
    return files


@pytest.mark.parametrize("index", range(21))
def test_byte_identical_reruns(workdir, capsys, monkeypatch, index):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    argv = commands(workdir)[index]
    first = run(argv, capsys)
    files = snapshot(workdir)
    second = run(argv, capsys)
    assert first[0] == 0, first[2]
    assert first[:2] == second[:2]
    assert snapshot(workdir) == files


def test_thin_bindings(workdir, capsys):
    noisy = read_image(str(workdir / "noisy.pgm"))
    run(["filter", "median", workdir / "noisy.pgm", "-o", workdir / "m.pgm", "--radius", 2], capsys)
    assert np.array_equal(read_image(str(workdir / "m.pgm")), filters.median_filter(noisy, 2))

    sq = read_image(str(workdir / "sq.pgm"))
    run(["edges", "canny", workdir / "sq.pgm", "-o", workdir / "c.pgm"], capsys)
    assert np.array_equal(read_image(str(workdir / "c.pgm")), edges.canny(sq))

    _, out, _ = run(["match", "ncc", workdir / "noisy.pgm", workdir / "tmpl.pgm"], capsys)
    res = matching.ncc_match(noisy, noisy[10:20, 12:26])
    assert json.loads(out) == {"method": "ncc", "position": list(res.position), "score": res.score}

    _, out, _ = run(["barcode", "locate", workdir / "code.pgm"], capsys)
    lib = "".join(c.to_json() + "\n" for c in barcode.locate_barcode(read_image(str(workdir / "code.pgm"))))
    assert out == lib

    _, out, _ = run(["aco", "threshold", workdir / "bimodal.pgm", "--seed", 2, "--iterations", 15], capsys)
    params = aco.AcoParams(**{**aco.THRESHOLD_PARAMS.__dict__, "seed": 2, "iterations": 15})
    thr, result = aco.aco_thresholds(read_image(str(workdir / "bimodal.pgm")), 1, params)
    assert json.loads(out) == {"thresholds": thr, "cost": result.best.cost}

    _, out, _ = run(["camera", "project", "--calib", DATA / "stereo_rig_f8.cal",
                     "--side", "right", "--point", "10,5,400"], capsys)
    rig = camera.load_calibration(str(DATA / "stereo_rig_f8.cal"))
    u, v = camera.project((10, 5, 400), rig.right)
    assert json.loads(out) == {"side": "right", "u": u, "v": v}


def test_canny_smoke(workdir, capsys):
    status, _, _ = run(["edges", "canny", workdir / "sq.pgm", "--sigma", 0.85, "--low", 40,
                        "--high", 90, "-o", workdir / "e.pgm"], capsys)
    out = read_image(str(workdir / "e.pgm"))
    assert status == 0 and set(np.unique(out)) == {0, 255}
    assert out[16:48, 16:48].any() and not out[:10].any()


def test_inspect_color_diff_with_config(workdir, capsys):
    status, out, _ = run(["--config", DATA / "inspect.cfg", "inspect", workdir / "board.ppm"], capsys)
    rep = json.loads(out)
    assert status == 0 and rep["verdict"] == "defective"
    assert "color_difference" in rep["defect_tags"]
    assert rep["config"]["brightness_threshold"] == 150
    lib = run_pipeline(read_image(str(workdir / "board.ppm")))
    assert rep["features"] == json.loads(lib.to_json())["features"]


def test_fail_on_defect(workdir, capsys):
    status, _, _ = run(["inspect", workdir / "board.ppm", "--fail-on-defect"], capsys)
    assert status == 3
    write_image(str(workdir / "ok.ppm"), generate_board("standard", 1)[0])
    assert run(["inspect", workdir / "ok.ppm", "--fail-on-defect"], capsys)[0] == 0


def test_env_config(workdir, capsys, monkeypatch):
    cfg = workdir / "strict.cfg"
    cfg.write_text("[inspect]\nbrightness_threshold = 254\n")
    write_image(str(workdir / "ok.ppm"), generate_board("standard", 1)[0])
    monkeypatch.setenv("BOARDLENS_CONFIG", str(cfg))
    _, out, _ = run(["inspect", workdir / "ok.ppm"], capsys)
    assert json.loads(out)["verdict"] == "defective"
    _, out, _ = run(["inspect", workdir / "ok.ppm", "--threshold", 150], capsys)
    assert json.loads(out)["verdict"] == "qualified"


def test_domain_errors_exit_1(workdir, capsys):
    (workdir / "bad.pgm").write_bytes(b"P9\n1 1\n255\n\0")
    status, _, err = run(["filter", "mean", workdir / "bad.pgm", "-o", workdir / "x.pgm"], capsys)
    assert status == 1 and "boardlens:" in err
    assert run(["filter", "mean", workdir / "missing.pgm", "-o", workdir / "x.pgm"], capsys)[0] == 1
    status, _, err = run(["camera", "project", "--calib", DATA / "stereo_rig_f8.cal",
                          "--point", "0,0,-5"], capsys)
    assert status == 1 and "depth" in err


def test_usage_errors_exit_2(workdir, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2 and "usage:" in capsys.readouterr().err
    status, _, err = run(["match", "sad", workdir / "noisy.pgm", workdir / "tmpl.pgm"], capsys)
    assert status == 2 and "usage:" in err


SUBCOMMANDS = [["filter"], ["tone"], ["edges"], ["match"], ["fitline"], ["barcode", "locate"],
               ["aco"], ["camera"], ["inspect"], ["experiment"], ["deeppcb"], ["synth"]]


@pytest.mark.parametrize("sub", SUBCOMMANDS, ids=lambda s: "-".join(s))
def test_help(sub, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(sub + ["--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    assert "usage:" in text and "-h, --help" in text
