"""Command-line front end.

Exit status: 0 on success (a defective board is a result, not a failure),
1 on a domain error, 2 on a usage error.
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import aco, barcode, camera, edges, filters, kvfile, linefit, matching, tone
from .errors import BoardlensError, SchemaError
from .imgcore.image import quantize
from .imgcore.pnm import read_image, write_image
from .inspection import config as inspect_config
from .inspection import deeppcb, experiment, pipeline, report, synth

logger = logging.getLogger("boardlens")

CONFIG_ENV = "BOARDLENS_CONFIG"


class UsageError(Exception):
    """Bad flag combination detected after argparse; exit status 2."""


def _dump(obj):
    return json.dumps(obj, sort_keys=True)


def _emit(text, path=None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_kv(args):
    path = args.config or os.environ.get(CONFIG_ENV)
    if not path:
        return None
    return kvfile.load(path)


def _setting(args, kv, name, section, key=None, default=None, cast=float):
    """Flag value, else config file value, else ``default``."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if kv is not None:
        raw = kv.get(section, key or name)
        if raw is not None:
            try:
                return cast(raw)
            except ValueError:
                raise SchemaError(f"not a valid value: {raw!r}", field=f"{section}.{key or name}",
                                  line=kv.line_of(section, key or name), path=kv.path) from None
    return default


def _gray_input(path):
    img = read_image(path)
    return tone.rgb_to_gray(img) if img.ndim == 3 else img


def _magnitude_image(values):
    return quantize(np.clip(values, 0, 255))


def _read_points(path):
    pts = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                pts.append([float(v) for v in row])
            except ValueError:
                if lineno == 1:
                    continue    # header
                raise SchemaError(f"not a number in {row!r}", line=lineno, path=path) from None
    return np.array(pts, dtype=np.float64)


# ---------------------------------------------------------------- commands

def cmd_filter(args, kv):
    img = _gray_input(args.input)
    radius = args.radius
    if args.kind == "mean":
        out = filters.mean_filter(img, radius)
    elif args.kind == "median":
        out = filters.median_filter(img, radius)
    else:
        sigma = _setting(args, kv, "sigma", "filter", default=filters.DEFAULT_SIGMA)
        out = filters.gaussian_filter(img, filters.GaussianSpec(sigma, radius), args.separable)
    write_image(args.output, out)


def cmd_tone(args, kv):
    if args.kind == "gray":
        img = read_image(args.input)
        out = tone.rgb_to_gray(img) if img.ndim == 3 else img
    else:
        img = _gray_input(args.input)
        if args.kind == "linear":
            if None in (args.a, args.b):
                raise UsageError("tone linear needs --a and --b")
            c = 0.0 if args.c is None else args.c
            d = 255.0 if args.d is None else args.d
            out = tone.linear_transform(img, tone.LinearMap(args.a, args.b, c, d))
        elif args.kind == "log":
            p = tone.LogParams(0.0 if args.a is None else args.a,
                               10.0 if args.b is None else args.b,
                               1.0 if args.c is None else args.c)
            out = tone.log_transform(img, p)
        elif args.kind == "exp":
            p = tone.ExpParams(1.0 if args.a is None else args.a,
                               0.0 if args.b is None else args.b,
                               1.0 if args.c is None else args.c)
            out = tone.exp_transform(img, p)
        elif args.kind == "stretch":
            out, params = tone.stretch(img)
            sys.stdout.write(_dump({"gmin": params.gmin, "gmax": params.gmax,
                                    "mult": params.mult, "add": params.add}) + "\n")
        else:
            out = tone.emphasize(img, args.mask, args.factor)
    write_image(args.output, out)


def cmd_edges(args, kv):
    img = _gray_input(args.input)
    if args.kind == "roberts":
        out = _magnitude_image(edges.roberts(img))
    elif args.kind in ("sobel", "prewitt"):
        out = _magnitude_image(edges.gradient(img, args.kind).magnitude)
    else:
        sigma = _setting(args, kv, "sigma", "edges", default=filters.DEFAULT_SIGMA)
        low = _setting(args, kv, "low", "edges", default=edges.HysteresisThresholds().t_low)
        high = _setting(args, kv, "high", "edges", default=edges.HysteresisThresholds().t_high)
        out = edges.canny(img, filters.GaussianSpec(sigma, args.radius),
                          edges.HysteresisThresholds(low, high))
    write_image(args.output, out)


def _parse_pair(text, what):
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must look like ROW,COL") from None
    return a, b


def cmd_match(args, kv):
    img = _gray_input(args.image)
    tmpl = _gray_input(args.template)
    if args.kind == "ncc":
        res = matching.ncc_match(img, tmpl)
        if args.score_map:
            np.savetxt(args.score_map, res.score_map, delimiter=",", fmt="%.17g")
        _emit(_dump({"method": "ncc", "position": list(res.position), "score": res.score}) + "\n")
        return
    if args.at is None:
        raise UsageError(f"match {args.kind} needs --at ROW,COL")
    at = _parse_pair(args.at, "--at")
    fn = matching.sad if args.kind == "sad" else matching.ssd
    _emit(_dump({"method": args.kind, "position": list(at), "value": fn(img, tmpl, at)}) + "\n")


def cmd_fitline(args, kv):
    pts = _read_points(args.points)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise SchemaError("points file must have two columns x,y", path=args.points)
    spec = linefit.TukeySpec(args.tau, args.max_iters, args.tol, not args.printed_tail)
    fit = linefit.fit_line_irls(pts, spec)
    _emit(_dump({"nx": fit.line.nx, "ny": fit.line.ny, "d": fit.line.d,
                 "angle": fit.line.angle, "iterations": fit.iterations,
                 "converged": fit.converged,
                 "weights": [float(w) for w in fit.weights]}) + "\n")


def cmd_barcode(args, kv):
    img = _gray_input(args.input)
    cfg = barcode.BarcodeConfig(
        ratio_lo=_setting(args, kv, "ratio_lo", "barcode", default=0.7),
        ratio_hi=_setting(args, kv, "ratio_hi", "barcode", default=1.5))
    lines = [c.to_json() + "\n" for c in barcode.locate_barcode(img, cfg)]
    _emit("".join(lines), args.output)


_ACO_FIELDS = (("alpha", float), ("beta", float), ("rho", float), ("big_h", float),
               ("ants", int), ("iterations", int), ("tau0", float), ("tau_min", float),
               ("tau_max", float), ("seed", int), ("q0", float))


def _aco_params(args, kv, base):
    values = {}
    for name, cast in _ACO_FIELDS:
        v = _setting(args, kv, name, "aco", cast=cast)
        if v is not None:
            values[name] = v
    merged = {**base.__dict__, **values}
    return aco.AcoParams(**merged)


def cmd_aco(args, kv):
    if args.kind == "tsp":
        pts = _read_points(args.input)
        problem = aco.TourProblem.from_points(pts)
        result = aco.run_aco(problem, _aco_params(args, kv, aco.AcoParams()))
        out = {"tour": list(result.best.visited), "cost": result.best.cost}
    else:
        img = _gray_input(args.input)
        params = _aco_params(args, kv, aco.THRESHOLD_PARAMS)
        thresholds, result = aco.aco_thresholds(img, args.k, params)
        out = {"thresholds": thresholds, "cost": result.best.cost}
        if args.segmented:
            classes = aco.segment(img, thresholds).astype(np.float64)
            write_image(args.segmented, quantize(classes * 255.0 / len(thresholds)))
    if args.trace:
        _emit(result.trace_csv(), args.trace)
    _emit(_dump(out) + "\n")


def cmd_camera(args, kv):
    rig = camera.load_calibration(args.calib)
    cam = rig.left if args.side == "left" else rig.right
    if args.kind == "project":
        try:
            point = [float(v) for v in args.point.split(",")]
        except ValueError:
            raise UsageError("--point must look like X,Y,Z") from None
        if len(point) != 3:
            raise UsageError("--point must look like X,Y,Z")
        u, v = camera.project(point, cam)
        _emit(_dump({"side": args.side, "u": u, "v": v}) + "\n")
    else:
        rows = _read_points(args.pairs)
        if rows.ndim != 2 or rows.shape[1] != 5:
            raise SchemaError("pairs file must have columns X,Y,Z,u,v", path=args.pairs)
        pairs = [(r[:3], r[3:]) for r in rows]
        _emit(_dump({"side": args.side, "error": camera.reprojection_error(pairs, cam)}) + "\n")


def _pipeline_config(args, kv):
    cfg = inspect_config.config_from_kv(kv) if kv is not None else inspect_config.PipelineConfig()
    try:
        return cfg.with_overrides(brightness_threshold=args.threshold,
                                  brightness_source=args.brightness_source,
                                  golden=args.golden)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def cmd_inspect(args, kv):
    cfg = _pipeline_config(args, kv)
    out = []
    status = 0
    for path in args.boards:
        board_id = args.board_id or os.path.splitext(os.path.basename(path))[0]
        rep = pipeline.run_pipeline(read_image(path), cfg, board_id)
        rep = report.InspectionReport(rep.board_id, rep.features, rep.verdict, rep.defect_tags,
                                      rep.timings, rep.removal_event, cfg.to_dict())
        out.append(rep.to_json(include_timings=args.timings) + "\n")
        if args.event_log:
            report.append_removal(args.event_log, rep)
        if args.fail_on_defect and not rep.qualified:
            status = 3
    _emit("".join(out), args.output)
    return status


def cmd_experiment(args, kv):
    plan = experiment.load_plan(args.plan)
    cfg = _pipeline_config(args, kv)
    workers = args.workers or os.cpu_count() or 1
    result = experiment.run_experiment(plan, cfg, workers)
    _emit(result.to_csv(), args.output)


def cmd_deeppcb(args, kv):
    samples = deeppcb.ingest_deeppcb(args.root)
    if args.kind == "ingest":
        lines = [_dump({"sample_id": s.sample_id, "template": s.template_path,
                        "test": s.test_path,
                        "annotations": [a.box.as_list() + [a.class_id] for a in s.annotations]})
                 + "\n" for s in samples]
        _emit("".join(lines), args.output)
        return
    cfg = deeppcb.DeepPcbConfig(
        diff_threshold=_setting(args, kv, "diff_threshold", "deeppcb", default=60.0),
        min_area=_setting(args, kv, "min_area", "deeppcb", default=20, cast=int),
        search_radius=_setting(args, kv, "search_radius", "deeppcb", default=4, cast=int),
        iou_threshold=_setting(args, kv, "iou", "deeppcb", default=0.3))
    _emit(_dump(deeppcb.evaluate_deeppcb(samples, cfg)) + "\n", args.output)


def cmd_synth(args, kv):
    img, truth = synth.generate_board(args.kind, args.seed, args.noise, args.defect)
    write_image(args.output, img)
    if args.truth:
        _emit(_dump(truth.to_dict()) + "\n", args.truth)


# ------------------------------------------------------------------ parser

def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="boardlens", formatter_class=fmt,
                                description="Classical PCB inspection toolkit.")
    p.add_argument("--config", help=f"key=value config file; ${CONFIG_ENV} is read when this is absent")
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging verbosity")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("filter", formatter_class=fmt, help="mean, median or Gaussian smoothing")
    s.add_argument("kind", choices=["mean", "median", "gaussian"])
    s.add_argument("input", help="input PGM/PPM")
    s.add_argument("-o", "--output", required=True, help="output PGM")
    s.add_argument("--radius", type=int, default=1, help="window half-width in pixels")
    s.add_argument("--sigma", type=float, default=None,
                   help=f"Gaussian sigma in pixels (default: {filters.DEFAULT_SIGMA:.6f})")
    s.add_argument("--separable", action="store_true", help="two 1-D Gaussian passes")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("tone", formatter_class=fmt, help="gray-level transforms")
    s.add_argument("kind", choices=["linear", "log", "exp", "stretch", "emphasize", "gray"])
    s.add_argument("input", help="input PGM/PPM")
    s.add_argument("-o", "--output", required=True, help="output PGM")
    s.add_argument("--a", type=float, default=None,
                   help="linear: input low, gray; log: offset in g = a + log_b(f + c) (default 0); "
                        "exp: scale in g = a * (f + b)^c (default 1)")
    s.add_argument("--b", type=float, default=None,
                   help="linear: input high, gray; log: base (default 10); exp: shift, gray (default 0)")
    s.add_argument("--c", type=float, default=None,
                   help="linear: output low (default 0); log: shift, gray (default 1); "
                        "exp: exponent (default 1)")
    s.add_argument("--d", type=float, default=None, help="linear: output high (default 255)")
    s.add_argument("--mask", type=int, default=7, help="emphasize: odd window side in pixels")
    s.add_argument("--factor", type=float, default=1.0, help="emphasize: contrast gain (dimensionless)")
    s.set_defaults(func=cmd_tone)

    s = sub.add_parser("edges", formatter_class=fmt, help="edge maps")
    s.add_argument("kind", choices=["roberts", "sobel", "prewitt", "canny"])
    s.add_argument("input", help="input PGM/PPM")
    s.add_argument("-o", "--output", required=True, help="output PGM (magnitude clipped to 255, or 0/255 edges)")
    s.add_argument("--sigma", type=float, default=None,
                   help=f"canny: Gaussian sigma in pixels (default: {filters.DEFAULT_SIGMA:.6f})")
    s.add_argument("--radius", type=int, default=1, help="canny: Gaussian half-width in pixels")
    s.add_argument("--low", type=float, default=None, help="canny: low threshold, gradient units (default: 50)")
    s.add_argument("--high", type=float, default=None, help="canny: high threshold, gradient units (default: 120)")
    s.set_defaults(func=cmd_edges)

    s = sub.add_parser("match", formatter_class=fmt, help="template matching")
    s.add_argument("kind", choices=["ncc", "sad", "ssd"])
    s.add_argument("image", help="search image PGM/PPM")
    s.add_argument("template", help="template PGM/PPM")
    s.add_argument("--at", default=None, help="sad/ssd: window top-left as ROW,COL in pixels")
    s.add_argument("--score-map", default=None, help="ncc: write the full score map as CSV")
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("fitline", formatter_class=fmt, help="robust line fit to x,y points")
    s.add_argument("points", help="CSV file of x,y rows (pixels)")
    s.add_argument("--tau", type=float, default=2.0, help="Tukey cutoff in pixels")
    s.add_argument("--max-iters", type=int, default=20, help="reweighting passes")
    s.add_argument("--tol", type=float, default=1e-6, help="convergence tolerance on line parameters")
    s.add_argument("--printed-tail", action="store_true",
                   help="keep weight tau/|delta| beyond tau instead of 0")
    s.set_defaults(func=cmd_fitline)

    s = sub.add_parser("barcode", formatter_class=fmt, help="barcode region search")
    bsub = s.add_subparsers(dest="action", metavar="ACTION")
    bsub.required = True
    b = bsub.add_parser("locate", formatter_class=fmt, help="list candidate regions as JSON lines")
    b.add_argument("input", help="input PGM/PPM")
    b.add_argument("-o", "--output", default=None, help="write JSON lines here instead of stdout")
    b.add_argument("--ratio-lo", dest="ratio_lo", type=float, default=None,
                   help="lowest accepted white/black area ratio (default: 0.7)")
    b.add_argument("--ratio-hi", dest="ratio_hi", type=float, default=None,
                   help="highest accepted white/black area ratio (default: 1.5)")
    b.set_defaults(func=cmd_barcode)

    s = sub.add_parser("aco", formatter_class=fmt, help="ant colony optimization")
    s.add_argument("kind", choices=["tsp", "threshold"])
    s.add_argument("input", help="tsp: CSV of x,y city rows; threshold: PGM/PPM image")
    s.add_argument("--k", type=int, default=1, help="threshold: number of thresholds")
    s.add_argument("--trace", default=None, help="write the convergence trace CSV here")
    s.add_argument("--segmented", default=None, help="threshold: write the class image PGM here")
    defaults = aco.AcoParams()
    for name, cast in _ACO_FIELDS:
        s.add_argument(f"--{name.replace('_', '-')}", dest=name, type=cast, default=None,
                       help=f"{name} (tsp default: {getattr(defaults, name)}, threshold default: "
                            f"{getattr(aco.THRESHOLD_PARAMS, name)})")
    s.set_defaults(func=cmd_aco)

    s = sub.add_parser("camera", formatter_class=fmt, help="pinhole projection")
    s.add_argument("kind", choices=["project", "reproject"])
    s.add_argument("--calib", required=True, help="calibration file")
    s.add_argument("--side", choices=["left", "right"], default="left", help="camera of the rig")
    s.add_argument("--point", default=None, help="project: world point X,Y,Z in millimetres")
    s.add_argument("--pairs", default=None, help="reproject: CSV of X,Y,Z (mm),u,v (pixels)")
    s.set_defaults(func=cmd_camera)

    def add_pipeline_flags(s):
        s.add_argument("--threshold", type=float, default=None,
                       help="brightness threshold, gray levels (default: 150, strict >)")
        s.add_argument("--brightness-source", dest="brightness_source", default=None,
                       choices=list(inspect_config.BRIGHTNESS_SOURCES),
                       help="brightness feature (default: hsv_v_scaled_0_255)")
        s.add_argument("--golden", default=None,
                       help="golden board PNM (default: the synthetic reference board)")

    s = sub.add_parser("inspect", formatter_class=fmt, help="inspect boards, one JSON report per line")
    s.add_argument("boards", nargs="+", help="board PPM files")
    s.add_argument("-o", "--output", default=None, help="write reports here instead of stdout")
    s.add_argument("--board-id", default=None, help="report id (default: file stem)")
    s.add_argument("--event-log", default=None, help="append REMOVE lines for defective boards here")
    s.add_argument("--timings", action="store_true", help="include per-stage seconds (not reproducible)")
    s.add_argument("--fail-on-defect", action="store_true", help="exit 3 when any board is defective")
    add_pipeline_flags(s)
    s.set_defaults(func=cmd_inspect)

    s = sub.add_parser("experiment", formatter_class=fmt, help="run an accuracy experiment plan")
    s.add_argument("plan", help="plan file ([plan] plus one section per group)")
    s.add_argument("-o", "--output", default=None, help="write the CSV table here instead of stdout")
    s.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: available CPUs)")
    add_pipeline_flags(s)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("deeppcb", formatter_class=fmt, help="DeepPCB-style pairs")
    s.add_argument("kind", choices=["ingest", "evaluate"])
    s.add_argument("root", help="dataset root directory")
    s.add_argument("-o", "--output", default=None, help="write output here instead of stdout")
    s.add_argument("--diff-threshold", dest="diff_threshold", type=float, default=None,
                   help="evaluate: gray difference counted as change (default: 60)")
    s.add_argument("--min-area", dest="min_area", type=int, default=None,
                   help="evaluate: smallest predicted blob in pixels (default: 20)")
    s.add_argument("--search-radius", dest="search_radius", type=int, default=None,
                   help="evaluate: alignment search radius in pixels (default: 4)")
    s.add_argument("--iou", type=float, default=None, help="evaluate: match IoU (default: 0.3)")
    s.set_defaults(func=cmd_deeppcb)

    s = sub.add_parser("synth", formatter_class=fmt, help="generate a synthetic board")
    s.add_argument("kind", choices=list(synth.KINDS))
    s.add_argument("-o", "--output", required=True, help="output PPM")
    s.add_argument("--seed", type=int, default=0, help="generator seed")
    s.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma, gray levels")
    s.add_argument("--defect", choices=list(synth.DEFECTS), default=None,
                   help="force the damage type for kind defect (default: seed decides)")
    s.add_argument("--truth", default=None, help="write ground truth JSON here")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        kv = _load_kv(args)
        status = args.func(args, kv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"boardlens: error: {exc}", file=sys.stderr)
        return 2
    except (BoardlensError, ValueError, OSError) as exc:
        print(f"boardlens: {exc}", file=sys.stderr)
        return 1
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
