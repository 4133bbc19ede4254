"""Command-line entry point: ``tlgc run | synth | convert-check``."""

import argparse
import json
import sys

from .experiment import ExperimentConfig, PipelineError, run_experiment
from .hsi_io import CUBE_MAGIC, LABEL_MAGIC, check_classes, load_cube, load_labels, save_cube, save_labels
from .synthetic import SyntheticSpec, make_synthetic


def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            # start:stop:step, stop inclusive
            a, b, *c = (int(x) for x in part.split(":"))
            out.extend(range(a, b + 1, c[0] if c else 1))
        elif part:
            out.append(int(part))
    return out


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="tlgc", description="Trace-lasso L1 graph-cut DR experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config", nargs="?", help="JSON config file (keys as in ExperimentConfig)")
    run.add_argument("--cube", dest="cube_path")
    run.add_argument("--labels", dest="label_path")
    run.add_argument("--method", dest="methods", help="method or comma list: tl_l1gc, l1gc, sc_l2")
    run.add_argument("--delta", type=float)
    run.add_argument("--dims", type=_int_list, help="e.g. 4,8,16 or 4:60:2")
    run.add_argument("--use-filter", dest="use_filter", action=argparse.BooleanOptionalAction, default=None)
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--samples-per-class", dest="samples_per_class", type=int)
    run.add_argument("--noise", dest="noise_percents", type=_float_list, help="comma list of percents")
    run.add_argument("--classifier", choices=["svm", "1nn"])
    run.add_argument("--svm-C", dest="svm_C", type=float)
    run.add_argument("--n-starts", dest="n_starts", type=int)
    run.add_argument("--out", dest="output_dir")
    run.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                     help="override any config key with a JSON value")

    synth = sub.add_parser("synth", help="write a synthetic cube and label map")
    synth.add_argument("cube_out")
    synth.add_argument("labels_out")
    synth.add_argument("--spec", help="JSON file with SyntheticSpec fields")
    synth.add_argument("--seed", type=int, default=0)
    for name, default in SyntheticSpec().to_dict().items():
        synth.add_argument("--" + name.replace("_", "-"), dest=name, type=type(default), default=None)

    check = sub.add_parser("convert-check", help="validate HSIC/HSIL container files")
    check.add_argument("files", nargs="+")
    return parser


def resolve_config(args):
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    overrides = {k: getattr(args, k) for k in
                 ("cube_path", "label_path", "methods", "delta", "dims", "use_filter", "seed", "trials",
                  "samples_per_class", "noise_percents", "classifier", "svm_C", "n_starts", "output_dir")}
    for item in args.set:
        key, _, value = item.partition("=")
        overrides[key.strip()] = json.loads(value)
    for key, value in overrides.items():
        if value is not None:
            if key == "methods":
                raw.pop("method", None)
            raw[key] = value
    cfg = ExperimentConfig.from_dict(raw)
    cfg.validate()
    return cfg


def _cmd_run(args):
    try:
        cfg = resolve_config(args)
    except (OSError, ValueError, TypeError) as exc:
        raise PipelineError("config", str(exc)) from exc
    result = run_experiment(cfg)
    print(open(f"{cfg.output_dir}/report.txt").read(), end="")
    print(f"wrote {len(result.records)} records to {cfg.output_dir}")


def _cmd_synth(args):
    try:
        raw = {}
        if args.spec:
            with open(args.spec) as fh:
                raw = json.load(fh)
        for name in SyntheticSpec().to_dict():
            if getattr(args, name) is not None:
                raw[name] = getattr(args, name)
        spec = SyntheticSpec(**raw)
    except (OSError, ValueError, TypeError) as exc:
        raise PipelineError("config", str(exc)) from exc
    try:
        cube, labels = make_synthetic(spec, args.seed)
    except ValueError as exc:
        raise PipelineError("synth", str(exc)) from exc
    try:
        save_cube(cube, args.cube_out)
        save_labels(labels, args.labels_out)
    except OSError as exc:
        raise PipelineError("write", str(exc)) from exc
    print(f"{cube.height}x{cube.width}x{cube.bands} cube, {labels.n_classes} classes")


def _sniff(path):
    with open(path, "rb") as fh:
        head = fh.read(64)
    return LABEL_MAGIC if LABEL_MAGIC.encode() in head else CUBE_MAGIC


def _cmd_check(args):
    failed = 0
    for path in args.files:
        try:
            if _sniff(path) == LABEL_MAGIC:
                lm = load_labels(path)
                C = check_classes(lm.labels)
                print(f"ok   {path}: label map {lm.height}x{lm.width}, {C} classes")
            else:
                cube = load_cube(path)
                print(f"ok   {path}: cube {cube.height}x{cube.width}x{cube.bands}")
        except (OSError, ValueError) as exc:
            failed += 1
            print(f"FAIL {path}: {type(exc).__name__}: {exc}", file=sys.stderr)
    if failed:
        raise PipelineError("convert-check", f"{failed} of {len(args.files)} files invalid")


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "synth": _cmd_synth, "convert-check": _cmd_check}[args.command]
    try:
        handler(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
