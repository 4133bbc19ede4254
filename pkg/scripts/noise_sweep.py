"""Accuracy versus injected noise level, for plotting accuracy-vs-noise curves.

Uses the synthetic scene unless --cube/--labels point at real containers.

    python3 scripts/noise_sweep.py --noise 0 2 4 6 8 10 --dim 4
"""

import argparse

from tlgc.experiment import ExperimentConfig, emit_report, run_experiment
from tlgc.hsi_io import load_cube, load_labels
from tlgc.synthetic import SyntheticSpec, make_synthetic


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cube")
    parser.add_argument("--labels")
    parser.add_argument("--noise", type=float, nargs="+", default=[0, 1, 2, 4, 6, 8, 10])
    parser.add_argument("--dim", type=int, default=4)
    parser.add_argument("--filter", action="store_true", help="guided-filter the noisy cube")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--out", default="results/noise")
    args = parser.parse_args()

    if args.cube and args.labels:
        cube, labels = load_cube(args.cube), load_labels(args.labels)
    else:
        cube, labels = make_synthetic(SyntheticSpec(), args.seed)
    cfg = ExperimentConfig(cube_path=args.cube or "<synthetic>", label_path=args.labels or "<synthetic>",
                           dims=[args.dim], noise_percents=args.noise, use_filter=args.filter,
                           trials=args.trials, seed=args.seed, output_dir=args.out)
    result = run_experiment(cfg, cube, labels, write=False)
    emit_report(result, args.out)

    print(f"{'noise %':>8} " + " ".join(f"{m:>9}" for m in cfg.methods))
    oa = {(r["method"], r["noise_percent"]): r["oa_mean"] for r in result.summary}
    for p in cfg.noise_percents:
        print(f"{p:>8g} " + " ".join(f"{100 * oa[m, p]:>9.2f}" for m in cfg.methods))


if __name__ == "__main__":
    main()
