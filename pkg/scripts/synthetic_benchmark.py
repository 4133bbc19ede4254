"""Compare the three DR methods on the synthetic correlated-band scene.

    python3 scripts/synthetic_benchmark.py --out results/synthetic
"""

import argparse

from tlgc.experiment import ExperimentConfig, emit_report, run_experiment
from tlgc.synthetic import SyntheticSpec, make_synthetic


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 4, 6, 8])
    parser.add_argument("--classifier", choices=["svm", "1nn"], default="svm")
    parser.add_argument("--out", default="results/synthetic")
    args = parser.parse_args()

    cube, labels = make_synthetic(SyntheticSpec(), args.seed)
    cfg = ExperimentConfig(cube_path="<synthetic>", label_path="<synthetic>", dims=args.dims,
                           trials=args.trials, seed=args.seed, classifier=args.classifier, output_dir=args.out)
    result = run_experiment(cfg, cube, labels, write=False)
    emit_report(result, args.out)
    print(open(f"{args.out}/report.txt").read())


if __name__ == "__main__":
    main()
