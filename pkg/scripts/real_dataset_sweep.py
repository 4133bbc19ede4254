"""Dimension sweep on a real HSI scene stored as HSIC/HSIL containers.

Runs TL-L1GC with and without the guided filter next to the two baselines
and prints the best-dimension table. Converting public scenes (for example
the Botswana or Salinas .mat files) is a few lines with scipy.io:

    from scipy.io import loadmat
    from tlgc.hsi_io import HsiCube, LabelMap, save_cube, save_labels
    save_cube(HsiCube.from_hwd(loadmat("Botswana.mat")["Botswana"]), "botswana.hsic")
    save_labels(LabelMap(loadmat("Botswana_gt.mat")["Botswana_gt"]), "botswana.hsil")

    python3 scripts/real_dataset_sweep.py botswana.hsic botswana.hsil --out results/botswana
"""

import argparse
from pathlib import Path

from tlgc.experiment import ExperimentConfig, format_report, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("cube")
    parser.add_argument("labels")
    parser.add_argument("--dims", type=int, nargs="+", default=list(range(4, 61, 2)))
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--out", default="results/real")
    args = parser.parse_args()

    for use_filter in (False, True):
        tag = "filter" if use_filter else "raw"
        cfg = ExperimentConfig(cube_path=args.cube, label_path=args.labels, dims=args.dims, trials=args.trials,
                               seed=args.seed, use_filter=use_filter, output_dir=str(Path(args.out) / tag))
        result = run_experiment(cfg)
        print(f"== {tag} ==")
        print(format_report(result))


if __name__ == "__main__":
    main()
