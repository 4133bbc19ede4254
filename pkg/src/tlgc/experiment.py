"""Multi-trial experiment runner and report writer.

Pipeline per trial and noise level:
load -> inject noise -> guided filter (optional) -> extract labeled pixels
-> per-class split -> standardize -> fit each DR method once at max(dims)
-> project onto the leading ``dim`` directions -> classify -> score.

All methods in a trial share one split. Directions are extracted greedily,
so the leading ``dim`` columns of a max(dims) fit equal a fit at ``dim``.
"""

import csv
import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import rng as _rng
from .baseline_sc import SCConfig, fit_sc
from .evaluation import classify, confusion_matrix, project, score
from .guided_filter import GuidedFilterParams, compute_guide, guided_filter
from .hsi_io import (SplitSpec, extract_dataset, inject_noise, load_cube, load_labels,
                     split_train_test, standardize)
from .tl_solver import SolverConfig, fit

METHODS = ("tl_l1gc", "l1gc", "sc_l2")
CLASSIFIERS = ("svm", "1nn")
TRIAL_FIELDS = ("method", "noise_percent", "dim", "trial", "oa", "aa", "kappa", "n_train", "n_test")
SUMMARY_FIELDS = ("method", "noise_percent", "dim", "trials",
                  "oa_mean", "oa_std", "aa_mean", "aa_std", "kappa_mean", "kappa_std")


class PipelineError(RuntimeError):
    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class ExperimentConfig:
    cube_path: str = None
    label_path: str = None
    methods: list = field(default_factory=lambda: list(METHODS))
    use_filter: bool = False
    filter_radius: int = 4
    filter_epsilon: float = 0.01
    samples_per_class: int = 10
    trials: int = 5
    dims: list = field(default_factory=lambda: list(range(4, 61, 2)))
    delta: float = 0.4
    noise_percents: list = field(default_factory=lambda: [0.0])
    classifier: str = "svm"
    svm_C: float = 1.0
    seed: int = 0
    output_dir: str = "results"
    # solver knobs
    n_starts: int = 5
    s_refresh: str = "iteration"
    update: str = "sphere"
    tol: float = 1e-6
    max_inner_iters: int = 50
    sc_pca_rank: int = None

    def __post_init__(self):
        if isinstance(self.methods, str):
            self.methods = [m.strip() for m in self.methods.split(",") if m.strip()]
        self.methods = list(self.methods)
        self.dims = [int(d) for d in self.dims]
        self.noise_percents = [float(p) for p in self.noise_percents]

    def validate(self):
        if self.cube_path is None or self.label_path is None:
            raise ValueError("cube_path and label_path are required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValueError(f"methods must be drawn from {METHODS}, got {self.methods}")
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"classifier must be one of {CLASSIFIERS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.dims or min(self.dims) < 1:
            raise ValueError("dims must be a nonempty list of positive integers")
        if not self.noise_percents or any(not 0 <= p <= 100 for p in self.noise_percents):
            raise ValueError("noise percents must lie in [0, 100]")
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be >= 1")

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        if "method" in raw:
            # single-method shorthand; "a,b" lists are accepted too
            if "methods" in raw:
                raise ValueError("give either method or methods, not both")
            raw["methods"] = raw.pop("method")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    summary: list
    timings: dict


def _solver_config(cfg, method, dim, seed):
    return SolverConfig(delta=cfg.delta if method == "tl_l1gc" else 0.0, target_dim=dim, seed=seed,
                        n_starts=cfg.n_starts, s_refresh=cfg.s_refresh, update=cfg.update,
                        tol=cfg.tol, max_inner_iters=cfg.max_inner_iters)


def fit_method(method, train, dim, cfg, seed):
    if method == "sc_l2":
        return fit_sc(train, SCConfig(target_dim=dim, pca_rank=cfg.sc_pca_rank))
    return fit(train, _solver_config(cfg, method, dim, seed))


def summarize(records, keys=("method", "noise_percent", "dim")):
    groups = {}
    for rec in records:
        groups.setdefault(tuple(rec[k] for k in keys), []).append(rec)
    out = []
    for key, recs in groups.items():
        row = dict(zip(keys, key))
        row["trials"] = len(recs)
        for metric in ("oa", "aa", "kappa"):
            vals = np.array([r[metric] for r in recs])
            row[f"{metric}_mean"] = float(vals.mean())
            row[f"{metric}_std"] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        out.append(row)
    return out


def run_experiment(cfg, cube=None, labels=None, write=True):
    """Run the configured protocol. ``cube``/``labels`` bypass file loading."""
    timings = {}

    @contextmanager
    def stage(name):
        t0 = time.perf_counter()
        try:
            yield
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, f"{type(exc).__name__}: {exc}") from exc
        finally:
            timings[name] = timings.get(name, 0.0) + time.perf_counter() - t0

    with stage("config"):
        if cube is None or labels is None:
            cfg.validate()
        else:
            probe = ExperimentConfig.from_dict({**cfg.to_dict(), "cube_path": "-", "label_path": "-"})
            probe.validate()
    with stage("load"):
        if cube is None:
            cube = load_cube(cfg.cube_path)
        if labels is None:
            labels = load_labels(cfg.label_path)
    with stage("config"):
        if max(cfg.dims) > cube.bands:
            raise ValueError(f"dims up to {max(cfg.dims)} exceed the {cube.bands} bands")

    max_dim = max(cfg.dims)
    records = []
    for t in range(cfg.trials):
        split_seed = _rng.derive_seed(cfg.seed, _rng.TRIAL, t, 0)
        solver_seed = _rng.derive_seed(cfg.seed, _rng.TRIAL, t, 1)
        for p_idx, percent in enumerate(cfg.noise_percents):
            with stage("noise"):
                noisy = inject_noise(cube, percent, _rng.derive_seed(cfg.seed, _rng.NOISE, t, p_idx))
            if cfg.use_filter:
                with stage("filter"):
                    noisy = guided_filter(noisy, compute_guide(noisy),
                                          GuidedFilterParams(cfg.filter_radius, cfg.filter_epsilon))
            with stage("extract"):
                ds = extract_dataset(noisy, labels)
            with stage("split"):
                train, test = split_train_test(ds, SplitSpec(cfg.samples_per_class, split_seed))
                train, test, _ = standardize(train, test)
            for method in cfg.methods:
                with stage(f"fit:{method}"):
                    V = fit_method(method, train, max_dim, cfg, solver_seed)
                for dim in cfg.dims:
                    with stage("classify"):
                        Vd = V.V[:, :dim]
                        pred = classify(project(train, Vd), project(test, Vd), cfg.classifier, cfg.svm_C)
                        rep = score(confusion_matrix(test.labels, pred, ds.n_classes), dim)
                    records.append({"method": method, "noise_percent": percent, "dim": dim, "trial": t,
                                    "oa": rep.oa, "aa": rep.aa, "kappa": rep.kappa,
                                    "n_train": train.n_samples, "n_test": test.n_samples})
    result = ExperimentResult(cfg, records, summarize(records), timings)
    if write:
        emit_report(result, cfg.output_dir)
    return result


def _best_rows(summary):
    best = {}
    for row in summary:
        key = (row["noise_percent"], row["method"])
        if key not in best or row["oa_mean"] > best[key]["oa_mean"]:
            best[key] = row
    return best


def format_report(result):
    cfg = result.config
    pct = lambda x: f"{100 * x:6.2f}"
    lines = [f"classifier={cfg.classifier} trials={cfg.trials} samples_per_class={cfg.samples_per_class} "
             f"delta={cfg.delta} filter={'on' if cfg.use_filter else 'off'} seed={cfg.seed}", ""]
    best = _best_rows(result.summary)
    for percent in cfg.noise_percents:
        lines.append(f"noise {percent:g}% -- best dimension per method (mean over trials, %)")
        lines.append(f"{'method':<10} {'OA':>6} {'AA':>6} {'k':>6} {'dim':>4}")
        for method in cfg.methods:
            row = best[(percent, method)]
            lines.append(f"{method:<10} {pct(row['oa_mean'])} {pct(row['aa_mean'])} "
                         f"{pct(row['kappa_mean'])} {row['dim']:>4d}")
        lines.append("")
    lines.append("full sweep: method noise dim OA+-std AA+-std k+-std (%)")
    for row in result.summary:
        lines.append(f"{row['method']:<10} {row['noise_percent']:>6g} {row['dim']:>4d} "
                     f"{pct(row['oa_mean'])}+-{100 * row['oa_std']:.2f} "
                     f"{pct(row['aa_mean'])}+-{100 * row['aa_std']:.2f} "
                     f"{pct(row['kappa_mean'])}+-{100 * row['kappa_std']:.2f}")
    return "\n".join(lines) + "\n"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in header])


def emit_report(result, out_dir):
    """Write report.txt, trials.csv, summary.csv, config.resolved.json, timings.json.

    Everything except timings.json is a deterministic function of the config.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(format_report(result))
    _write_csv(out / "trials.csv", TRIAL_FIELDS, result.records)
    _write_csv(out / "summary.csv", SUMMARY_FIELDS, result.summary)
    (out / "config.resolved.json").write_text(json.dumps(result.config.to_dict(), indent=2, sort_keys=True) + "\n")
    (out / "timings.json").write_text(json.dumps(result.timings, indent=2, sort_keys=True) + "\n")
