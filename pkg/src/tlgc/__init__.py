"""Trace-lasso regularized L1-norm graph-cut dimensionality reduction for HSI."""

from .baseline_sc import SCConfig, fit_sc
from .dispersion import build_dispersions, build_scatter
from .evaluation import classify, confusion_matrix, score
from .experiment import ExperimentConfig, run_experiment
from .hsi_io import HsiCube, LabelMap, LabeledDataset, load_cube, load_labels, save_cube, save_labels
from .synthetic import SyntheticSpec, make_synthetic
from .tl_solver import ProjectionMatrix, SolverConfig, fit

__version__ = "0.1.0"
