"""Desk-scale synthetic HSI scenes.

Classes occupy square blocks of the image. Each class is Gaussian with a
class-specific mean on the informative bands. Nuisance bands copy an
informative band plus small independent noise, so they are strongly
correlated with it; white-noise bands carry no class information.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import rng as _rng
from .hsi_io import HsiCube, LabelMap


@dataclass(frozen=True)
class SyntheticSpec:
    height: int = 40
    width: int = 40
    n_classes: int = 4
    n_informative: int = 6
    n_nuisance: int = 14
    n_noise: int = 10
    # std of the class means on informative bands, in units of within-class std
    class_sep: float = 1.0
    # nuisance noise std as a fraction of the source band's std
    nuisance_noise: float = 0.3
    noise_std: float = 1.0
    block: int = 5
    # fraction of blocks left unlabeled (label 0)
    unlabeled_fraction: float = 0.0

    @property
    def bands(self):
        return self.n_informative + self.n_nuisance + self.n_noise

    def to_dict(self):
        return asdict(self)


def _block_labels(spec, gen):
    by = -(-spec.height // spec.block)
    bx = -(-spec.width // spec.block)
    n_blocks = by * bx
    n_unlabeled = int(round(spec.unlabeled_fraction * n_blocks))
    n_labeled = n_blocks - n_unlabeled
    if n_labeled < spec.n_classes:
        raise ValueError("too few blocks to place every class")
    ids = np.concatenate([np.arange(1, spec.n_classes + 1),
                          gen.integers(1, spec.n_classes + 1, size=n_labeled - spec.n_classes),
                          np.zeros(n_unlabeled, dtype=np.int64)])
    grid = gen.permutation(ids).reshape(by, bx)
    full = np.repeat(np.repeat(grid, spec.block, axis=0), spec.block, axis=1)
    return full[:spec.height, :spec.width]


def make_synthetic(spec=SyntheticSpec(), seed=0):
    if spec.n_informative < 1 and spec.n_nuisance > 0:
        raise ValueError("nuisance bands need at least one informative band")
    gen = _rng.stream(seed, _rng.SYNTH)
    labels = _block_labels(spec, gen)
    n_pix = spec.height * spec.width
    flat = labels.ravel()
    # unlabeled pixels get a random class's spectrum so the scene stays realistic
    spectral_class = np.where(flat > 0, flat, gen.integers(1, spec.n_classes + 1, size=n_pix))

    means = gen.normal(0.0, spec.class_sep, size=(spec.n_informative, spec.n_classes))
    info = means[:, spectral_class - 1] + gen.standard_normal((spec.n_informative, n_pix))
    src = np.arange(spec.n_nuisance) % max(spec.n_informative, 1)
    src_std = info.std(axis=1)
    nuis = info[src] + gen.standard_normal((spec.n_nuisance, n_pix)) * (spec.nuisance_noise * src_std[src])[:, None]
    noise = gen.normal(0.0, spec.noise_std, size=(spec.n_noise, n_pix))
    data = np.vstack([info, nuis, noise]).reshape(spec.bands, spec.height, spec.width)
    return HsiCube(data), LabelMap(labels)
