"""HSI cubes, label maps and labeled sample matrices.

On-disk containers
------------------
Both containers are a single compact JSON header line terminated by ``\\n``
followed immediately by the raw payload.

* HSIC v1 (cube):  ``{"magic":"HSIC","version":1,"height":H,"width":W,
  "bands":D,"dtype":"f64","layout":"BSQ"}`` then H*W*D little-endian
  float64 values, band-major, pixels row-major inside each band.
* HSIL v1 (labels): same keys with ``"magic":"HSIL"``, ``"bands":1`` and
  ``"dtype":"u16"``, then H*W little-endian uint16 labels (0 = unlabeled).
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as _rng

CUBE_MAGIC = "HSIC"
LABEL_MAGIC = "HSIL"
VERSION = 1


class HsiFormatError(ValueError):
    """Base class for container load failures."""


class MalformedHeaderError(HsiFormatError):
    pass


class TruncatedPayloadError(HsiFormatError):
    pass


class TrailingDataError(HsiFormatError):
    pass


class NonFiniteValueError(HsiFormatError):
    pass


class DimensionMismatchError(ValueError):
    pass


class NonContiguousClassesError(ValueError):
    pass


class InsufficientSamplesError(ValueError):
    pass


@dataclass
class HsiCube:
    """Reflectance cube stored band-sequential: ``data.shape == (bands, height, width)``."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or min(self.data.shape) < 1:
            raise ValueError(f"cube data must be a nonempty 3-D array, got shape {self.data.shape}")

    @property
    def bands(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    @classmethod
    def from_hwd(cls, array):
        """Build from an image-ordered (height, width, bands) array."""
        return cls(np.moveaxis(np.asarray(array, dtype=np.float64), -1, 0))

    def pixels(self):
        """Spectra as a (bands, height*width) matrix, pixels in row-major order."""
        return self.data.reshape(self.bands, -1)


@dataclass
class LabelMap:
    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2 or min(self.labels.shape) < 1:
            raise ValueError(f"label map must be a nonempty 2-D array, got shape {self.labels.shape}")
        if self.labels.min() < 0 or self.labels.max() > np.iinfo(np.uint16).max:
            raise ValueError("labels must fit in uint16")
        self.labels = self.labels.astype(np.int64)

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    @property
    def n_classes(self):
        return int(self.labels.max())


@dataclass
class LabeledDataset:
    """Samples as columns: ``X`` is (D, n), ``labels`` holds ids in 1..C.

    ``index`` records each column's position in the dataset it was drawn
    from (pixel order for extracted datasets), so splits can be audited.
    """

    X: np.ndarray
    labels: np.ndarray
    index: np.ndarray = None
    n_classes: int = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim == 1:
            self.X = self.X[None, :]
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.X.shape[1] != self.labels.size:
            raise DimensionMismatchError(
                f"{self.X.shape[1]} sample columns but {self.labels.size} labels"
            )
        if self.labels.size and self.labels.min() < 1:
            raise ValueError("class labels must be >= 1")
        if self.index is None:
            self.index = np.arange(self.labels.size)
        self.index = np.asarray(self.index, dtype=np.int64)
        if self.n_classes is None:
            self.n_classes = int(self.labels.max()) if self.labels.size else 0

    @property
    def n_features(self):
        return self.X.shape[0]

    @property
    def n_samples(self):
        return self.X.shape[1]

    @property
    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes + 1)[1:]

    def subset(self, cols):
        cols = np.asarray(cols, dtype=np.int64)
        return LabeledDataset(self.X[:, cols], self.labels[cols], self.index[cols], self.n_classes)

    def with_features(self, X):
        return LabeledDataset(X, self.labels, self.index, self.n_classes)


@dataclass(frozen=True)
class SplitSpec:
    samples_per_class: int = 10
    seed: int = 0


@dataclass
class Scaler:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, ds):
        return ds.with_features((ds.X - self.mean[:, None]) / self.scale[:, None])


# -- containers -------------------------------------------------------------

def _header_bytes(magic, height, width, bands, dtype):
    header = {
        "magic": magic,
        "version": VERSION,
        "height": int(height),
        "width": int(width),
        "bands": int(bands),
        "dtype": dtype,
        "layout": "BSQ",
    }
    return json.dumps(header, separators=(",", ":")).encode("ascii") + b"\n"


def _read_container(path, magic, dtype):
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise MalformedHeaderError(f"{path}: no header line")
    try:
        header = json.loads(raw[:nl].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedHeaderError(f"{path}: header is not JSON ({exc})") from None
    if not isinstance(header, dict):
        raise MalformedHeaderError(f"{path}: header is not a JSON object")
    if header.get("magic") != magic:
        raise MalformedHeaderError(f"{path}: magic {header.get('magic')!r}, expected {magic!r}")
    if header.get("version") != VERSION:
        raise MalformedHeaderError(f"{path}: unsupported version {header.get('version')!r}")
    if header.get("dtype") != dtype:
        raise MalformedHeaderError(f"{path}: dtype {header.get('dtype')!r}, expected {dtype!r}")
    if header.get("layout", "BSQ") != "BSQ":
        raise MalformedHeaderError(f"{path}: unsupported layout {header.get('layout')!r}")
    dims = []
    for key in ("height", "width", "bands"):
        value = header.get(key, 1 if key == "bands" and magic == LABEL_MAGIC else None)
        if type(value) is not int or value < 1:
            raise MalformedHeaderError(f"{path}: {key} must be a positive integer, got {value!r}")
        dims.append(value)
    height, width, bands = dims
    if magic == LABEL_MAGIC and bands != 1:
        raise MalformedHeaderError(f"{path}: label maps have exactly one band")

    np_dtype = np.dtype("<f8") if dtype == "f64" else np.dtype("<u2")
    expected = height * width * bands * np_dtype.itemsize
    payload = raw[nl + 1:]
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {len(payload)} bytes, header requires {expected}"
        )
    if len(payload) > expected:
        raise TrailingDataError(
            f"{path}: {len(payload) - expected} bytes after the declared payload"
        )
    values = np.frombuffer(payload, dtype=np_dtype)
    return values, (bands, height, width)


def save_cube(cube, path):
    data = np.ascontiguousarray(cube.data, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_header_bytes(CUBE_MAGIC, cube.height, cube.width, cube.bands, "f64"))
        fh.write(data.tobytes())


def load_cube(path):
    values, shape = _read_container(path, CUBE_MAGIC, "f64")
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NonFiniteValueError(f"{path}: non-finite value at payload offset {bad}")
    return HsiCube(values.astype(np.float64).reshape(shape))


def save_labels(labels, path):
    data = np.ascontiguousarray(labels.labels, dtype="<u2")
    with open(path, "wb") as fh:
        fh.write(_header_bytes(LABEL_MAGIC, labels.height, labels.width, 1, "u16"))
        fh.write(data.tobytes())


def load_labels(path):
    values, (_, height, width) = _read_container(path, LABEL_MAGIC, "u16")
    return LabelMap(values.astype(np.int64).reshape(height, width))


# -- datasets ---------------------------------------------------------------

def check_classes(labels):
    """Return C after checking labeled ids form exactly 1..C."""
    present = np.unique(labels[labels != 0])
    if present.size == 0:
        raise NonContiguousClassesError("no labeled samples")
    C = int(present[-1])
    if present.size != C or present[0] != 1:
        missing = sorted(set(range(1, C + 1)) - set(present.tolist()))
        raise NonContiguousClassesError(f"class ids must be 1..{C}; missing {missing}")
    return C


def extract_dataset(cube, labels):
    if (cube.height, cube.width) != (labels.height, labels.width):
        raise DimensionMismatchError(
            f"cube is {cube.height}x{cube.width}, labels are {labels.height}x{labels.width}"
        )
    flat = labels.labels.ravel()
    C = check_classes(flat)
    pix = np.flatnonzero(flat)
    return LabeledDataset(cube.pixels()[:, pix], flat[pix], pix, C)


def split_train_test(ds, spec):
    counts = ds.class_counts
    k = int(spec.samples_per_class)
    if k < 1:
        raise ValueError("samples_per_class must be positive")
    short = [c + 1 for c, n in enumerate(counts) if n < k]
    if short:
        raise InsufficientSamplesError(
            f"classes {short} have fewer than {k} samples (counts {counts.tolist()})"
        )
    if counts.sum() == k * ds.n_classes:
        raise InsufficientSamplesError("split leaves an empty test set")
    gen = _rng.stream(spec.seed, _rng.SPLIT)
    train = []
    for c in range(1, ds.n_classes + 1):
        members = np.flatnonzero(ds.labels == c)
        train.append(np.sort(gen.choice(members, size=k, replace=False)))
    train = np.concatenate(train)
    test = np.setdiff1d(np.arange(ds.n_samples), train)
    return ds.subset(train), ds.subset(test)


def standardize(train, test):
    if train.n_samples == 0:
        raise ValueError("cannot standardize with an empty training set")
    mean = train.X.mean(axis=1)
    std = train.X.std(axis=1)
    # rounding leaves a tiny nonzero std on constant bands; treat those as constant
    constant = std <= 1e-12 * np.abs(train.X).max(axis=1)
    scale = np.where(constant, 1.0, std)
    scaler = Scaler(mean, scale)
    return scaler.transform(train), scaler.transform(test), scaler


def inject_noise(cube, percent, seed):
    """Add zero-mean Gaussian noise with variance ``percent``% of each band's variance."""
    if percent < 0:
        raise ValueError("noise percent must be nonnegative")
    out = cube.data.copy()
    if percent == 0:
        return HsiCube(out)
    for b in range(cube.bands):
        var = cube.data[b].var()
        if var == 0:
            continue
        gen = _rng.stream(seed, _rng.NOISE, b)
        out[b] += gen.normal(0.0, np.sqrt(percent / 100.0 * var), size=out[b].shape)
    return HsiCube(out)
