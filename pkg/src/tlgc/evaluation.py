"""Projection, classifiers (linear SVM, 1-NN) and accuracy metrics."""

from dataclasses import dataclass

import numpy as np

from .hsi_io import DimensionMismatchError


@dataclass
class ClassificationReport:
    oa: float
    aa: float
    kappa: float
    confusion: np.ndarray
    dim: int = None


@dataclass
class SvmModel:
    classes: np.ndarray
    # (n_classes, d + 1); the last column is the bias
    weights: np.ndarray
    center: np.ndarray
    C: float
    epochs: np.ndarray

    @property
    def bias(self):
        return self.weights[:, -1]


def project(ds, V):
    V = getattr(V, "V", V)
    if V.shape[0] != ds.n_features:
        raise DimensionMismatchError(f"projection has {V.shape[0]} rows, data has {ds.n_features} features")
    return ds.with_features(V.T @ ds.X)


def _dcd_binary(Z, y, C, tol, max_epochs):
    """Dual coordinate descent for the L1-loss linear SVM on augmented rows of Z."""
    n = Z.shape[0]
    alpha = np.zeros(n)
    w = np.zeros(Z.shape[1])
    Qii = np.einsum("ij,ij->i", Z, Z)
    for epoch in range(1, max_epochs + 1):
        worst = 0.0
        for i in range(n):
            g = y[i] * (w @ Z[i]) - 1.0
            a = alpha[i]
            if a == 0.0:
                pg = min(g, 0.0)
            elif a == C:
                pg = max(g, 0.0)
            else:
                pg = g
            worst = max(worst, abs(pg))
            if pg != 0.0:
                new = min(max(a - g / Qii[i], 0.0), C)
                w += (new - a) * y[i] * Z[i]
                alpha[i] = new
        if worst <= tol:
            break
    return w, epoch


def train_svm(train, C=1.0, tol=1e-4, max_epochs=1000):
    """One-vs-rest linear SVMs trained by deterministic dual coordinate descent.

    Features are centered on the training mean and augmented with a constant
    1 whose weight acts as the (regularized) bias.
    """
    classes = np.unique(train.labels)
    if classes.size < 2:
        raise ValueError("need at least two classes")
    center = train.X.mean(axis=1)
    Z = np.hstack([(train.X - center[:, None]).T, np.ones((train.n_samples, 1))])
    W, epochs = [], []
    for c in classes:
        y = np.where(train.labels == c, 1.0, -1.0)
        w, e = _dcd_binary(Z, y, C, tol, max_epochs)
        W.append(w)
        epochs.append(e)
    return SvmModel(classes, np.array(W), center, C, np.array(epochs))


def decision_values(model, ds):
    if ds.n_features != model.center.size:
        raise DimensionMismatchError(f"model expects {model.center.size} features, got {ds.n_features}")
    Xc = ds.X - model.center[:, None]
    return model.weights[:, :-1] @ Xc + model.bias[:, None]


def predict_svm(model, ds):
    # argmax keeps the first maximum: ties go to the smaller class id
    return model.classes[np.argmax(decision_values(model, ds), axis=0)]


def predict_1nn(train, test, chunk=2048):
    if train.n_samples == 0:
        raise ValueError("empty training set")
    if train.n_features != test.n_features:
        raise DimensionMismatchError("train and test feature dimensions differ")
    out = np.empty(test.n_samples, dtype=np.int64)
    for s in range(0, test.n_samples, chunk):
        T = test.X[:, s:s + chunk]
        d2 = ((train.X[:, :, None] - T[:, None, :]) ** 2).sum(axis=0)
        out[s:s + chunk] = train.labels[np.argmin(d2, axis=0)]
    return out


def confusion_matrix(true, pred, n_classes):
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (np.asarray(true) - 1, np.asarray(pred) - 1), 1)
    return counts


def score(confusion, dim=None):
    counts = np.asarray(confusion)
    total = counts.sum()
    if counts.size == 0 or total == 0:
        raise ValueError("empty confusion matrix")
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    oa = np.trace(counts) / total
    recall = np.divide(np.diag(counts), rows, out=np.zeros(len(rows)), where=rows > 0)
    aa = recall.mean()
    pe = (rows * cols).sum() / total ** 2
    if pe == 1.0:
        kappa = 1.0 if oa == 1.0 else 0.0
    else:
        kappa = (oa - pe) / (1.0 - pe)
    return ClassificationReport(float(oa), float(aa), float(kappa), counts, dim)


def classify(train, test, classifier="svm", svm_C=1.0):
    if classifier == "svm":
        return predict_svm(train_svm(train, svm_C), test)
    if classifier == "1nn":
        return predict_1nn(train, test)
    raise ValueError(f"unknown classifier {classifier!r}")
