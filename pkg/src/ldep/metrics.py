"""Binary scores and the cross-run summary statistics used in result tables."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


class DegenerateF1Warning(UserWarning):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape or t.ndim != 1:
        raise InvalidArgument(f"length mismatch: {t.shape} vs {p.shape}")
    if t.size == 0:
        raise InvalidArgument("cannot score an empty prediction set")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == -1) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == -1)))
    return ConfusionMatrix(tp, fp, fn, t.size - tp - fp - fn)


def f1(cm: ConfusionMatrix) -> float:
    denom = 2 * cm.tp + cm.fp + cm.fn
    if denom == 0:
        warnings.warn("F1 undefined without positives; reporting 0", DegenerateF1Warning, stacklevel=2)
        return 0.0
    return 2 * cm.tp / denom


def accuracy(cm: ConfusionMatrix) -> float:
    # error-rate form, so accuracy == 1 - error holds bit for bit
    return 1.0 - (cm.fp + cm.fn) / cm.total


def aggregate(scores):
    """(mean, sample std, median, MAD about the median)."""
    s = np.asarray(list(scores), dtype=float)
    if s.size == 0:
        raise InvalidArgument("aggregate needs at least one score")
    s = np.sort(s)
    mean = float(np.mean(s))
    std = float(np.sqrt(np.sum((s - mean) ** 2) / max(1, s.size - 1)))
    med = float(np.median(s))
    mad = float(np.median(np.abs(s - med)))
    return mean, std, med, mad
