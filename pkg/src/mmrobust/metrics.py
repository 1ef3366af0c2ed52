"""Evaluation metrics and drop arithmetic for perturbation reports.

Predictions and gold labels are continuous sentiment intensities in
[-3, 3]. Binary metrics (F1, Acc-2) binarize both at zero: negative
vs non-negative, with exact zeros counting as non-negative. F1 is
support-weighted across the two classes and reported on a 0-100 scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UndefinedMetricError(ValueError):
    """Raised when a metric has no defined value for the given inputs."""


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise UndefinedMetricError(f"{name} is empty")
    return arr


def pearson_corr(pred, gold) -> float:
    """Pearson correlation between predictions and gold values."""
    p = _as_vector(pred, "pred")
    g = _as_vector(gold, "gold")
    if p.size != g.size:
        raise ValueError(f"length mismatch: pred has {p.size}, gold has {g.size}")
    if p.size < 2:
        raise UndefinedMetricError("correlation needs at least 2 samples")
    pc = p - p.mean()
    gc = g - g.mean()
    pss = float((pc * pc).sum())
    gss = float((gc * gc).sum())
    if pss == 0.0 or gss == 0.0:
        which = "pred" if pss == 0.0 else "gold"
        raise UndefinedMetricError(f"correlation undefined: {which} is constant")
    return float((pc * gc).sum() / np.sqrt(pss * gss))


def _binarize(x: np.ndarray) -> np.ndarray:
    # True = non-negative class, False = negative class
    return x >= 0.0


def binary_f1(pred, gold) -> float:
    """Support-weighted two-class F1 after binarizing at zero, in [0, 100]."""
    p = _binarize(_as_vector(pred, "pred"))
    g = _binarize(_as_vector(gold, "gold"))
    if p.size != g.size:
        raise ValueError(f"length mismatch: pred has {p.size}, gold has {g.size}")
    n = g.size
    total = 0.0
    for cls in (True, False):
        support = int((g == cls).sum())
        if support == 0:
            continue
        tp = int(((p == cls) & (g == cls)).sum())
        fp = int(((p == cls) & (g != cls)).sum())
        fn = support - tp
        if tp + fp == 0 or tp == 0:
            f1_c = 0.0
        else:
            precision = tp / (tp + fp)
            recall = tp / (tp + fn)
            f1_c = 2.0 * precision * recall / (precision + recall)
        total += (support / n) * f1_c
    return 100.0 * total


def mae_acc2(pred, gold) -> tuple[float, float]:
    """Mean absolute error and binary accuracy (0-100, same sign rule as F1)."""
    p = _as_vector(pred, "pred")
    g = _as_vector(gold, "gold")
    if p.size != g.size:
        raise ValueError(f"length mismatch: pred has {p.size}, gold has {g.size}")
    mae = float(np.abs(p - g).mean())
    acc2 = 100.0 * float((_binarize(p) == _binarize(g)).mean())
    return mae, acc2


METRIC_NAMES = ("corr", "f1", "acc2", "mae")

# drops are clean - perturbed, except MAE where lower is better
HIGHER_IS_BETTER = {"corr": True, "f1": True, "acc2": True, "mae": False}


@dataclass(frozen=True)
class MetricSet:
    """One evaluation: Corr, F1, Acc-2, MAE over n samples."""

    corr: float
    f1: float
    acc2: float
    mae: float
    n: int

    @classmethod
    def from_predictions(cls, pred, gold) -> "MetricSet":
        mae, acc2 = mae_acc2(pred, gold)
        return cls(
            corr=pearson_corr(pred, gold),
            f1=binary_f1(pred, gold),
            acc2=acc2,
            mae=mae,
            n=int(np.asarray(pred).size),
        )

    def value(self, metric: str) -> float:
        return getattr(self, metric)

    def as_dict(self) -> dict:
        return {m: self.value(m) for m in METRIC_NAMES}


@dataclass(frozen=True)
class DropReport:
    """Clean vs perturbed metrics plus the per-metric drop."""

    clean: MetricSet
    perturbed: MetricSet
    drop: dict

    def __post_init__(self):
        for m in METRIC_NAMES:
            expected = _drop_value(m, self.clean.value(m), self.perturbed.value(m))
            if abs(self.drop[m] - expected) > 1e-12:
                raise ValueError(f"inconsistent drop for {m}")


def _drop_value(metric: str, clean: float, perturbed: float) -> float:
    if HIGHER_IS_BETTER[metric]:
        return clean - perturbed
    return perturbed - clean


def compute_drop(clean: MetricSet, perturbed: MetricSet) -> DropReport:
    """Drop of each metric: clean - perturbed (perturbed - clean for MAE)."""
    drop = {m: _drop_value(m, clean.value(m), perturbed.value(m)) for m in METRIC_NAMES}
    return DropReport(clean=clean, perturbed=perturbed, drop=drop)


def relative_reduction(baseline_drop: float, robust_drop: float) -> float:
    """Percent of a baseline drop removed by robust training."""
    if baseline_drop == 0.0:
        raise UndefinedMetricError("relative reduction undefined for zero baseline drop")
    return 100.0 * (baseline_drop - robust_drop) / baseline_drop
