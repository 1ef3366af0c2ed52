"""Perturbation diagnostics on trained models.

A single check perturbs a seeded fraction of the test split for one
(modality, kind, proportion) and reports the metric drops against the
clean run. Sweeps grid over keys, multi-seed aggregation averages
whole sweeps, and compare() turns a standard/robust pair of aggregates
into relative drop reductions plus clean-performance deltas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .autodiff import ContractError
from .data import MODALITIES, Dataset
from .metrics import (
    METRIC_NAMES,
    DropReport,
    MetricSet,
    UndefinedMetricError,
    compute_drop,
    relative_reduction,
)
from .model import Intervention, Model, predict
from .perturb import (
    HookPoint,
    PerturbationKind,
    PerturbationPlan,
    balanced_split,
    sample_mask,
)
from .rng import Stream

DEFAULT_PROPORTIONS = (0.05, 0.10, 0.15, 0.30)
DEFAULT_SEEDS = (1, 2, 3)

# sweep keys are (modality, kind value, proportion) tuples
Key = tuple[str, str, float]


@dataclass(frozen=True)
class DiagnosticConfig:
    proportions: tuple[float, ...] = DEFAULT_PROPORTIONS
    kinds: tuple[PerturbationKind, ...] = (
        PerturbationKind.MISSING,
        PerturbationKind.NOISE,
    )
    modalities: tuple[str, ...] = ("language",)
    hook: HookPoint = HookPoint.POST_ENCODER
    seeds: tuple[int, ...] = DEFAULT_SEEDS

    def __post_init__(self):
        if not self.proportions or not self.kinds or not self.modalities or not self.seeds:
            raise ContractError("diagnostic config lists must be nonempty")
        if any(not 0.0 <= p <= 1.0 for p in self.proportions):
            raise ContractError(f"proportions must lie in [0, 1], got {self.proportions}")
        if any(m not in MODALITIES for m in self.modalities):
            raise ContractError(f"unknown modality in {self.modalities}")
        if any(k is PerturbationKind.BALANCED for k in self.kinds):
            raise ContractError("diagnostic kinds are missing and noise only")

    def keys(self) -> list[Key]:
        return [
            (m, k.value, p)
            for m in self.modalities
            for k in self.kinds
            for p in self.proportions
        ]


def _labels(dataset: Dataset, split: str) -> np.ndarray:
    return np.array([r.label for r in dataset.records(split)])


def clean_metrics(model: Model, dataset: Dataset) -> MetricSet:
    pred = predict(model, dataset, "test")
    return MetricSet.from_predictions(pred, _labels(dataset, "test"))


def _plan_interventions(plan: PerturbationPlan, dataset: Dataset) -> list[Intervention]:
    records = dataset.records("test")
    n = len(records)
    stream = Stream(plan.seed, "mask", plan.modality, plan.kind.value, plan.proportion)
    mask = sample_mask(list(range(n)), plan.proportion, stream)
    if plan.kind is PerturbationKind.BALANCED:
        missing_idx, noise_idx = balanced_split(mask, stream)
    elif plan.kind is PerturbationKind.MISSING:
        missing_idx, noise_idx = mask, []
    else:
        missing_idx, noise_idx = [], mask
    out = [
        Intervention(i, plan.modality, PerturbationKind.MISSING, plan.hook)
        for i in missing_idx
    ]
    out.extend(
        Intervention(
            i, plan.modality, PerturbationKind.NOISE, plan.hook,
            Stream(plan.seed, "noise", records[i].id),
        )
        for i in noise_idx
    )
    return out


def run_diagnostic(
    model: Model,
    dataset: Dataset,
    plan: PerturbationPlan,
    clean: MetricSet | None = None,
) -> DropReport:
    """Clean-vs-perturbed drops on the test split for one plan."""
    if not dataset.records("test"):
        raise ContractError("diagnostics need a nonempty test split")
    if clean is None:
        clean = clean_metrics(model, dataset)
    interventions = _plan_interventions(plan, dataset)
    if not interventions:
        return compute_drop(clean, clean)
    pred = predict(model, dataset, "test", interventions)
    perturbed = MetricSet.from_predictions(pred, _labels(dataset, "test"))
    return compute_drop(clean, perturbed)


def sweep(model: Model, dataset: Dataset, cfg: DiagnosticConfig, seed: int) -> dict[Key, DropReport]:
    """One run_diagnostic per (modality, kind, proportion), clean computed once."""
    clean = clean_metrics(model, dataset)
    out: dict[Key, DropReport] = {}
    for modality, kind_value, proportion in cfg.keys():
        plan = PerturbationPlan(
            modality=modality,
            kind=PerturbationKind(kind_value),
            proportion=proportion,
            hook=cfg.hook,
            seed=seed,
        )
        out[(modality, kind_value, proportion)] = run_diagnostic(model, dataset, plan, clean)
    return out


# ---------------------------------------------------------------------------
# multi-seed aggregation


@dataclass
class AggregateRow:
    perturbed_mean: dict[str, float]
    perturbed_std: dict[str, float]
    drop_mean: dict[str, float]
    drop_std: dict[str, float]


@dataclass
class AggregateReport:
    seeds: list[int]
    clean_mean: dict[str, float]
    clean_std: dict[str, float]
    rows: dict[Key, AggregateRow] = field(default_factory=dict)

    @property
    def n_seeds(self) -> int:
        return len(self.seeds)


def _mean_std(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def aggregate_seeds(sweeps: dict[int, dict[Key, DropReport]]) -> AggregateReport:
    """Mean and sample std over per-seed sweeps sharing one key set."""
    if not sweeps:
        raise ContractError("aggregate_seeds needs at least one sweep")
    seeds = list(sweeps)
    key_sets = [tuple(sorted(s.keys())) for s in sweeps.values()]
    if len(set(key_sets)) != 1:
        raise ContractError("sweeps disagree on their key sets")
    per_seed = [sweeps[s] for s in seeds]
    keys = list(per_seed[0].keys())

    def stats(reports, extract) -> tuple[dict[str, float], dict[str, float]]:
        means, stds = {}, {}
        for metric in METRIC_NAMES:
            means[metric], stds[metric] = _mean_std(
                [extract(report, metric) for report in reports]
            )
        return means, stds

    first = [s[keys[0]] for s in per_seed]
    clean_mean, clean_std = stats(first, lambda r, m: r.clean.value(m))
    out = AggregateReport(seeds=seeds, clean_mean=clean_mean, clean_std=clean_std)
    for key in keys:
        reports = [s[key] for s in per_seed]
        p_mean, p_std = stats(reports, lambda r, m: r.perturbed.value(m))
        d_mean, d_std = stats(reports, lambda r, m: r.drop[m])
        out.rows[key] = AggregateRow(
            perturbed_mean=p_mean, perturbed_std=p_std,
            drop_mean=d_mean, drop_std=d_std,
        )
    return out


# ---------------------------------------------------------------------------
# standard vs robust


@dataclass
class Comparison:
    """Per-key relative drop reductions (None when undefined) and clean deltas."""

    reductions: dict[Key, dict[str, float | None]]
    clean_delta: dict[str, float]


def compare(standard: AggregateReport, robust: AggregateReport) -> Comparison:
    if set(standard.rows) != set(robust.rows):
        raise ContractError("aggregate reports disagree on their key sets")
    reductions: dict[Key, dict[str, float | None]] = {}
    for key in standard.rows:
        per_metric: dict[str, float | None] = {}
        for metric in METRIC_NAMES:
            baseline = standard.rows[key].drop_mean[metric]
            treated = robust.rows[key].drop_mean[metric]
            try:
                per_metric[metric] = relative_reduction(baseline, treated)
            except UndefinedMetricError:
                per_metric[metric] = None
        reductions[key] = per_metric
    clean_delta = {
        m: robust.clean_mean[m] - standard.clean_mean[m] for m in METRIC_NAMES
    }
    return Comparison(reductions=reductions, clean_delta=clean_delta)
