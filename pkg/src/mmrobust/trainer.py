"""Mini-batch MSE training, standard or with modality perturbations.

Robust mode draws a fresh mask of floor(p * batch) samples every batch
of every epoch, splits it between missing and noise when balanced, and
applies those interventions inside the forward pass. The loss and the
update rule stay untouched, so p = 0 degenerates to standard training
bit for bit. Checkpoints keep the best-validation-MAE parameters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import ContractError, Tape, Tensor
from .data import Dataset, batches, stack_features
from .model import Intervention, Model, save_checkpoint
from .perturb import (
    HookPoint,
    PerturbationKind,
    balanced_split,
    sample_mask,
)
from .rng import Stream


class TrainingError(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class Optimizer:
    kind: str
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ContractError(f"unknown optimizer: {self.kind!r}")
        if self.lr < 0:
            raise ContractError(f"learning rate must be >= 0, got {self.lr}")

    def as_dict(self) -> dict:
        d = {"kind": self.kind, "lr": self.lr}
        if self.kind == "adam":
            d.update(beta1=self.beta1, beta2=self.beta2, eps=self.eps)
        return d


@dataclass(frozen=True)
class RobustSpec:
    """Perturbation schedule for robust training."""

    proportion: float
    modality: str = "language"
    kind: PerturbationKind = PerturbationKind.BALANCED
    hook: HookPoint = HookPoint.POST_ENCODER

    def __post_init__(self):
        if not 0.0 <= self.proportion <= 1.0:
            raise ContractError(f"proportion must lie in [0, 1], got {self.proportion}")

    def as_dict(self) -> dict:
        return {
            "proportion": self.proportion,
            "modality": self.modality,
            "kind": self.kind.value,
            "hook": self.hook.value,
        }


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int
    optimizer: Optimizer
    seed: int = 0
    robust: RobustSpec | None = None
    patience: int = 0  # 0 disables early stopping

    def __post_init__(self):
        if self.epochs < 1:
            raise ContractError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ContractError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 0:
            raise ContractError(f"patience must be >= 0, got {self.patience}")

    def as_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "optimizer": self.optimizer.as_dict(),
            "seed": self.seed,
            "robust": self.robust.as_dict() if self.robust else None,
            "patience": self.patience,
        }


@dataclass
class RunArtifacts:
    model: Model
    trace: list[tuple[int, float, float]]  # (epoch, train_mse, valid_mae)
    config: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# optimizer steps


def init_optimizer_state(params: list[Tensor]) -> dict:
    return {
        "t": 0,
        "m": [np.zeros_like(p.data) for p in params],
        "v": [np.zeros_like(p.data) for p in params],
    }


def optimizer_step(params: list[Tensor], grads, state: dict, opt: Optimizer) -> None:
    if len(grads) != len(params):
        raise ContractError(f"{len(grads)} grads for {len(params)} params")
    for p, g in zip(params, grads):
        if g.shape != p.data.shape:
            raise ContractError(f"grad shape {g.shape} != param shape {p.data.shape}")
    if opt.kind == "sgd":
        for p, g in zip(params, grads):
            p.data -= opt.lr * g
        return
    state["t"] += 1
    t = state["t"]
    for i, (p, g) in enumerate(zip(params, grads)):
        state["m"][i] = opt.beta1 * state["m"][i] + (1.0 - opt.beta1) * g
        state["v"][i] = opt.beta2 * state["v"][i] + (1.0 - opt.beta2) * g * g
        m_hat = state["m"][i] / (1.0 - opt.beta1**t)
        v_hat = state["v"][i] / (1.0 - opt.beta2**t)
        p.data -= opt.lr * m_hat / (np.sqrt(v_hat) + opt.eps)


# ---------------------------------------------------------------------------
# robust-batch interventions


def robust_interventions(spec: RobustSpec, batch_size: int, stream: Stream):
    """Fresh per-batch interventions: mask, balanced split, shared noise stream."""
    mask = sample_mask(list(range(batch_size)), spec.proportion, stream)
    if spec.kind is PerturbationKind.BALANCED:
        missing_idx, noise_idx = balanced_split(mask, stream)
    elif spec.kind is PerturbationKind.MISSING:
        missing_idx, noise_idx = mask, []
    else:
        missing_idx, noise_idx = [], mask
    out = [
        Intervention(i, spec.modality, PerturbationKind.MISSING, spec.hook)
        for i in missing_idx
    ]
    out.extend(
        Intervention(i, spec.modality, PerturbationKind.NOISE, spec.hook, stream)
        for i in noise_idx
    )
    return out


# ---------------------------------------------------------------------------
# training loop


def _valid_mae(model: Model, dataset: Dataset) -> float:
    from .model import predict

    records = dataset.records("valid")
    pred = predict(model, dataset, "valid")
    gold = np.array([r.label for r in records])
    return float(np.abs(pred - gold).mean())


def _train(model: Model, dataset: Dataset, cfg: TrainConfig) -> RunArtifacts:
    if not dataset.records("train") or not dataset.records("valid"):
        raise ContractError("training needs nonempty train and valid splits")
    params = model.parameters()
    state = init_optimizer_state(params)
    trace: list[tuple[int, float, float]] = []
    best_mae = math.inf
    best_params = [p.data.copy() for p in params]
    since_best = 0
    for epoch in range(cfg.epochs):
        total_sq = 0.0
        total_n = 0
        for batch_idx, batch in enumerate(
            batches(dataset, "train", cfg.batch_size, cfg.seed, epoch)
        ):
            interventions = ()
            if cfg.robust is not None:
                stream = Stream(cfg.seed, "robust", epoch, batch_idx)
                interventions = robust_interventions(cfg.robust, len(batch), stream)
            tape = Tape()
            pred = model.forward(batch, interventions, tape)
            _, _, _, labels = stack_features(batch)
            err = ad.sub(pred, Tensor(len(batch), 1, labels), tape)
            loss = ad.mean_all(ad.mul(err, err, tape), tape)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            model.zero_grads()
            ad.backward(loss, tape)
            optimizer_step(params, [p.grad for p in params], state, cfg.optimizer)
            total_sq += value * len(batch)
            total_n += len(batch)
        valid_mae = _valid_mae(model, dataset)
        trace.append((epoch, total_sq / total_n, valid_mae))
        if valid_mae < best_mae:
            best_mae = valid_mae
            best_params = [p.data.copy() for p in params]
            since_best = 0
        else:
            since_best += 1
            if cfg.patience > 0 and since_best >= cfg.patience:
                break
    for p, snapshot in zip(params, best_params):
        p.data[:, :] = snapshot
    return RunArtifacts(
        model=model,
        trace=trace,
        config={"model": model.config.as_dict(), "train": cfg.as_dict()},
    )


def train_standard(model: Model, dataset: Dataset, cfg: TrainConfig) -> RunArtifacts:
    if cfg.robust is not None:
        raise ContractError("train_standard got a robust spec; use train_robust")
    return _train(model, dataset, cfg)


def train_robust(model: Model, dataset: Dataset, cfg: TrainConfig) -> RunArtifacts:
    if cfg.robust is None:
        raise ContractError("train_robust needs cfg.robust")
    return _train(model, dataset, cfg)


# ---------------------------------------------------------------------------
# artifact files


def write_artifacts(artifacts: RunArtifacts, out_dir) -> None:
    """Write checkpoint.json, config.json, and loss_trace.csv into out_dir."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    save_checkpoint(artifacts.model, os.path.join(out_dir, "checkpoint.json"))
    with open(os.path.join(out_dir, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(artifacts.config, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "loss_trace.csv"), "w", encoding="utf-8") as fh:
        fh.write("epoch,train_mse,valid_mae\n")
        for epoch, train_mse, valid_mae in artifacts.trace:
            fh.write(f"{epoch},{train_mse!r},{valid_mae!r}\n")
