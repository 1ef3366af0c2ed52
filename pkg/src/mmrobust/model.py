"""Three-encoder fusion regressors with representation intervention hooks.

Each modality runs through its own tanh MLP encoder into a shared
hidden width, the three codes are concatenated, and a small fusion head
produces one scalar per sample. Interventions replace designated rows
of a representation, either on the raw features (PRE_ENCODER) or on
the encoded vectors (POST_ENCODER), inside the differentiable graph:
noise rows keep their gradients, zeroed rows block them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import ContractError, Tape, Tensor
from .data import MODALITIES, Dataset, FeatureRecord, stack_features
from .perturb import APPLY_KINDS, HookPoint, PerturbationKind
from .rng import Stream


@dataclass(frozen=True)
class ModelConfig:
    dims: tuple[int, int, int]
    hidden_dim: int
    encoder_layers: int = 2
    fusion: str = "concat_mlp"
    init_seed: int = 0

    def __post_init__(self):
        if any(d < 1 for d in self.dims):
            raise ContractError(f"dims must be >= 1, got {self.dims}")
        if self.hidden_dim < 1:
            raise ContractError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.encoder_layers < 1:
            raise ContractError(f"encoder_layers must be >= 1, got {self.encoder_layers}")
        if self.fusion != "concat_mlp":
            raise ContractError(f"unsupported fusion: {self.fusion!r}")

    def as_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "hidden_dim": self.hidden_dim,
            "encoder_layers": self.encoder_layers,
            "fusion": self.fusion,
            "init_seed": self.init_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            dims=tuple(d["dims"]),
            hidden_dim=int(d["hidden_dim"]),
            encoder_layers=int(d["encoder_layers"]),
            fusion=str(d["fusion"]),
            init_seed=int(d["init_seed"]),
        )


@dataclass(frozen=True)
class Intervention:
    """Replace one sample's representation for one modality at one hook.

    Noise interventions consume their stream during the forward pass;
    build fresh interventions (fresh streams) for every forward call.
    """

    sample_index: int
    modality: str
    kind: PerturbationKind
    hook: HookPoint = HookPoint.POST_ENCODER
    stream: Stream | None = None

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ContractError(f"unknown modality: {self.modality!r}")
        if self.kind not in APPLY_KINDS:
            raise ContractError(f"interventions need missing or noise, got {self.kind!r}")
        if self.kind is PerturbationKind.NOISE and self.stream is None:
            raise ContractError("noise interventions need a stream")


class Model:
    """Per-modality encoders plus a concat-MLP fusion head."""

    def __init__(self, config: ModelConfig):
        self.config = config
        h = config.hidden_dim
        stream = Stream(config.init_seed, "init")
        self.encoders: dict[str, list[tuple[Tensor, Tensor]]] = {}
        for modality, d in zip(MODALITIES, config.dims):
            layers = []
            fan_in = d
            for _ in range(config.encoder_layers):
                layers.append(self._init_layer(stream, fan_in, h))
                fan_in = h
            self.encoders[modality] = layers
        self.fusion_layer = self._init_layer(stream, 3 * h, h)
        self.output_layer = self._init_layer(stream, h, 1)

    @staticmethod
    def _init_layer(stream: Stream, fan_in: int, fan_out: int) -> tuple[Tensor, Tensor]:
        bound = 1.0 / np.sqrt(fan_in)
        w = Tensor(fan_in, fan_out,
                   [stream.uniform(-bound, bound) for _ in range(fan_in * fan_out)])
        b = Tensor(1, fan_out, [stream.uniform(-bound, bound) for _ in range(fan_out)])
        return w, b

    def parameters(self) -> list[Tensor]:
        """Canonical order: encoders by modality then layer (w, b each), fusion, output."""
        params = []
        for modality in MODALITIES:
            for w, b in self.encoders[modality]:
                params.extend((w, b))
        params.extend(self.fusion_layer)
        params.extend(self.output_layer)
        return params

    def zero_grads(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    # -- interventions ----------------------------------------------------

    @staticmethod
    def _intervene(x: Tensor, hits: list[Intervention], tape: Tape | None) -> Tensor:
        """Apply missing/noise rows to one representation tensor."""
        missing_rows = [iv.sample_index for iv in hits if iv.kind is PerturbationKind.MISSING]
        noise_hits = [iv for iv in hits if iv.kind is PerturbationKind.NOISE]
        if missing_rows:
            keep = np.ones((x.rows, x.cols))
            keep[missing_rows, :] = 0.0
            x = ad.hadamard_const(x, keep, tape)
        if noise_hits:
            z = np.zeros((x.rows, x.cols))
            for iv in noise_hits:
                z[iv.sample_index, :] += np.array(iv.stream.normals(x.cols))
            x = ad.add_const(x, z, tape)
        return x

    @staticmethod
    def _group_interventions(interventions, n_rows: int):
        by_key: dict[tuple[HookPoint, str], list[Intervention]] = {}
        for iv in interventions:
            if not 0 <= iv.sample_index < n_rows:
                raise ContractError(
                    f"intervention index {iv.sample_index} outside batch of {n_rows}"
                )
            by_key.setdefault((iv.hook, iv.modality), []).append(iv)
        return by_key

    # -- forward ----------------------------------------------------------

    def forward(self, batch: list[FeatureRecord], interventions=(), tape: Tape | None = None):
        """Predictions for a batch as an (n, 1) tensor.

        Pass a tape to record the graph for backward; without one this
        is pure inference.
        """
        if not batch:
            raise ContractError("forward needs a nonempty batch")
        lang, audio, visual, _ = stack_features(batch)
        raw = {"language": lang, "audio": audio, "visual": visual}
        hooks = self._group_interventions(interventions, len(batch))
        codes = []
        for modality in MODALITIES:
            x = Tensor(len(batch), raw[modality].shape[1], raw[modality])
            pre = hooks.get((HookPoint.PRE_ENCODER, modality))
            if pre:
                x = self._intervene(x, pre, tape)
            for w, b in self.encoders[modality]:
                x = ad.activation(ad.add(ad.matmul(x, w, tape), b, tape), "tanh", tape)
            post = hooks.get((HookPoint.POST_ENCODER, modality))
            if post:
                x = self._intervene(x, post, tape)
            codes.append(x)
        fused = ad.concat_cols(codes, tape)
        w_f, b_f = self.fusion_layer
        hidden = ad.activation(ad.add(ad.matmul(fused, w_f, tape), b_f, tape), "tanh", tape)
        w_o, b_o = self.output_layer
        return ad.add(ad.matmul(hidden, w_o, tape), b_o, tape)


def predict(model: Model, dataset: Dataset, split: str, interventions=(),
            batch_size: int = 256) -> np.ndarray:
    """Per-sample predictions for a split, in record order.

    Interventions index into the split's record order and are rebased
    onto inference chunks internally.
    """
    records = dataset.records(split)
    if not records:
        raise ContractError(f"split {split!r} is empty")
    for iv in interventions:
        if not 0 <= iv.sample_index < len(records):
            raise ContractError(
                f"intervention index {iv.sample_index} outside split of {len(records)}"
            )
    out = np.zeros(len(records))
    for start in range(0, len(records), batch_size):
        chunk = records[start:start + batch_size]
        local = [
            Intervention(iv.sample_index - start, iv.modality, iv.kind, iv.hook, iv.stream)
            for iv in interventions
            if start <= iv.sample_index < start + len(chunk)
        ]
        pred = model.forward(chunk, local)
        out[start:start + len(chunk)] = pred.data[:, 0]
    return out


# ---------------------------------------------------------------------------
# checkpoints


def flat_parameters(model: Model) -> list[float]:
    values: list[float] = []
    for p in model.parameters():
        values.extend(float(v) for v in p.data.reshape(-1))
    return values


def load_flat_parameters(model: Model, values: list[float]) -> None:
    total = sum(p.rows * p.cols for p in model.parameters())
    if len(values) != total:
        raise ContractError(f"checkpoint has {len(values)} values, model needs {total}")
    cursor = 0
    for p in model.parameters():
        count = p.rows * p.cols
        p.data[:, :] = np.array(values[cursor:cursor + count]).reshape(p.rows, p.cols)
        cursor += count


def save_checkpoint(model: Model, path) -> None:
    payload = {"config": model.config.as_dict(), "params": flat_parameters(model)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_checkpoint(path) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    model = Model(ModelConfig.from_dict(payload["config"]))
    load_flat_parameters(model, payload["params"])
    return model
