"""Synthetic multimodal datasets and the line-delimited feature file format.

A dataset is three splits of records, each record carrying one label in
[-3, 3] plus a language, an audio, and a visual feature vector. The
synthetic generator plants a configurable fraction of the label signal
in each modality so dominance effects can be produced on demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .autodiff import ContractError
from .rng import Stream

MODALITIES = ("language", "audio", "visual")
SPLITS = ("train", "valid", "test")

# header keys in feature files, aligned with MODALITIES
_DIM_KEYS = ("d_l", "d_a", "d_v")


class ParseError(ValueError):
    """A feature-file line is not valid JSON or misses required keys."""


class SchemaError(ValueError):
    """A record contradicts the declared dataset schema."""


class EmptyDatasetError(ValueError):
    """A feature file contains no records."""


@dataclass(eq=False)
class FeatureRecord:
    id: str
    split: str
    label: float
    language: np.ndarray
    audio: np.ndarray
    visual: np.ndarray

    def vector(self, modality: str) -> np.ndarray:
        if modality not in MODALITIES:
            raise ContractError(f"unknown modality: {modality!r}")
        return getattr(self, modality)

    def __eq__(self, other):
        if not isinstance(other, FeatureRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.split == other.split
            and self.label == other.label
            and all(np.array_equal(self.vector(m), other.vector(m)) for m in MODALITIES)
        )


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a generated dataset; a pure function of its fields."""

    n_per_split: tuple[int, int, int] = (600, 150, 400)
    dims: tuple[int, int, int] = (16, 8, 8)
    signal_weights: tuple[float, float, float] = (0.8, 0.1, 0.1)
    feature_noise_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if any(n < 1 for n in self.n_per_split):
            raise ContractError(f"split counts must be >= 1, got {self.n_per_split}")
        if any(d < 1 for d in self.dims):
            raise ContractError(f"dims must be >= 1, got {self.dims}")
        if any(w < 0 for w in self.signal_weights):
            raise ContractError(f"signal weights must be nonnegative, got {self.signal_weights}")
        if abs(sum(self.signal_weights) - 1.0) > 1e-9:
            raise ContractError(f"signal weights must sum to 1, got {self.signal_weights}")
        if self.feature_noise_sigma < 0:
            raise ContractError("feature_noise_sigma must be >= 0")

    def as_dict(self) -> dict:
        return {
            "n_per_split": list(self.n_per_split),
            "dims": list(self.dims),
            "signal_weights": list(self.signal_weights),
            "feature_noise_sigma": self.feature_noise_sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        return cls(
            n_per_split=tuple(d["n_per_split"]),
            dims=tuple(d["dims"]),
            signal_weights=tuple(d["signal_weights"]),
            feature_noise_sigma=float(d["feature_noise_sigma"]),
            seed=int(d["seed"]),
        )


@dataclass
class Dataset:
    dims: tuple[int, int, int]
    by_split: dict[str, list[FeatureRecord]] = field(default_factory=dict)

    def __post_init__(self):
        for s in SPLITS:
            self.by_split.setdefault(s, [])
        seen = set()
        for rec in self.all_records():
            if rec.id in seen:
                raise ContractError(f"duplicate record id: {rec.id!r}")
            seen.add(rec.id)

    def records(self, split: str) -> list[FeatureRecord]:
        if split not in SPLITS:
            raise ContractError(f"unknown split: {split!r}")
        return self.by_split[split]

    def all_records(self):
        for s in SPLITS:
            yield from self.by_split[s]

    def dim_of(self, modality: str) -> int:
        return self.dims[MODALITIES.index(modality)]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return tuple(self.dims) == tuple(other.dims) and all(
            self.by_split[s] == other.by_split[s] for s in SPLITS
        )


def _unit_direction(seed: int, modality: str, dim: int) -> np.ndarray:
    v = np.array(Stream(seed, "direction", modality).normals(dim))
    return v / np.linalg.norm(v)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Build a dataset from the spec; byte-identical for identical specs.

    Per record: latent s ~ Uniform(-3, 3), label = s, and each modality's
    vector is s * w_m * v_m + sigma * eps with eps i.i.d. standard normal.
    The noise draws happen even when sigma is 0, so datasets that differ
    only in sigma share their latents.
    """
    directions = [
        _unit_direction(spec.seed, m, d) for m, d in zip(MODALITIES, spec.dims)
    ]
    by_split: dict[str, list[FeatureRecord]] = {s: [] for s in SPLITS}
    for split, count in zip(SPLITS, spec.n_per_split):
        for i in range(count):
            stream = Stream(spec.seed, "record", split, i)
            s = stream.uniform(-3.0, 3.0)
            vectors = []
            for m_idx, (w, v, d) in enumerate(
                zip(spec.signal_weights, directions, spec.dims)
            ):
                eps = np.array(stream.normals(d))
                vectors.append(s * w * v + spec.feature_noise_sigma * eps)
            by_split[split].append(
                FeatureRecord(
                    id=f"{split}-{i:05d}",
                    split=split,
                    label=s,
                    language=vectors[0],
                    audio=vectors[1],
                    visual=vectors[2],
                )
            )
    return Dataset(dims=tuple(spec.dims), by_split=by_split)


# ---------------------------------------------------------------------------
# feature files: one JSON object per line, header first


def save_features(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {k: d for k, d in zip(_DIM_KEYS, dataset.dims)}
        fh.write(json.dumps(header) + "\n")
        for rec in dataset.all_records():
            obj = {
                "id": rec.id,
                "split": rec.split,
                "label": float(rec.label),
                "language": [float(x) for x in rec.language],
                "audio": [float(x) for x in rec.audio],
                "visual": [float(x) for x in rec.visual],
            }
            fh.write(json.dumps(obj) + "\n")


def _parse_line(line: str, lineno: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ParseError(f"line {lineno}: expected a JSON object")
    return obj


def load_features(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise EmptyDatasetError(f"no records in {path}")
    header = _parse_line(lines[0], 1)
    try:
        dims = tuple(int(header[k]) for k in _DIM_KEYS)
    except KeyError as exc:
        raise ParseError(f"line 1: header missing key {exc.args[0]!r}") from None
    by_split: dict[str, list[FeatureRecord]] = {s: [] for s in SPLITS}
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        obj = _parse_line(line, lineno)
        try:
            rec_id = str(obj["id"])
            split = obj["split"]
            label = float(obj["label"])
            vectors = [
                np.array([float(x) for x in obj[m]], dtype=np.float64)
                for m in MODALITIES
            ]
        except KeyError as exc:
            raise ParseError(f"line {lineno}: record missing key {exc.args[0]!r}") from None
        except (TypeError, ValueError):
            raise ParseError(f"line {lineno}: malformed record values") from None
        if rec_id in seen:
            raise SchemaError(f"duplicate record id {rec_id!r}")
        seen.add(rec_id)
        if split not in SPLITS:
            raise SchemaError(f"record {rec_id!r} has unknown split {split!r}")
        if not -3.0 <= label <= 3.0:
            raise SchemaError(f"record {rec_id!r} label {label} outside [-3, 3]")
        for m, vec, d in zip(MODALITIES, vectors, dims):
            if len(vec) != d:
                raise SchemaError(
                    f"record {rec_id!r} {m} length {len(vec)} != declared {d}"
                )
        by_split[split].append(
            FeatureRecord(rec_id, split, label, vectors[0], vectors[1], vectors[2])
        )
    if not any(by_split[s] for s in SPLITS):
        raise EmptyDatasetError(f"no records in {path}")
    return Dataset(dims=dims, by_split=by_split)


# ---------------------------------------------------------------------------
# batching


def batches(dataset: Dataset, split: str, batch_size: int, seed: int, epoch: int):
    """Seeded permutation of the split cut into consecutive batches."""
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    records = dataset.records(split)
    order = list(range(len(records)))
    Stream(seed, "batches", split, epoch).shuffle(order)
    out = []
    for start in range(0, len(order), batch_size):
        out.append([records[j] for j in order[start:start + batch_size]])
    return out


def stack_features(records: list[FeatureRecord]):
    """Stack a batch into (language, audio, visual, labels) float64 arrays."""
    lang = np.stack([r.language for r in records])
    audio = np.stack([r.audio for r in records])
    visual = np.stack([r.visual for r in records])
    labels = np.array([r.label for r in records], dtype=np.float64).reshape(-1, 1)
    return lang, audio, visual, labels
