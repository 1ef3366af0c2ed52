"""Representation perturbations: missing, additive noise, mask sampling.

Missing nulls a vector to zeros; Noise adds i.i.d. standard normals
drawn from a deterministic stream. Plans describe which modality gets
perturbed, for what proportion of samples, and at which hook point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .autodiff import ContractError
from .data import MODALITIES
from .rng import Stream


class PerturbationKind(enum.Enum):
    MISSING = "missing"
    NOISE = "noise"
    # plan-level only: half the mask goes missing, half noisy
    BALANCED = "balanced"


class HookPoint(enum.Enum):
    PRE_ENCODER = "pre"
    POST_ENCODER = "post"


APPLY_KINDS = (PerturbationKind.MISSING, PerturbationKind.NOISE)


@dataclass(frozen=True)
class PerturbationPlan:
    modality: str
    kind: PerturbationKind
    proportion: float
    hook: HookPoint = HookPoint.POST_ENCODER
    seed: int = 0

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ContractError(f"unknown modality: {self.modality!r}")
        if not isinstance(self.kind, PerturbationKind):
            raise ContractError(f"kind must be a PerturbationKind, got {self.kind!r}")
        if not isinstance(self.hook, HookPoint):
            raise ContractError(f"hook must be a HookPoint, got {self.hook!r}")
        if not 0.0 <= self.proportion <= 1.0:
            raise ContractError(f"proportion must lie in [0, 1], got {self.proportion}")


def apply_missing(x) -> np.ndarray:
    """Null the vector: same shape, all zeros."""
    return np.zeros_like(np.asarray(x, dtype=np.float64))


def apply_noise(x, stream: Stream) -> np.ndarray:
    """Add one standard-normal draw per element, in element order."""
    arr = np.asarray(x, dtype=np.float64)
    return arr + np.array(stream.normals(arr.size)).reshape(arr.shape)


def mask_size(n: int, p: float) -> int:
    # floor(p*n) with a nudge so exact products like 0.3*10 do not
    # round down through binary representation error
    return int(math.floor(p * n + 1e-9))


def sample_mask(ids: list, p: float, stream: Stream) -> list:
    """Pick floor(p*n) distinct ids without replacement, seeded."""
    if not 0.0 <= p <= 1.0:
        raise ContractError(f"proportion must lie in [0, 1], got {p}")
    return stream.choose(list(ids), mask_size(len(ids), p))


def balanced_split(mask: list, stream: Stream) -> tuple[list, list]:
    """Shuffle the mask, then send the first ceil(k/2) ids to Missing."""
    shuffled = list(mask)
    stream.shuffle(shuffled)
    n_missing = (len(shuffled) + 1) // 2
    return shuffled[:n_missing], shuffled[n_missing:]
