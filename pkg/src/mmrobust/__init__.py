"""Modality-robustness diagnostics for multimodal sentiment models.

A small numpy-backed stack: a deterministic PRNG scheme, a tape-based
autodiff core, synthetic multimodal datasets, a three-encoder fusion
model with intervention hooks, perturbation machinery, and diagnostic
sweeps that measure how far metrics fall when one modality is corrupted.
"""

from .autodiff import Tape, Tensor, backward, gradient_check
from .metrics import MetricSet, compute_drop, relative_reduction
from .rng import Stream, derive_key

__all__ = [
    "Stream",
    "derive_key",
    "Tensor",
    "Tape",
    "backward",
    "gradient_check",
    "MetricSet",
    "compute_drop",
    "relative_reduction",
]

__version__ = "0.1.0"
