"""Generate a synthetic multimodal dataset and poke at what is inside it.

The generator plants one latent sentiment score per record and spreads
it across three feature vectors with configurable weights. A quick
least-squares probe per modality shows where the label actually lives.
"""

import tempfile
from pathlib import Path

import numpy as np

from mmrobust.data import (
    SyntheticSpec,
    generate_synthetic,
    load_features,
    save_features,
    stack_features,
)

spec = SyntheticSpec(
    n_per_split=(400, 100, 200),
    dims=(16, 8, 8),
    signal_weights=(0.8, 0.1, 0.1),
    feature_noise_sigma=0.25,
    seed=5,
)
data = generate_synthetic(spec)

print("=== 1. what a record looks like ===")
first = data.records("train")[0]
print(f"id      : {first.id}")
print(f"label   : {first.label:+.4f}")
for modality in ("language", "audio", "visual"):
    v = first.vector(modality)
    print(f"{modality:8s}: dim {v.size}, norm {np.linalg.norm(v):.4f}")

print()
print("=== 2. which modality predicts the label? ===")
# Fit label ~ features by least squares per modality on train, score on test.
lang, audio, visual, train_y = stack_features(data.records("train"))
test_stacks = stack_features(data.records("test"))
for features, test_x, name in zip(
    (lang, audio, visual), test_stacks[:3], ("language", "audio", "visual")
):
    coef, *_ = np.linalg.lstsq(features, train_y, rcond=None)
    pred = test_x @ coef
    corr = np.corrcoef(pred.ravel(), test_stacks[3].ravel())[0, 1]
    print(f"{name:8s}: test correlation of linear probe = {corr:.3f}")
print("with weights (0.8, 0.1, 0.1) the language probe dominates,")
print("which is the regime the perturbation diagnostics are built to expose")

print()
print("=== 3. the JSONL feature format round-trips exactly ===")
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "features.jsonl"
    save_features(data, path)
    first_bytes = path.read_bytes()
    reloaded = load_features(path)
    save_features(reloaded, path)
    print(f"records written : {sum(len(data.records(s)) for s in ('train', 'valid', 'test'))}")
    print(f"reload equal    : {reloaded == data}")
    print(f"re-save is byte-identical: {path.read_bytes() == first_bytes}")
