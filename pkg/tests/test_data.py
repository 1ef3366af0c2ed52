"""Synthetic generation, feature-file round-trips, and batching."""

import json

import numpy as np
import pytest

from mmrobust.autodiff import ContractError
from mmrobust.data import (
    EmptyDatasetError,
    ParseError,
    SchemaError,
    SyntheticSpec,
    batches,
    generate_synthetic,
    load_features,
    save_features,
    stack_features,
)
from mmrobust.metrics import pearson_corr

SMALL = SyntheticSpec(
    n_per_split=(20, 8, 12),
    dims=(6, 4, 4),
    signal_weights=(0.8, 0.1, 0.1),
    feature_noise_sigma=0.1,
    seed=3,
)


def test_generation_deterministic():
    assert generate_synthetic(SMALL) == generate_synthetic(SMALL)


def test_generation_shapes_and_labels():
    ds = generate_synthetic(SMALL)
    assert [len(ds.records(s)) for s in ("train", "valid", "test")] == [20, 8, 12]
    for rec in ds.all_records():
        assert len(rec.language) == 6
        assert len(rec.audio) == 4
        assert len(rec.visual) == 4
        assert -3.0 <= rec.label <= 3.0


def test_degenerate_weights_put_all_signal_in_language():
    spec = SyntheticSpec(
        n_per_split=(10, 2, 2),
        dims=(5, 3, 3),
        signal_weights=(1.0, 0.0, 0.0),
        feature_noise_sigma=0.0,
        seed=1,
    )
    ds = generate_synthetic(spec)
    for rec in ds.all_records():
        assert np.all(rec.audio == 0.0)
        assert np.all(rec.visual == 0.0)
        # language = label * unit direction, so its norm recovers |label|
        assert abs(np.linalg.norm(rec.language) - abs(rec.label)) < 1e-12


def test_sigma_does_not_change_latents():
    namesakes = [
        generate_synthetic(SyntheticSpec(n_per_split=(5, 1, 1), dims=(3, 3, 3),
                                         feature_noise_sigma=sig, seed=9))
        for sig in (0.0, 0.5)
    ]
    labels = [[r.label for r in ds.records("train")] for ds in namesakes]
    assert labels[0] == labels[1]


def test_spec_validation():
    with pytest.raises(ContractError):
        SyntheticSpec(dims=(0, 4, 4))
    with pytest.raises(ContractError):
        SyntheticSpec(n_per_split=(0, 1, 1))
    with pytest.raises(ContractError):
        SyntheticSpec(signal_weights=(0.5, 0.2, 0.2))
    with pytest.raises(ContractError):
        SyntheticSpec(signal_weights=(1.2, -0.1, -0.1))
    with pytest.raises(ContractError):
        SyntheticSpec(feature_noise_sigma=-0.5)


def test_spec_dict_round_trip():
    assert SyntheticSpec.from_dict(SMALL.as_dict()) == SMALL


def test_linear_probe_dominance():
    """OLS probes recover the planted signal fractions.

    Frozen from an offline least-squares oracle: at sigma=0.1 the
    language probe clears 0.9 while the minor modalities sit near
    sqrt(0.75); at sigma=0.25 they fall below 0.65.
    """
    for sigma, minor_bound in ((0.1, 0.92), (0.25, 0.65)):
        spec = SyntheticSpec(
            n_per_split=(2000, 200, 1000),
            dims=(16, 8, 8),
            signal_weights=(0.8, 0.1, 0.1),
            feature_noise_sigma=sigma,
            seed=5,
        )
        ds = generate_synthetic(spec)
        Xl, Xa, Xv, y = stack_features(ds.records("train"))
        Tl, Ta, Tv, ty = stack_features(ds.records("test"))
        corrs = {}
        for name, X, T in (("language", Xl, Tl), ("audio", Xa, Ta), ("visual", Xv, Tv)):
            A = np.hstack([X, np.ones((len(X), 1))])
            w, *_ = np.linalg.lstsq(A, y, rcond=None)
            pred = np.hstack([T, np.ones((len(T), 1))]) @ w
            corrs[name] = pearson_corr(pred.ravel(), ty.ravel())
        assert corrs["language"] > 0.9
        assert corrs["audio"] < minor_bound
        assert corrs["visual"] < minor_bound
        assert corrs["language"] - max(corrs["audio"], corrs["visual"]) > 0.05


# ---------------------------------------------------------------------------
# feature files


def test_round_trip_bit_exact(tmp_path):
    ds = generate_synthetic(SMALL)
    path = tmp_path / "features.jsonl"
    save_features(ds, path)
    assert load_features(path) == ds


def test_schema_error_names_record(tmp_path):
    ds = generate_synthetic(SMALL)
    path = tmp_path / "features.jsonl"
    save_features(ds, path)
    lines = path.read_text().splitlines()
    bad = json.loads(lines[3])
    bad["language"] = bad["language"][:-1]
    lines[3] = json.dumps(bad)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaError, match=bad["id"]):
        load_features(path)


def test_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_text('{"d_l": 2, "d_a": 2, "d_v": 2}\nnot json at all\n')
    with pytest.raises(ParseError, match="line 2"):
        load_features(path)


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(EmptyDatasetError):
        load_features(path)
    path.write_text('{"d_l": 2, "d_a": 2, "d_v": 2}\n')
    with pytest.raises(EmptyDatasetError):
        load_features(path)


def _record_line(rec_id="r1", split="train", label=1.0, d=2):
    return json.dumps(
        {"id": rec_id, "split": split, "label": label,
         "language": [0.0] * d, "audio": [0.0] * d, "visual": [0.0] * d}
    )


def test_invalid_records_rejected(tmp_path):
    header = '{"d_l": 2, "d_a": 2, "d_v": 2}'
    path = tmp_path / "f.jsonl"

    path.write_text(header + "\n" + _record_line() + "\n" + _record_line() + "\n")
    with pytest.raises(SchemaError, match="duplicate"):
        load_features(path)

    path.write_text(header + "\n" + _record_line(split="dev") + "\n")
    with pytest.raises(SchemaError, match="split"):
        load_features(path)

    path.write_text(header + "\n" + _record_line(label=4.5) + "\n")
    with pytest.raises(SchemaError, match="label"):
        load_features(path)

    missing_key = '{"id": "x", "split": "train", "label": 0.0, "language": [0,0]}'
    path.write_text(header + "\n" + missing_key + "\n")
    with pytest.raises(ParseError, match="line 2"):
        load_features(path)


# ---------------------------------------------------------------------------
# batching


def test_batch_partition_sizes():
    spec = SyntheticSpec(n_per_split=(10, 1, 1), dims=(2, 2, 2), seed=0)
    ds = generate_synthetic(spec)
    got = batches(ds, "train", 4, seed=1, epoch=0)
    assert [len(b) for b in got] == [4, 4, 2]
    ids = [r.id for b in got for r in b]
    assert sorted(ids) == sorted(r.id for r in ds.records("train"))


def test_batches_deterministic_per_epoch():
    spec = SyntheticSpec(n_per_split=(10, 1, 1), dims=(2, 2, 2), seed=0)
    ds = generate_synthetic(spec)
    a = batches(ds, "train", 3, seed=7, epoch=4)
    b = batches(ds, "train", 3, seed=7, epoch=4)
    assert [[r.id for r in batch] for batch in a] == [[r.id for r in batch] for batch in b]


def test_batches_vary_across_epochs():
    spec = SyntheticSpec(n_per_split=(10, 1, 1), dims=(2, 2, 2), seed=0)
    ds = generate_synthetic(spec)
    orders = set()
    for epoch in range(100):
        order = tuple(r.id for b in batches(ds, "train", 10, seed=7, epoch=epoch) for r in b)
        orders.add(order)
    assert len(orders) == 100


def test_batches_contract_errors():
    ds = generate_synthetic(SMALL)
    with pytest.raises(ContractError):
        batches(ds, "train", 0, seed=1, epoch=0)
    with pytest.raises(ContractError):
        batches(ds, "holdout", 4, seed=1, epoch=0)


def test_stack_features_shapes():
    ds = generate_synthetic(SMALL)
    lang, audio, visual, labels = stack_features(ds.records("valid"))
    assert lang.shape == (8, 6)
    assert audio.shape == (8, 4)
    assert visual.shape == (8, 4)
    assert labels.shape == (8, 1)
