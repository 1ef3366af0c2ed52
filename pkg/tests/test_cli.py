"""End-to-end command-line pipeline and exit codes."""

import json

import pytest

from mmrobust.cli import main

SPEC = {
    "n_per_split": [60, 20, 40],
    "dims": [6, 4, 4],
    "signal_weights": [0.8, 0.1, 0.1],
    "feature_noise_sigma": 0.25,
    "seed": 11,
}


@pytest.fixture()
def pipeline(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(SPEC))
    data_path = tmp_path / "data.jsonl"
    assert main(["gen-data", "--spec", str(spec_path), "--out", str(data_path)]) == 0
    return tmp_path, spec_path, data_path


def test_gen_data_writes_file(pipeline, capsys):
    _, _, data_path = pipeline
    assert data_path.exists()
    lines = data_path.read_text().splitlines()
    assert len(lines) == 1 + 120
    assert json.loads(lines[0]) == {"d_l": 6, "d_a": 4, "d_v": 4}


def test_gen_data_seed_override(pipeline, tmp_path):
    _, spec_path, data_path = pipeline
    other = tmp_path / "other.jsonl"
    assert main(["gen-data", "--spec", str(spec_path), "--out", str(other),
                 "--seed", "999"]) == 0
    assert other.read_text() != data_path.read_text()


def test_full_pipeline(pipeline, capsys):
    tmp_path, _, data_path = pipeline
    runs = tmp_path / "runs"
    code = main([
        "train", "--data", str(data_path), "--out", str(runs),
        "--model-hidden", "4", "--seeds", "1,2", "--epochs", "3",
        "--batch", "16", "--lr", "0.01", "--opt", "adam",
    ])
    assert code == 0
    for seed in (1, 2):
        run_dir = runs / f"seed-{seed}"
        assert (run_dir / "checkpoint.json").exists()
        assert (run_dir / "config.json").exists()
        assert (run_dir / "loss_trace.csv").exists()

    aggregate = tmp_path / "aggregate.json"
    code = main([
        "diagnose", "--runs", str(runs), "--data", str(data_path),
        "--out", str(aggregate), "--proportions", "0.3",
        "--kinds", "missing,noise", "--modalities", "language",
        "--seeds", "1,2",
    ])
    assert code == 0
    payload = json.loads(aggregate.read_text())
    assert payload["seeds"] == [1, 2]
    assert len(payload["rows"]) == 2

    capsys.readouterr()
    assert main(["report", "--in", str(aggregate), "--format", "csv"]) == 0
    csv_out = capsys.readouterr().out
    assert csv_out.startswith("variant,")
    assert main(["report", "--in", str(aggregate), "--format", "markdown"]) == 0
    md_out = capsys.readouterr().out
    assert md_out.startswith("| Robust |")
    assert "↓" in md_out


def test_diagnose_deterministic_bytes(pipeline, tmp_path):
    _, _, data_path = pipeline
    runs = tmp_path / "runs"
    assert main(["train", "--data", str(data_path), "--out", str(runs),
                 "--model-hidden", "4", "--seeds", "1", "--epochs", "2"]) == 0
    out_a = tmp_path / "agg_a.json"
    out_b = tmp_path / "agg_b.json"
    args = ["diagnose", "--runs", str(runs), "--data", str(data_path),
            "--proportions", "0.15,0.3", "--seeds", "1"]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_report_compare_merges_variants(pipeline, tmp_path, capsys):
    _, _, data_path = pipeline
    std_runs = tmp_path / "std"
    rob_runs = tmp_path / "rob"
    common = ["--data", str(data_path), "--model-hidden", "4",
              "--seeds", "1", "--epochs", "2"]
    assert main(["train", "--out", str(std_runs)] + common) == 0
    assert main(["train", "--out", str(rob_runs), "--robust", "0.3",
                 "--robust-kind", "balanced"] + common) == 0
    std_agg = tmp_path / "std.json"
    rob_agg = tmp_path / "rob.json"
    diag = ["--data", str(data_path), "--proportions", "0.3", "--seeds", "1"]
    assert main(["diagnose", "--runs", str(std_runs), "--out", str(std_agg)] + diag) == 0
    assert main(["diagnose", "--runs", str(rob_runs), "--out", str(rob_agg)] + diag) == 0
    capsys.readouterr()
    assert main(["report", "--in", str(std_agg), "--format", "markdown",
                 "--compare", str(rob_agg)]) == 0
    out = capsys.readouterr().out
    assert "| Yes |" in out
    assert "**" in out  # some drop pair got bolded


def test_usage_errors_exit_one(capsys):
    assert main(["train", "--data", "d", "--out", "o", "--model-hidden", "4",
                 "--bogus", "x"]) == 1
    assert "--bogus" in capsys.readouterr().err
    assert main(["train", "--bogus", "x"]) == 1  # missing required flags
    assert main(["frobnicate"]) == 1
    assert main([]) == 1
    assert main(["report", "--in", "x.json", "--format", "pdf"]) == 1
    assert main(["gen-data", "--out", "x.jsonl"]) == 1  # missing --spec


def test_runtime_errors_exit_two(tmp_path, capsys):
    missing = tmp_path / "missing.jsonl"
    code = main(["train", "--data", str(missing), "--out", str(tmp_path / "r"),
                 "--model-hidden", "4"])
    assert code == 2
    assert str(missing) in capsys.readouterr().err
    assert main(["report", "--in", str(tmp_path / "nope.json"),
                 "--format", "csv"]) == 2
    bad_spec = tmp_path / "bad.json"
    bad_spec.write_text('{"dims": [0, 0, 0]}')
    assert main(["gen-data", "--spec", str(bad_spec), "--out",
                 str(tmp_path / "d.jsonl")]) == 2
