"""The full pipeline through the command-line interface.

Same four stages the library exposes, driven the way a shell user would
run them: gen-data, train, diagnose, report. Everything lands in a
temporary directory; the rerun at the end shows the byte-level
determinism guarantee.
"""

import json
import tempfile
from pathlib import Path

from mmrobust.cli import main

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    spec_path = root / "spec.json"
    data_path = root / "data.jsonl"
    runs_dir = root / "runs"
    agg_path = root / "aggregate.json"

    spec_path.write_text(json.dumps({
        "n_per_split": [200, 50, 100],
        "dims": [12, 6, 6],
        "signal_weights": [0.8, 0.1, 0.1],
        "feature_noise_sigma": 0.25,
        "seed": 7,
    }))

    print("=== 1. gen-data ===")
    main(["gen-data", "--spec", str(spec_path), "--out", str(data_path)])

    print()
    print("=== 2. train (two seeds) ===")
    main([
        "train", "--data", str(data_path), "--out", str(runs_dir),
        "--model-hidden", "8", "--seeds", "1,2", "--epochs", "20",
    ])
    for line in sorted(p.relative_to(root) for p in runs_dir.rglob("*") if p.is_file()):
        print(f"  wrote {line}")

    print()
    print("=== 3. diagnose ===")
    main([
        "diagnose", "--runs", str(runs_dir), "--data", str(data_path),
        "--out", str(agg_path), "--seeds", "1,2",
    ])

    print()
    print("=== 4. report, markdown then csv ===")
    main(["report", "--in", str(agg_path), "--format", "markdown"])
    main(["report", "--in", str(agg_path), "--format", "csv"])

    print()
    print("=== 5. determinism: rerun diagnose and compare bytes ===")
    before = agg_path.read_bytes()
    main([
        "diagnose", "--runs", str(runs_dir), "--data", str(data_path),
        "--out", str(agg_path), "--seeds", "1,2",
    ])
    print(f"rerun produced identical bytes: {agg_path.read_bytes() == before}")
