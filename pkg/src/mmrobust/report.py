"""Aggregate-report serialization and table emission.

The csv carries every statistic at full precision, one row per
(variant, modality, kind, proportion, metric). The markdown table is
shaped like a published drop table: perturbed values with their drops
prefixed by a down arrow, and, when a robust variant is present, the
larger drop of each standard/robust pair in bold.
"""

from __future__ import annotations

import csv
import io
import json

from .autodiff import ContractError
from .diagnostics import AggregateReport, AggregateRow, Key
from .metrics import METRIC_NAMES

# display formatting per metric: corr uses 3 decimals, the percentage
# metrics use 2, mae uses 3
_DECIMALS = {"corr": 3, "f1": 2, "acc2": 2, "mae": 3}
_LABELS = {"corr": "Corr", "f1": "F1", "acc2": "Acc-2", "mae": "MAE"}


# ---------------------------------------------------------------------------
# aggregate file io


def aggregate_to_dict(report: AggregateReport) -> dict:
    return {
        "seeds": list(report.seeds),
        "clean_mean": dict(report.clean_mean),
        "clean_std": dict(report.clean_std),
        "rows": [
            {
                "modality": modality,
                "kind": kind,
                "proportion": proportion,
                "perturbed_mean": dict(row.perturbed_mean),
                "perturbed_std": dict(row.perturbed_std),
                "drop_mean": dict(row.drop_mean),
                "drop_std": dict(row.drop_std),
            }
            for (modality, kind, proportion), row in report.rows.items()
        ],
    }


def aggregate_from_dict(payload: dict) -> AggregateReport:
    report = AggregateReport(
        seeds=[int(s) for s in payload["seeds"]],
        clean_mean=dict(payload["clean_mean"]),
        clean_std=dict(payload["clean_std"]),
    )
    for row in payload["rows"]:
        key: Key = (row["modality"], row["kind"], float(row["proportion"]))
        report.rows[key] = AggregateRow(
            perturbed_mean=dict(row["perturbed_mean"]),
            perturbed_std=dict(row["perturbed_std"]),
            drop_mean=dict(row["drop_mean"]),
            drop_std=dict(row["drop_std"]),
        )
    return report


def save_aggregate(report: AggregateReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(aggregate_to_dict(report), fh, indent=2)
        fh.write("\n")


def load_aggregate(path) -> AggregateReport:
    with open(path, "r", encoding="utf-8") as fh:
        return aggregate_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# csv


def _csv_rows(variant: str, report: AggregateReport):
    for (modality, kind, proportion), row in report.rows.items():
        for metric in METRIC_NAMES:
            yield {
                "variant": variant,
                "modality": modality,
                "kind": kind,
                "proportion": repr(proportion),
                "metric": metric,
                "clean_mean": repr(report.clean_mean[metric]),
                "clean_std": repr(report.clean_std[metric]),
                "perturbed_mean": repr(row.perturbed_mean[metric]),
                "perturbed_std": repr(row.perturbed_std[metric]),
                "drop_mean": repr(row.drop_mean[metric]),
                "drop_std": repr(row.drop_std[metric]),
                "n_seeds": str(report.n_seeds),
            }


CSV_COLUMNS = (
    "variant", "modality", "kind", "proportion", "metric",
    "clean_mean", "clean_std", "perturbed_mean", "perturbed_std",
    "drop_mean", "drop_std", "n_seeds",
)


def emit_csv(aggregate: AggregateReport, comparison: AggregateReport | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in _csv_rows("standard", aggregate):
        writer.writerow(row)
    if comparison is not None:
        for row in _csv_rows("robust", comparison):
            writer.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# markdown


def _fmt(metric: str, value: float) -> str:
    return f"{value:.{_DECIMALS[metric]}f}"


def _check_label(key: Key) -> str:
    modality, kind, proportion = key
    return f"{modality} {kind} {proportion * 100:g}%"


def _drop_cell(metric: str, row: AggregateRow, bold: bool) -> str:
    text = f"↓{_fmt(metric, row.drop_mean[metric])}"
    if bold:
        text = f"**{text}**"
    return f"{_fmt(metric, row.perturbed_mean[metric])} ({text})"


def emit_markdown(aggregate: AggregateReport, comparison: AggregateReport | None = None) -> str:
    variants: list[tuple[str, AggregateReport]] = [("-", aggregate)]
    if comparison is not None:
        if set(aggregate.rows) != set(comparison.rows):
            raise ContractError("aggregate reports disagree on their key sets")
        variants.append(("Yes", comparison))
    lines = []
    header = ["Robust", "Check"] + [_LABELS[m] for m in METRIC_NAMES]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join(["---"] * len(header)) + "|")
    for variant_name, report in variants:
        clean_cells = [_fmt(m, report.clean_mean[m]) for m in METRIC_NAMES]
        lines.append(
            "| " + " | ".join([variant_name, "Clean"] + clean_cells) + " |"
        )
        for key in aggregate.rows:
            row = report.rows[key]
            cells = []
            for metric in METRIC_NAMES:
                bold = False
                if comparison is not None:
                    mine = row.drop_mean[metric]
                    other_report = comparison if report is aggregate else aggregate
                    other = other_report.rows[key].drop_mean[metric]
                    bold = mine > other
                cells.append(_drop_cell(metric, row, bold))
            lines.append(
                "| " + " | ".join([variant_name, _check_label(key)] + cells) + " |"
            )
    return "\n".join(lines) + "\n"


def emit_report(aggregate: AggregateReport, comparison: AggregateReport | None,
                fmt: str) -> str:
    if fmt == "csv":
        return emit_csv(aggregate, comparison)
    if fmt == "markdown":
        return emit_markdown(aggregate, comparison)
    raise ContractError(f"unknown report format: {fmt!r}")
