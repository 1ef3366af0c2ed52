"""Command-line pipeline: gen-data, train, diagnose, report.

Exit codes: 0 success, 1 usage error, 2 runtime error. Every run
artifact lands under the directory or path named by --out; the report
subcommand writes its table to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .data import SyntheticSpec, generate_synthetic, load_features, save_features
from .diagnostics import DiagnosticConfig, aggregate_seeds, sweep
from .model import Model, ModelConfig, load_checkpoint
from .perturb import HookPoint, PerturbationKind
from .report import emit_report, load_aggregate, save_aggregate
from .trainer import Optimizer, RobustSpec, TrainConfig, train_robust, train_standard, write_artifacts


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed out of range: {text}")
    return value


def _u64_list(text: str) -> list[int]:
    return [_u64(part) for part in text.split(",") if part]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part]


def _kind_list(text: str) -> list[PerturbationKind]:
    return [PerturbationKind(part) for part in text.split(",") if part]


def _str_list(text: str) -> list[str]:
    return [part for part in text.split(",") if part]


_HOOKS = {"pre": HookPoint.PRE_ENCODER, "post": HookPoint.POST_ENCODER}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmrobust", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="generate a synthetic feature file")
    gen.add_argument("--spec", required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=_u64, default=None)

    train = sub.add_parser("train", help="train one model per seed")
    train.add_argument("--data", required=True)
    train.add_argument("--out", required=True)
    train.add_argument("--model-hidden", type=int, required=True)
    train.add_argument("--robust", type=float, default=None, metavar="P")
    train.add_argument("--robust-kind", choices=["balanced", "missing", "noise"],
                       default="balanced")
    train.add_argument("--hook", choices=["pre", "post"], default="post")
    train.add_argument("--seeds", type=_u64_list, default=[1, 2, 3])
    train.add_argument("--epochs", type=int, default=40)
    train.add_argument("--batch", type=int, default=32)
    train.add_argument("--lr", type=float, default=0.01)
    train.add_argument("--opt", choices=["sgd", "adam"], default="adam")

    diag = sub.add_parser("diagnose", help="sweep checks over trained runs")
    diag.add_argument("--runs", required=True)
    diag.add_argument("--data", required=True)
    diag.add_argument("--out", required=True)
    diag.add_argument("--proportions", type=_float_list,
                      default=[0.05, 0.10, 0.15, 0.30])
    diag.add_argument("--kinds", type=_kind_list,
                      default=[PerturbationKind.MISSING, PerturbationKind.NOISE])
    diag.add_argument("--modalities", type=_str_list, default=["language"])
    diag.add_argument("--hook", choices=["pre", "post"], default="post")
    diag.add_argument("--seeds", type=_u64_list, default=[1, 2, 3])

    rep = sub.add_parser("report", help="emit a drop table from aggregates")
    rep.add_argument("--in", dest="in_path", required=True)
    rep.add_argument("--format", choices=["csv", "markdown"], required=True)
    rep.add_argument("--compare", default=None)

    return parser


def cmd_gen_data(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if args.seed is not None:
        payload["seed"] = args.seed
    spec = SyntheticSpec.from_dict(payload)
    dataset = generate_synthetic(spec)
    save_features(dataset, args.out)
    total = sum(len(dataset.records(s)) for s in ("train", "valid", "test"))
    print(f"wrote {total} records to {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = load_features(args.data)
    robust = None
    if args.robust is not None:
        robust = RobustSpec(
            proportion=args.robust,
            kind=PerturbationKind(args.robust_kind),
            hook=_HOOKS[args.hook],
        )
    for seed in args.seeds:
        model = Model(ModelConfig(
            dims=dataset.dims, hidden_dim=args.model_hidden, init_seed=seed,
        ))
        cfg = TrainConfig(
            epochs=args.epochs,
            batch_size=args.batch,
            optimizer=Optimizer(args.opt, lr=args.lr),
            seed=seed,
            robust=robust,
        )
        trainer = train_robust if robust is not None else train_standard
        artifacts = trainer(model, dataset, cfg)
        run_dir = os.path.join(args.out, f"seed-{seed}")
        write_artifacts(artifacts, run_dir)
        print(f"seed {seed}: best valid MAE {min(t[2] for t in artifacts.trace):.4f} "
              f"-> {run_dir}")
    return 0


def cmd_diagnose(args) -> int:
    dataset = load_features(args.data)
    cfg = DiagnosticConfig(
        proportions=tuple(args.proportions),
        kinds=tuple(args.kinds),
        modalities=tuple(args.modalities),
        hook=_HOOKS[args.hook],
        seeds=tuple(args.seeds),
    )
    sweeps = {}
    for seed in args.seeds:
        checkpoint = os.path.join(args.runs, f"seed-{seed}", "checkpoint.json")
        model = load_checkpoint(checkpoint)
        sweeps[seed] = sweep(model, dataset, cfg, seed)
    save_aggregate(aggregate_seeds(sweeps), args.out)
    print(f"wrote aggregate of {len(args.seeds)} seeds to {args.out}")
    return 0


def cmd_report(args) -> int:
    aggregate = load_aggregate(args.in_path)
    comparison = load_aggregate(args.compare) if args.compare else None
    sys.stdout.write(emit_report(aggregate, comparison, args.format))
    return 0


_COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "diagnose": cmd_diagnose,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, ArithmeticError, RuntimeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
