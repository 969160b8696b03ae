"""Command-line entrypoint.

Exit codes: 0 success, 1 domain errors (bad values, malformed content),
2 I/O errors, 64 usage errors. Every subcommand emits a machine-readable
report (JSON unless the subcommand is CSV-natured); floats are serialized
with 17 significant digits so reports diff cleanly across platforms.
"""

from __future__ import annotations

import argparse
import math
import sys
from enum import Enum

import numpy as np

from .aggregation import Aggregator, aggregate, weights
from .embeddings import load_table, save_table, synth_table
from .errors import NumbraError
from .lexer import TokenScheme, tokenize
from .loss import DEFAULT_LAMBDA, LossBreakdown, PredictionPair, aux_loss, combined_loss
from .metrics import batch_scores
from .neighborhood import (
    DEFAULT_K,
    DEFAULT_SAMPLE_CAP,
    bucket_sweep,
    bucket_universe,
    prefix_sibling_count,
    report_for,
)
from .toy import (
    DEFAULT_DIM,
    DEFAULT_LEARNING_RATE,
    DEFAULT_SIZE,
    Operation,
    ToyModel,
    ToyTask,
    TrainConfig,
    ablation_report,
    generate_task,
    train,
)

_SCHEMES = [s.value for s in TokenScheme]
_METHODS = [m.value for m in Aggregator]


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise NumbraError(f"cannot serialize non-finite value {value}")
    return format(value, ".17g")


def _to_json(obj, indent: int = 0) -> str:
    """JSON emitter with fixed 17-significant-digit floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{inner}"{key}": {_to_json(value, indent + 1)}' for key, value in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{inner}{_to_json(value, indent + 1)}" for value in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, Enum):
        return _to_json(obj.value, indent)
    if isinstance(obj, str):
        escaped = (
            obj.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\r", "\\r")
            .replace("\t", "\\t")
        )
        return f'"{escaped}"'
    if obj is None:
        return "null"
    raise NumbraError(f"cannot serialize {type(obj).__name__}")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        print(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
            if not text.endswith("\n"):
                handle.write("\n")


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _csv_text(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    """argparse with BSD-style usage-error exit code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _parse_digit_lengths(raw: str) -> list[int]:
    """Accept "2..5" ranges or comma lists like "1,2,4"."""
    raw = raw.strip()
    try:
        if ".." in raw:
            lo_text, hi_text = raw.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise NumbraError(f"cannot parse digit lengths from {raw!r}") from None


def _cmd_tokenize(args) -> int:
    tokens = tokenize(args.text, TokenScheme.from_name(args.scheme))
    _emit("\n".join(token.text for token in tokens), args.out)
    return 0


def _cmd_synth_embed(args) -> int:
    table = synth_table(args.dim, args.seed)
    save_table(table, args.out)
    print(_to_json({"path": args.out, "tokens": len(table.tokens), "dim": table.dim}))
    return 0


def _cmd_weights(args) -> int:
    vector = list(weights(args.digits).weights)
    if args.format == "csv":
        rows = [[i + 1, w] for i, w in enumerate(vector)]
        _emit(_csv_text(["position", "weight"], rows), args.out)
    else:
        _emit(_to_json(vector), args.out)
    return 0


def _cmd_aggregate(args) -> int:
    table = load_table(args.embeddings)
    result = aggregate(args.number, table, Aggregator.from_name(args.method))
    _emit(_to_json(list(result.vector)), args.out)
    return 0


def _cmd_knn_eval(args) -> int:
    table = load_table(args.embeddings)
    methods = [Aggregator.from_name(name) for name in args.methods.split(",") if name]
    lengths = _parse_digit_lengths(args.digits)
    summaries = bucket_sweep(
        table,
        methods,
        lengths,
        k=args.k,
        sample_cap=args.sample,
        seed=args.seed,
        metric=args.metric,
    )
    report = {
        "k": args.k,
        "metric": args.metric,
        "sample_cap": args.sample,
        "seed": args.seed,
        "summaries": [
            {
                "digit_length": s.digit_length,
                "method": s.method,
                "mean_f1": s.mean_f1,
                "count": s.count,
            }
            for s in summaries
        ],
    }
    if 4 in lengths and Aggregator.WEIGHTED in methods:
        probe = report_for(
            4523, args.k, bucket_universe(4), table, Aggregator.WEIGHTED, args.metric
        )
        report["diagnostic_4523"] = {
            "f1": probe.f1,
            "same_prefix_neighbours": prefix_sibling_count(probe),
            "embedded": sorted(probe.embedded),
        }
    _emit(_to_json(report), args.out)
    if args.csv:
        rows = [
            [s.digit_length, s.method, s.mean_f1, s.count] for s in summaries
        ]
        _emit(_csv_text(["digit_length", "method", "mean_f1", "count"], rows), args.csv)
    return 0


def _cmd_loss(args) -> int:
    table = load_table(args.embeddings)
    aux = aux_loss(PredictionPair(predicted=args.pred, gold=args.gold), table)
    breakdown: LossBreakdown = combined_loss(args.ce, aux, getattr(args, "lambda"))
    _emit(
        _to_json(
            {
                "ce": breakdown.ce,
                "aux": breakdown.aux,
                "lambda": breakdown.lam,
                "total": breakdown.total,
            }
        ),
        args.out,
    )
    return 0


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read().splitlines()


def _cmd_score(args) -> int:
    preds = _read_lines(args.pred)
    golds = _read_lines(args.gold)
    if len(preds) != len(golds):
        raise NumbraError(
            f"line count mismatch: {len(preds)} predictions vs {len(golds)} golds"
        )
    scores = batch_scores(list(zip(preds, golds)))
    scores["count"] = len(preds)
    _emit(_to_json(scores), args.out)
    return 0


def _toy_config(args) -> TrainConfig:
    lam = getattr(args, "lambda")
    return TrainConfig(
        lam=lam,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        use_aux_loss=lam < 1.0,
    )


def _cmd_train_toy(args) -> int:
    task = ToyTask(
        operation=Operation.from_name(args.task),
        operand_digits=args.operand_digits,
        size=args.size,
        seed=args.seed,
    )
    scheme = TokenScheme.from_name(args.scheme)
    config = _toy_config(args)
    instances = generate_task(task, scheme)
    model = ToyModel(instances, scheme, dim=args.dim, seed=args.seed)
    trace = train(model, instances, config)
    rows = [
        [r.epoch, r.total, r.ce, r.aux, r.dev_accuracy, r.dev_cer] for r in trace.rows
    ]
    _emit(
        _csv_text(["epoch", "total", "ce", "aux", "dev_accuracy", "dev_cer"], rows),
        args.out,
    )
    print(
        _to_json(
            {
                "epochs": len(trace.rows),
                "final_dev_accuracy": trace.final.dev_accuracy,
                "final_dev_cer": trace.final.dev_cer,
                "out": args.out,
            }
        )
    )
    return 0


def _cmd_ablate(args) -> int:
    task = ToyTask(
        operation=Operation.from_name(args.task),
        operand_digits=args.operand_digits,
        size=args.size,
        seed=args.seed,
    )
    rows = ablation_report(task, _toy_config(args), dim=args.dim)
    table = [
        [r.label, r.scheme, r.use_aux_loss, r.accuracy, r.cer, r.accuracy_delta, r.cer_delta]
        for r in rows
    ]
    header = [
        "label",
        "scheme",
        "use_aux_loss",
        "accuracy",
        "cer",
        "accuracy_delta",
        "cer_delta",
    ]
    _emit(_csv_text(header, table), args.out)
    print(
        _to_json(
            {
                "rows": [
                    {
                        "label": r.label,
                        "scheme": r.scheme,
                        "accuracy": r.accuracy,
                        "cer": r.cer,
                        "accuracy_delta": r.accuracy_delta,
                        "cer_delta": r.cer_delta,
                    }
                    for r in rows
                ],
                "out": args.out,
            }
        )
    )
    return 0


_SCHEMA = {
    "tokenize": {"output": "one token per line"},
    "synth-embed": {"stdout": ["path", "tokens", "dim"]},
    "weights": {"json": "list of weights", "csv": ["position", "weight"]},
    "aggregate": {"json": "list of vector components"},
    "knn-eval": {
        "json": {
            "keys": ["k", "metric", "sample_cap", "seed", "summaries", "diagnostic_4523?"],
            "summaries[]": ["digit_length", "method", "mean_f1", "count"],
            "diagnostic_4523": ["f1", "same_prefix_neighbours", "embedded"],
        },
        "csv": ["digit_length", "method", "mean_f1", "count"],
    },
    "loss": {"json": ["ce", "aux", "lambda", "total"]},
    "score": {"json": ["accuracy_percent", "mean_cer_percent", "count"]},
    "train-toy": {
        "csv": ["epoch", "total", "ce", "aux", "dev_accuracy", "dev_cer"],
        "stdout": ["epochs", "final_dev_accuracy", "final_dev_cer", "out"],
    },
    "ablate": {
        "csv": [
            "label",
            "scheme",
            "use_aux_loss",
            "accuracy",
            "cer",
            "accuracy_delta",
            "cer_delta",
        ],
        "stdout": ["rows", "out"],
    },
}


def _cmd_schema(args) -> int:
    _emit(_to_json(_SCHEMA), args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="numbra", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("tokenize", help="lex text into digit-level tokens")
    p.add_argument("--text", required=True)
    p.add_argument("--scheme", choices=_SCHEMES, default="digits")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_tokenize)

    p = sub.add_parser("synth-embed", help="write a synthetic embedding table")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth_embed)

    p = sub.add_parser("weights", help="positional aggregation weights")
    p.add_argument("--digits", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("aggregate", help="aggregate one number string")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--number", required=True)
    p.add_argument("--method", choices=_METHODS, default="weighted")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("knn-eval", help="neighbourhood alignment sweep")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--methods", default="weighted,sum")
    p.add_argument("--digits", default="2..4", help='range "2..5" or list "1,3"')
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--sample", type=int, default=DEFAULT_SAMPLE_CAP)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_knn_eval)

    p = sub.add_parser("loss", help="loss breakdown for a prediction pair")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--lambda", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--ce", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_loss)

    p = sub.add_parser("score", help="accuracy and CER for answer files")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_score)

    for name, handler in (("train-toy", _cmd_train_toy), ("ablate", _cmd_ablate)):
        p = sub.add_parser(
            name,
            help="train the toy model" if name == "train-toy" else "scheme ablation table",
        )
        p.add_argument("--task", choices=[op.value for op in Operation], default="add")
        p.add_argument("--lambda", type=float, default=DEFAULT_LAMBDA)
        p.add_argument("--epochs", type=int, default=200)
        p.add_argument("--lr", type=float, default=DEFAULT_LEARNING_RATE)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--size", type=int, default=DEFAULT_SIZE)
        p.add_argument("--dim", type=int, default=DEFAULT_DIM)
        p.add_argument("--batch-size", type=int, default=32)
        p.add_argument("--operand-digits", type=int, default=1)
        p.add_argument("--out", required=True)
        if name == "train-toy":
            p.add_argument("--scheme", choices=_SCHEMES, default="f-digits")
        p.set_defaults(func=handler)

    p = sub.add_parser("schema", help="document report keys per subcommand")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_schema)

    return parser


def dispatch(argv: list[str]) -> int:
    """Route argv to a subcommand handler, mapping failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (NumbraError, ValueError) as exc:
        print(f"numbra: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"numbra: i/o error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
