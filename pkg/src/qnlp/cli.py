"""Command-line driver: ``qnlp {train,eval,count-params,export-metrics}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data or checkpoint
error, 3 numeric failure. Errors print one ``error: <kind>: <reason>`` line
to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import data as D
from .checkpoint import CheckpointError
from .config import ConfigError, make_config, read_config_file
from .qlstm import count_parameters
from .training import CHECKPOINT_FILE, NumericError, build_model, evaluate, export_metrics, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--task", choices=["pos", "sentiment", "embed-classify"])
    p.add_argument("--mode", choices=["classical", "quantum"])
    p.add_argument("--config", help="flat 'key = value' file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--vocab-size", type=int, help="vocabulary size (sentiment: frequency cap)")
    p.add_argument("--limit", type=int, help="max reviews per class (sentiment)")
    p.add_argument("--data-dir", help="IMDB root folder, or embeddings file for embed-classify")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qnlp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model and write metrics plus a checkpoint")
    _add_run_flags(p)
    p.add_argument("--out-dir")
    p.add_argument("--no-wallclock", action="store_true", help="write 0 in the seconds column")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", help=f"defaults to <out-dir>/{CHECKPOINT_FILE}")
    p.add_argument("--out-dir")
    p.add_argument("--data-dir")
    p.add_argument("--split", choices=["train", "test"], default="train")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("count-params", help="print the trainable-parameter breakdown")
    _add_run_flags(p)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("export-metrics", help="write metrics.csv from a run directory")
    p.add_argument("run_dir", nargs="?")
    p.add_argument("--out-dir")
    p.add_argument("--output", help="destination file (default <run-dir>/metrics.csv)")
    return parser


def _config_from_args(args) -> "RunConfig":  # noqa: F821
    file_values = read_config_file(args.config) if args.config else None
    overrides = {
        "task": args.task,
        "mode": args.mode,
        "seed": args.seed,
        "epochs": args.epochs,
        "lr": args.lr,
        "batch_size": args.batch_size,
        "vocab_size": args.vocab_size,
        "limit": args.limit,
        "data_dir": args.data_dir,
    }
    if getattr(args, "out_dir", None):
        overrides["out_dir"] = args.out_dir
    if getattr(args, "no_wallclock", False):
        overrides["wallclock"] = False
    return make_config(None, file_values, **overrides)


def _print_row(row, as_json: bool) -> None:
    if as_json:
        print(json.dumps(asdict(row)))
    else:
        print(f"epoch={row.epoch} split={row.split} loss={row.loss:.6f} accuracy={row.accuracy:.4f}")


def cmd_train(args) -> int:
    config = _config_from_args(args)
    result = train(config)
    row = result.rows[-1] if result.rows else result.initial
    _print_row(row, args.json)
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.checkpoint:
        ckpt = Path(args.checkpoint)
    elif args.out_dir:
        ckpt = Path(args.out_dir) / CHECKPOINT_FILE
    else:
        raise UsageError("eval needs --checkpoint or --out-dir")
    _print_row(evaluate(ckpt, args.data_dir, args.split), args.json)
    return EXIT_OK


def cmd_count_params(args) -> int:
    config = _config_from_args(args)
    input_dim = None
    if config.task == "embed-classify":
        if config.data_dir:
            records = D.load_embeddings(config.data_dir)
            input_dim = len(records[0].vector) if records else 0
        else:
            input_dim = len(D.separable_embeddings(n=1).pop().vector)
    model = build_model(config, np.random.default_rng(0), input_dim)
    total, rows = count_parameters(model)
    if args.json:
        print(json.dumps({
            "task": config.task,
            "mode": config.mode,
            "total": total,
            "arrays": [{"name": n, "shape": list(s), "count": c} for n, s, c in rows],
        }))
    else:
        width = max(len(n) for n, _, _ in rows)
        for name, shape, n in rows:
            print(f"{name:<{width}}  {'x'.join(map(str, shape)):>10}  {n:>8}")
        print(f"{'total':<{width}}  {'':>10}  {total:>8}")
    return EXIT_OK


def cmd_export_metrics(args) -> int:
    run_dir = args.run_dir or args.out_dir
    if not run_dir:
        raise UsageError("export-metrics needs a run directory")
    print(export_metrics(run_dir, args.output))
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "count-params": cmd_count_params,
    "export-metrics": cmd_export_metrics,
}


def _fail(code: int, kind: str, err: BaseException) -> int:
    reason = " ".join(str(err).split()) or type(err).__name__
    print(f"error: {kind}: {reason}", file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        return _fail(EXIT_USAGE, "usage", err)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as err:
        return _fail(EXIT_USAGE, "usage", err)
    except NumericError as err:
        return _fail(EXIT_NUMERIC, "numeric", err)
    except (CheckpointError, D.FormatError, OSError, KeyError, IndexError) as err:
        return _fail(EXIT_DATA, "data", err)
    except Exception as err:  # anything unexpected still gets a one-line reason
        return _fail(EXIT_USAGE, "internal", err)


if __name__ == "__main__":
    sys.exit(main())
