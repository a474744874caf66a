"""Command-line interface.

Subcommands: prepare, sweep, report, train, eval. Exit codes: 0 on
success, 1 for usage errors (bad flags, bad config, unknown model),
2 for data and training errors (unreadable files, bad formats,
diverging solvers).
"""

from __future__ import annotations

import argparse
import sys

from .config import MODEL_NAMES, config_from_file
from .errors import DataError, PyroclassError, UsageError
from .experiment import (cmd_eval, cmd_prepare, cmd_report, cmd_sweep,
                         cmd_train, format_eval_row, load_report)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; remap to UsageError."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pyroclass",
                     description="kernel-method image classification "
                                 "experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="materialize per-resolution "
                                       "datasets")
    p.add_argument("--config", required=True, help="experiment config JSON")

    p = sub.add_parser("sweep", help="grid-search all models and "
                                     "resolutions, write reports")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--prepare", action="store_true",
                   help="run prepare first if datasets are missing")

    p = sub.add_parser("report", help="re-render CSV and SVG outputs "
                                      "from a report.json")
    p.add_argument("--in", dest="report_path", required=True,
                   help="path to report.json")
    p.add_argument("--out", dest="out_dir", required=True,
                   help="output directory")

    p = sub.add_parser("train", help="grid-search one model at one "
                                     "resolution and save it")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--model", required=True, choices=MODEL_NAMES)
    p.add_argument("--resolution", required=True, type=int)
    p.add_argument("--out", dest="out_path", required=True,
                   help="model file to write")

    p = sub.add_parser("eval", help="score a saved model on an FFDS "
                                    "dataset")
    p.add_argument("--model-file", required=True)
    p.add_argument("--data", required=True, help="FFDS dataset file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "prepare":
            cfg = config_from_file(args.config)
            manifest = cmd_prepare(cfg)
            print(f"wrote {len(manifest)} dataset files under "
                  f"{cfg.dataset_dir()}")
        elif args.command == "sweep":
            cfg = config_from_file(args.config)
            report = cmd_sweep(cfg, implicit_prepare=args.prepare)
            print(f"sweep finished: {len(report.rows)} result rows, "
                  f"{len(report.failures)} failures; outputs in "
                  f"{cfg.output_dir}")
            for failure in report.failures:
                where = failure["test_set"] or "grid"
                print(f"  failed: {failure['model']} "
                      f"res={failure['resolution']} [{where}]: "
                      f"{failure['error']}", file=sys.stderr)
        elif args.command == "report":
            report = load_report(args.report_path)
            written = cmd_report(report, args.out_dir)
            for path in written:
                print(path)
        elif args.command == "train":
            cfg = config_from_file(args.config)
            info = cmd_train(cfg, args.model, args.resolution,
                             args.out_path)
            print(f"trained {info['model']} at resolution "
                  f"{info['resolution']}: best {info['best_params']} "
                  f"(cv accuracy {info['cv_mean_accuracy']:.6f}) -> "
                  f"{info['model_file']}")
        else:  # eval
            row = cmd_eval(args.model_file, args.data)
            print(format_eval_row(row))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PyroclassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
