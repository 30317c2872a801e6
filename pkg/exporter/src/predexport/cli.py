"""Command line entry point.

One subcommand, ``export``, converts a single run's saved outputs into the
evaluation engine's matrix CSV plus manifest entry.  Exit codes: 0 on
success, 2 on any input or usage problem.
"""

import argparse
import sys

from .errors import ExportError
from .export import KIND_AUTO, KINDS, ExportJob, export_run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="predexport",
        description="Export framework softmax outputs to the engine's manifest + CSV format.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    export = sub.add_parser("export", help="export one run's outputs")
    export.add_argument("--dataset-id", required=True, help="dataset the predictions are for")
    export.add_argument("--model-id", required=True, help="model architecture identifier")
    export.add_argument("--init", type=int, required=True, help="1-based initialization index")
    export.add_argument(
        "--npy-or-csv",
        required=True,
        metavar="PATH",
        help="source N x C array: a .npy dump or a headerless float CSV",
    )
    export.add_argument("--out", required=True, metavar="DIR", help="output directory")
    export.add_argument(
        "--kind",
        choices=KINDS,
        default=KIND_AUTO,
        help="what the source values are; auto detects logits from row sums",
    )
    export.set_defaults(func=cmd_export)
    return parser


def cmd_export(args) -> int:
    job = ExportJob(
        dataset_id=args.dataset_id,
        model_id=args.model_id,
        init_index=args.init,
        source=args.npy_or_csv,
        output_dir=args.out,
        kind=args.kind,
    )
    matrix_path, entry = export_run(job)
    print(f"exported {entry.model_id}#{entry.init_index} -> {matrix_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ExportError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
