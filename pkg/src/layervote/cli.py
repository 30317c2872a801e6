"""Command-line surface: validate, sweep, paper-check, train-toy, synth.

Exit codes: 0 success, 1 computation failure or check mismatch, 2 input or
usage error.  All outputs are UTF-8; every score renders with exactly two
decimals, half-up.
"""

import argparse
import os
import sys

from . import reports
from .corpus import load_gold, load_label_space, save_gold, save_label_space
from .enumeration import run_sweep, write_report_csv, write_report_json
from .errors import CorpusError, LayervoteError, MissingFixtureError, StoreError
from .metrics import round_score
from .prediction_store import (
    Diagnostic,
    load_manifest,
    load_runset,
    read_matrix_csv,
    save_runset,
    validate_matrix,
)
from .published import (
    PUBLISHED_SCORES_RESOURCE,
    load_published_scores,
    load_toy_corpus,
)
from .toy_models import (
    SyntheticPredictorConfig,
    generate_synthetic_runs,
    make_synthetic_gold,
    standard_toy_configs,
    train_toy_runs,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layervote",
        description="Two-layer ensemble sweeps over stored prediction runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check every manifest matrix against a gold corpus")
    p.add_argument("--manifest", required=True, help="run manifest JSON")
    p.add_argument("--corpus", required=True, help="gold JSONL corpus")
    p.add_argument("--labels", help="label-space JSON (default: inferred from corpus)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="rank every ensemble of first-layer ensembles")
    p.add_argument("--manifest", required=True, help="run manifest JSON")
    p.add_argument("--corpus", required=True, help="gold JSONL corpus")
    p.add_argument("--labels", help="label-space JSON (default: inferred from corpus)")
    p.add_argument("--min-size", type=int, default=2, help="smallest subset size (default 2)")
    p.add_argument("--gain-mode", choices=["mean", "min"], default="mean")
    p.add_argument("--f1", choices=["micro", "macro"], default="micro")
    p.add_argument("--jobs", type=int, default=1, help="parallel evaluation threads")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "paper-check",
        help="recompute the published reference statistics and compare to reported values",
    )
    p.add_argument(
        "--fixtures",
        help="fixture file or directory containing published_scores.json (default: bundled)",
    )
    p.set_defaults(func=cmd_paper_check)

    p = sub.add_parser("train-toy", help="train the 12 bundled toy models and export their runs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=7, help="base seed (default 7)")
    p.add_argument("--train", help="training JSONL (default: bundled toy corpus)")
    p.add_argument("--test", help="test JSONL (required with --train)")
    p.add_argument("--labels", help="label-space JSON")
    p.set_defaults(func=cmd_train_toy)

    p = sub.add_parser("synth", help="generate seeded synthetic predictor runs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--accuracy", type=float, default=0.7)
    p.add_argument("--correlation", type=float, default=0.0)
    p.add_argument("--sharpness", type=float, default=2.0)
    p.add_argument("--predictors", type=int, default=3)
    p.add_argument("--examples", type=int, default=1000)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    return parser


def _load_corpus(corpus_path: str, labels_path: str | None, dataset_id: str):
    space = load_label_space(labels_path) if labels_path else None
    return load_gold(corpus_path, label_space=space, dataset_id=dataset_id)


def cmd_validate(args) -> int:
    """Collect every violation across all runs; exit 0 only if none."""
    dataset_id, entries = load_manifest(args.manifest)
    labels, gold = _load_corpus(args.corpus, args.labels, dataset_id)
    diagnostics = []
    for entry in entries:
        try:
            matrix = read_matrix_csv(entry.path)
        except (LayervoteError, OSError) as exc:
            diagnostics.append(
                Diagnostic(code="unreadable", message=str(exc), path=entry.path)
            )
            continue
        diagnostics.extend(validate_matrix(matrix, len(gold), len(labels), path=entry.path))
    for diag in diagnostics:
        print(diag.render())
    verdict = "ok" if not diagnostics else "invalid"
    print(f"{verdict}: {len(entries)} runs checked, {len(diagnostics)} diagnostics")
    return 0 if not diagnostics else 1


def cmd_sweep(args) -> int:
    dataset_id, _ = load_manifest(args.manifest)
    labels, gold = _load_corpus(args.corpus, args.labels, dataset_id)
    runs = load_runset(args.manifest, gold, labels)
    report = run_sweep(
        runs, gold, labels, min_size=args.min_size, f1_mode=args.f1, jobs=args.jobs
    )
    os.makedirs(args.out, exist_ok=True)
    write_report_json(report, os.path.join(args.out, "sweep_results.json"))
    write_report_csv(report, os.path.join(args.out, "sweep_results.csv"))
    document = reports.build_report(report, runs, gold, labels, gain_mode=args.gain_mode)
    reports.write_document_json(document, os.path.join(args.out, "report.json"))
    reports.write_first_layer_csv(document, os.path.join(args.out, "first_layer.csv"))
    print(f"BEST {'+'.join(report.best.members)} F1={round_score(report.best.f1):.2f}")
    return 0


def cmd_paper_check(args) -> int:
    if args.fixtures:
        path = args.fixtures
        if os.path.isdir(path):
            path = os.path.join(path, PUBLISHED_SCORES_RESOURCE)
        scores = load_published_scores(path)
    else:
        scores = load_published_scores()
    rows = reports.paper_check(scores)
    print(reports.format_check_table(rows))
    failed = [row for row in rows if not row.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    return 0 if not failed else 1


def cmd_train_toy(args) -> int:
    if args.train or args.test:
        if not (args.train and args.test):
            print("error: --train and --test must be given together", file=sys.stderr)
            return 2
        space = load_label_space(args.labels) if args.labels else None
        labels, train_gold = load_gold(args.train, label_space=space)
        _, test_gold = load_gold(args.test, label_space=labels)
    else:
        labels, train_gold, test_gold = load_toy_corpus()
    configs = standard_toy_configs(base_seed=args.seed)
    runs, _ = train_toy_runs(configs, train_gold, test_gold, labels)
    os.makedirs(args.out, exist_ok=True)
    manifest_path = save_runset(runs, args.out)
    save_gold(test_gold, os.path.join(args.out, "test.jsonl"))
    save_label_space(labels, os.path.join(args.out, "labels.json"))
    print(f"trained {len(runs.runs)} runs -> {manifest_path}")
    return 0


def cmd_synth(args) -> int:
    labels, gold = make_synthetic_gold(args.examples, args.classes, args.seed)
    config = SyntheticPredictorConfig(
        accuracy=args.accuracy,
        correlation=args.correlation,
        confidence_sharpness=args.sharpness,
        seed=args.seed + 1,  # distinct stream from the gold draw
    )
    runs = generate_synthetic_runs(config, args.predictors, gold, labels)
    os.makedirs(args.out, exist_ok=True)
    manifest_path = save_runset(runs, args.out)
    save_gold(gold, os.path.join(args.out, "synth.jsonl"))
    save_label_space(labels, os.path.join(args.out, "labels.json"))
    print(f"generated {args.predictors} synthetic runs -> {manifest_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, StoreError, MissingFixtureError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LayervoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
