"""Exhaustive enumeration and evaluation of second-layer ensembles.

For K first-layer ensembles there are 2^K - K - 1 subsets of size two or
more; with the canonical twelve architectures that is 4083.  The sweep
evaluates every one of them:

* first-layer votes are computed once per (model, example) and cached as a
  label-index matrix plus a confidence matrix;
* each subset is then combined with a vectorized replica of
  ``majority_vote_with_confidence`` (bincount majorities, argmax fallback)
  whose outputs are bit-identical to the scalar rule;
* results are ranked by (F1 desc, member count asc, members asc), a total
  deterministic order, so equal-F1 ties surface the smallest ensemble.

Subsets are independent, so evaluation may be parallelized; results are
merged back into canonical order, which keeps serialized reports
byte-identical whatever the worker count.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Callable, Iterator, Sequence

import numpy as np

from .combiner import (
    DEFAULT_POLICY,
    CombinePolicy,
    FirstLayerEnsemble,
    SecondLayerEnsemble,
    first_layer_predict,
)
from .corpus import GoldSet, LabelSpace
from .errors import NoMatchingEnsembleError, TooFewModelsError
from .metrics import macro_f1_from_counts, micro_f1_from_counts, round_score
from .prediction_store import RunSet

F1_MICRO = "micro"
F1_MACRO = "macro"

SCHEMA_VERSION = 1
TIE_BREAK = "earliest-voter"
TOP_PREDICTIONS_RETAINED = 25


def subset_count(n_models: int, min_size: int = 2) -> int:
    """Closed form for the number of subsets of size >= min_size."""
    return sum(comb(n_models, size) for size in range(min_size, n_models + 1))


def enumerate_subsets(
    model_ids: Sequence[str],
    min_size: int = 2,
) -> Iterator[SecondLayerEnsemble]:
    """Yield every subset of size >= min_size exactly once.

    Canonical order: increasing size, then lexicographic members.
    """
    ids = tuple(sorted(model_ids))
    if len(set(ids)) != len(ids):
        raise ValueError("model ids must be distinct")
    if len(ids) < min_size:
        raise TooFewModelsError(
            f"{len(ids)} models cannot form ensembles of size >= {min_size}"
        )
    for size in range(min_size, len(ids) + 1):
        for members in combinations(ids, size):
            yield SecondLayerEnsemble(member_model_ids=members)


@dataclass(frozen=True)
class EnsembleResult:
    """One evaluated ensemble: its members, score, and (optionally) predictions."""

    ensemble: SecondLayerEnsemble | FirstLayerEnsemble
    f1: float
    predictions: tuple[str, ...] | None = None

    @property
    def members(self) -> tuple[str, ...]:
        if isinstance(self.ensemble, FirstLayerEnsemble):
            return (self.ensemble.model_id,)
        return self.ensemble.member_model_ids

    @property
    def layer(self) -> int:
        return 1 if isinstance(self.ensemble, FirstLayerEnsemble) else 2


@dataclass(frozen=True)
class SweepReport:
    """Every enumerated ensemble's score, in canonical rank order."""

    dataset_id: str
    results: tuple[EnsembleResult, ...]
    best: EnsembleResult
    first_layer: tuple[EnsembleResult, ...]
    f1_mode: str
    min_size: int
    policy: CombinePolicy


@dataclass(frozen=True, eq=False)
class VoteTable:
    """Cached first-layer votes: row per model (sorted), column per example."""

    model_ids: tuple[str, ...]
    label_cols: np.ndarray  # (M, N) int64: label-space column of each vote
    confidences: np.ndarray  # (M, N) float64
    gold_cols: np.ndarray  # (N,) int64
    labels: LabelSpace
    n_label_cols: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_label_cols", len(self.labels))
        for array in (self.label_cols, self.confidences, self.gold_cols):
            array.flags.writeable = False

    def row_of(self, model_id: str) -> int:
        return self.model_ids.index(model_id)


def build_vote_table(
    runs: RunSet,
    gold: GoldSet,
    labels: LabelSpace,
    policy: CombinePolicy = DEFAULT_POLICY,
) -> VoteTable:
    """Compute every model's first-layer vote for every example, once."""
    model_ids = runs.model_ids()
    n = len(gold)
    label_cols = np.empty((len(model_ids), n), dtype=np.int64)
    confidences = np.empty((len(model_ids), n), dtype=np.float64)
    for row, model_id in enumerate(model_ids):
        ensemble = FirstLayerEnsemble.for_model(runs, model_id)
        for i in range(n):
            vote = first_layer_predict(ensemble, runs, i, policy)
            label_cols[row, i] = labels.position(vote.label)
            confidences[row, i] = vote.confidence
    gold_cols = np.array([labels.position(g) for g in gold.gold_labels()], dtype=np.int64)
    return VoteTable(
        model_ids=model_ids,
        label_cols=label_cols,
        confidences=confidences,
        gold_cols=gold_cols,
        labels=labels,
    )


def combine_rows(table: VoteTable, member_rows: Sequence[int]) -> np.ndarray:
    """Vectorized majority-vote-with-confidence across the given model rows.

    Returns the predicted label column per example.  Matches the scalar
    combiner exactly: strict majorities first, then the highest-confidence
    vote with ties to the earliest row (rows are in member order).
    """
    rows = np.asarray(member_rows, dtype=np.intp)
    votes = table.label_cols[rows]  # (m, N)
    confs = table.confidences[rows]  # (m, N)
    m, n = votes.shape
    if m == 1:
        return votes[0]
    # per-(label, example) support counts via one flat bincount
    flat = votes * n + np.arange(n, dtype=np.int64)[None, :]
    counts = np.bincount(flat.ravel(), minlength=table.n_label_cols * n)
    counts = counts.reshape(table.n_label_cols, n)
    majority_label = counts.argmax(axis=0)
    has_majority = counts.max(axis=0) * 2 > m
    # fallback: argmax over confidences picks the earliest row on exact ties
    fallback_rows = confs.argmax(axis=0)
    fallback_label = votes[fallback_rows, np.arange(n)]
    return np.where(has_majority, majority_label, fallback_label)


def score_prediction_cols(
    predicted: np.ndarray,
    gold_cols: np.ndarray,
    labels: LabelSpace,
    f1_mode: str,
) -> float:
    """F1 percent from predicted/gold label columns (same floats as metrics)."""
    if f1_mode == F1_MICRO:
        tp = int(np.count_nonzero(predicted == gold_cols))
        wrong = int(predicted.shape[0]) - tp
        return micro_f1_from_counts(tp, wrong, wrong)
    if f1_mode == F1_MACRO:
        n_cols = len(labels)
        correct = predicted == gold_cols
        tp = np.bincount(gold_cols[correct], minlength=n_cols)
        pred_ct = np.bincount(predicted, minlength=n_cols)
        gold_ct = np.bincount(gold_cols, minlength=n_cols)
        per_label = {}
        for col in range(n_cols):
            if pred_ct[col] + gold_ct[col] == 0:
                continue  # class absent from both sides is excluded
            t = int(tp[col])
            per_label[labels.labels[col]] = (t, int(pred_ct[col]) - t, int(gold_ct[col]) - t)
        return macro_f1_from_counts(per_label)
    raise ValueError(f"unknown f1 mode {f1_mode!r}")


def run_sweep(
    runs: RunSet,
    gold: GoldSet,
    labels: LabelSpace,
    retain_predictions: bool = False,
    min_size: int = 2,
    f1_mode: str = F1_MICRO,
    policy: CombinePolicy = DEFAULT_POLICY,
    jobs: int = 1,
) -> SweepReport:
    """Evaluate every second-layer ensemble and rank the results.

    ``retain_predictions`` keeps per-example labels on every result; off
    (the default, to bound memory on full sweeps), only the top
    ``TOP_PREDICTIONS_RETAINED`` results are re-evaluated with retention.
    The report is identical for any ``jobs`` value.
    """
    if len(runs.model_ids()) < max(min_size, 2):
        raise TooFewModelsError(
            f"sweep needs at least {max(min_size, 2)} models, got {len(runs.model_ids())}"
        )
    table = build_vote_table(runs, gold, labels, policy)
    subsets = [
        tuple(table.row_of(m) for m in ens.member_model_ids)
        for ens in enumerate_subsets(table.model_ids, min_size=min_size)
    ]

    def evaluate(member_rows: tuple[int, ...]) -> float:
        predicted = combine_rows(table, member_rows)
        return score_prediction_cols(predicted, table.gold_cols, table.labels, f1_mode)

    if jobs > 1:
        chunk = max(1, len(subsets) // (jobs * 8))
        pieces = [subsets[i : i + chunk] for i in range(0, len(subsets), chunk)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scored = [
                f1
                for piece in pool.map(lambda p: [evaluate(s) for s in p], pieces)
                for f1 in piece
            ]
    else:
        scored = [evaluate(s) for s in subsets]

    results = [
        EnsembleResult(
            ensemble=SecondLayerEnsemble(
                member_model_ids=tuple(table.model_ids[r] for r in member_rows)
            ),
            f1=f1,
        )
        for member_rows, f1 in zip(subsets, scored)
    ]
    results.sort(key=lambda r: (-r.f1, len(r.members), r.members))

    keep = len(results) if retain_predictions else min(TOP_PREDICTIONS_RETAINED, len(results))
    retained = []
    for result in results[:keep]:
        member_rows = tuple(table.row_of(m) for m in result.members)
        predicted = combine_rows(table, member_rows)
        retained.append(
            EnsembleResult(
                ensemble=result.ensemble,
                f1=result.f1,
                predictions=tuple(labels.labels[c] for c in predicted),
            )
        )
    results = retained + results[keep:]

    first_layer = tuple(
        EnsembleResult(
            ensemble=FirstLayerEnsemble.for_model(runs, model_id),
            f1=score_prediction_cols(
                table.label_cols[row], table.gold_cols, table.labels, f1_mode
            ),
        )
        for row, model_id in enumerate(table.model_ids)
    )

    return SweepReport(
        dataset_id=gold.dataset_id,
        results=tuple(results),
        best=results[0],
        first_layer=first_layer,
        f1_mode=f1_mode,
        min_size=min_size,
        policy=policy,
    )


def best_subject_to(
    report: SweepReport,
    predicate: Callable[[EnsembleResult], bool],
) -> EnsembleResult:
    """Top-ranked result whose member set satisfies the predicate."""
    for result in report.results:
        if predicate(result):
            return result
    raise NoMatchingEnsembleError("no enumerated ensemble satisfies the predicate")


# --- serialization ---------------------------------------------------------


def result_to_dict(result: EnsembleResult) -> dict:
    data = {
        "members": list(result.members),
        "size": len(result.members),
        "layer": result.layer,
        "f1": result.f1,
    }
    if result.predictions is not None:
        data["predictions"] = list(result.predictions)
    return data


def report_to_dict(report: SweepReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "dataset_id": report.dataset_id,
        "f1_mode": report.f1_mode,
        "min_size": report.min_size,
        "policy": {
            "majority_confidence": report.policy.majority_confidence,
            "first_layer_mode": report.policy.first_layer_mode,
            "tie_break": TIE_BREAK,
        },
        "model_ids": [r.members[0] for r in report.first_layer],
        "first_layer": [result_to_dict(r) for r in report.first_layer],
        "result_count": len(report.results),
        "best": result_to_dict(report.best),
        "results": [result_to_dict(r) for r in report.results],
    }


def write_report_json(report: SweepReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report_to_dict(report), handle, indent=2)
        handle.write("\n")


def write_report_csv(report: SweepReport, path: str) -> None:
    """Ranked results as ``members,size,f1_percent`` (two decimals, half-up)."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("members,size,f1_percent\n")
        for result in report.results:
            f1 = f"{round_score(result.f1):.2f}"
            handle.write(f"{'+'.join(result.members)},{len(result.members)},{f1}\n")
