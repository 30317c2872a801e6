"""F1 scores and ensemble gain statistics.

All scores are percentages in [0, 100].  The default score is micro-averaged
F1, which in this single-label multiclass setting equals plain accuracy;
macro-averaged F1 (equal class weights) is available everywhere micro is.

Gains come in two modes because published summaries mix them: ``GAIN_VS_MEAN``
measures an ensemble against the mean of its constituent scores and
``GAIN_VS_MIN`` against the weakest constituent.  Every report labels which
mode produced its numbers.
"""

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from .corpus import GoldSet, IntentLabel
from .errors import DatasetMismatchError, EmptyConstituentsError, LengthMismatchError

GAIN_VS_MEAN = "mean"
GAIN_VS_MIN = "min"


def round_score(value: float, places: int = 2) -> float:
    """Half-up rounding to the table presentation precision."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def _gold_labels(gold: GoldSet | Sequence[IntentLabel]) -> Sequence[IntentLabel]:
    if isinstance(gold, GoldSet):
        return gold.gold_labels()
    return gold


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-label true-positive / false-positive / false-negative tallies."""

    tp: dict[IntentLabel, int]
    fp: dict[IntentLabel, int]
    fn: dict[IntentLabel, int]
    total: int

    @classmethod
    def from_predictions(
        cls,
        predictions: Sequence[IntentLabel],
        gold: GoldSet | Sequence[IntentLabel],
    ) -> "ConfusionCounts":
        gold_labels = _gold_labels(gold)
        if len(predictions) != len(gold_labels):
            raise LengthMismatchError(
                f"{len(predictions)} predictions vs {len(gold_labels)} gold labels"
            )
        tp: dict[IntentLabel, int] = {}
        fp: dict[IntentLabel, int] = {}
        fn: dict[IntentLabel, int] = {}
        for pred, truth in zip(predictions, gold_labels):
            if pred == truth:
                tp[truth] = tp.get(truth, 0) + 1
            else:
                fp[pred] = fp.get(pred, 0) + 1
                fn[truth] = fn.get(truth, 0) + 1
        return cls(tp=tp, fp=fp, fn=fn, total=len(gold_labels))

    def labels(self) -> set[IntentLabel]:
        """Labels present in predictions or gold (TP, FP or FN somewhere)."""
        return set(self.tp) | set(self.fp) | set(self.fn)


def micro_f1_from_counts(tp: int, fp: int, fn: int) -> float:
    """Micro F1 percent from pooled integer counts.

    Shared by the scalar scorer and the vectorized sweep so both produce
    bit-identical floats for identical counts.
    """
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 100.0 * 2 * tp / denom


def macro_f1_from_counts(per_label: Mapping[IntentLabel, tuple[int, int, int]]) -> float:
    """Macro F1 percent from per-label (tp, fp, fn) counts.

    Classes are accumulated in sorted label order so the result does not
    depend on dict or set iteration order.
    """
    if not per_label:
        return 0.0
    total = 0.0
    for label in sorted(per_label):
        tp, fp, fn = per_label[label]
        total += 2 * tp / (2 * tp + fp + fn)
    return 100.0 * total / len(per_label)


def micro_f1(
    predictions: Sequence[IntentLabel],
    gold: GoldSet | Sequence[IntentLabel],
) -> float:
    """Micro-averaged F1 percent from globally pooled counts.

    With exactly one label per example, pooled FP and FN coincide, so this
    equals accuracy; it is still computed from the pooled counts.
    """
    counts = ConfusionCounts.from_predictions(predictions, gold)
    return micro_f1_from_counts(
        sum(counts.tp.values()), sum(counts.fp.values()), sum(counts.fn.values())
    )


def macro_f1(
    predictions: Sequence[IntentLabel],
    gold: GoldSet | Sequence[IntentLabel],
) -> float:
    """Mean of per-class F1 percents, every observed class weighted equally."""
    counts = ConfusionCounts.from_predictions(predictions, gold)
    per_label = {
        label: (counts.tp.get(label, 0), counts.fp.get(label, 0), counts.fn.get(label, 0))
        for label in counts.labels()
    }
    return macro_f1_from_counts(per_label)


def first_layer_gain(
    ensemble_f1: float,
    constituent_f1s: Sequence[float],
    mode: str = GAIN_VS_MEAN,
) -> float:
    """Ensemble score minus the mean (or minimum) of its constituent scores."""
    if not constituent_f1s:
        raise EmptyConstituentsError("gain needs at least one constituent score")
    if mode == GAIN_VS_MEAN:
        baseline = sum(constituent_f1s) / len(constituent_f1s)
    elif mode == GAIN_VS_MIN:
        baseline = min(constituent_f1s)
    else:
        raise ValueError(f"unknown gain mode {mode!r}")
    return ensemble_f1 - baseline


@dataclass(frozen=True)
class GainStats:
    """Both gain readings plus the per-model contributions behind them."""

    gain_vs_mean: float
    gain_vs_min: float
    per_model: dict[str, dict[str, float]]


def layer_gain_stats(table: Mapping[str, tuple[Sequence[float], float]]) -> GainStats:
    """Per-model and averaged gains for a model -> (run scores, ensemble) table."""
    if not table:
        raise EmptyConstituentsError("empty gain table")
    per_model = {
        model: {
            GAIN_VS_MEAN: first_layer_gain(ensemble, runs, GAIN_VS_MEAN),
            GAIN_VS_MIN: first_layer_gain(ensemble, runs, GAIN_VS_MIN),
        }
        for model, (runs, ensemble) in table.items()
    }
    n = len(per_model)
    return GainStats(
        gain_vs_mean=sum(g[GAIN_VS_MEAN] for g in per_model.values()) / n,
        gain_vs_min=sum(g[GAIN_VS_MIN] for g in per_model.values()) / n,
        per_model=per_model,
    )


def dataset_layer_gain(
    table: Mapping[str, tuple[Sequence[float], float]],
    mode: str = GAIN_VS_MEAN,
) -> float:
    """Mean over models of first_layer_gain for one dataset."""
    stats = layer_gain_stats(table)
    return stats.gain_vs_mean if mode == GAIN_VS_MEAN else stats.gain_vs_min


def total_gain(best_individual_f1: float, best_second_layer_f1: float) -> float:
    """Headline improvement: best second-layer ensemble over best single run.

    Never clamped; a negative value means ensembling lost to the best run.
    """
    return best_second_layer_f1 - best_individual_f1


def pairwise_ensemble_increase(
    ensemble_f1s_by_dataset: Mapping[str, float],
    component_ensemble_f1s_by_dataset: Mapping[str, Sequence[float]],
    mode: str = GAIN_VS_MEAN,
) -> float:
    """Average increase of a cross-model ensemble over its component ensembles.

    Per dataset the increase is the mean (or, in ``GAIN_VS_MIN`` mode, the
    worst-component) difference between the ensemble's score and each
    component's; the result is the mean across datasets.  This implements
    the stated definition of the published "average increase" column; the
    published column itself is not reproducible from it (see
    docs in the reports module), so nothing asserts equality with it.
    """
    if set(ensemble_f1s_by_dataset) != set(component_ensemble_f1s_by_dataset):
        raise DatasetMismatchError(
            "ensemble and component tables cover different datasets: "
            f"{sorted(ensemble_f1s_by_dataset)} vs {sorted(component_ensemble_f1s_by_dataset)}"
        )
    if not ensemble_f1s_by_dataset:
        raise EmptyConstituentsError("no datasets")
    increases = []
    for dataset, ensemble in ensemble_f1s_by_dataset.items():
        components = component_ensemble_f1s_by_dataset[dataset]
        increases.append(first_layer_gain(ensemble, components, mode))
    return sum(increases) / len(increases)


def accuracy(
    predictions: Sequence[IntentLabel],
    gold: GoldSet | Sequence[IntentLabel],
) -> float:
    """Plain percent correct."""
    gold_labels = _gold_labels(gold)
    if len(predictions) != len(gold_labels):
        raise LengthMismatchError(
            f"{len(predictions)} predictions vs {len(gold_labels)} gold labels"
        )
    if not gold_labels:
        return 0.0
    correct = sum(1 for p, g in zip(predictions, gold_labels) if p == g)
    return 100.0 * correct / len(gold_labels)
