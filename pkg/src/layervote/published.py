"""Access to the bundled reference-score fixture.

The fixture records previously published micro-F1 scores for a 12-model,
3-initialization, 3-dataset study, together with the ensemble results and
gain statistics reported alongside them.  The consistency checks in
:mod:`layervote.reports` recompute every derivable statistic from the
per-run scores and compare against the reported values.
"""

import json
from dataclasses import dataclass
from importlib import resources

from .corpus import GoldSet, LabelSpace, load_gold, load_label_space
from .errors import MissingFixtureError

PUBLISHED_SCORES_RESOURCE = "published_scores.json"
TOY_TRAIN_RESOURCE = "toy_train.jsonl"
TOY_TEST_RESOURCE = "toy_test.jsonl"
TOY_LABELS_RESOURCE = "toy_labels.json"


def _fixture_text(name: str) -> str:
    ref = resources.files("layervote") / "fixtures" / name
    try:
        return ref.read_text(encoding="utf-8")
    except (FileNotFoundError, ModuleNotFoundError) as exc:
        raise MissingFixtureError(f"bundled fixture {name!r} is missing") from exc


def fixture_path(name: str):
    """Filesystem path of a bundled fixture (fixtures ship as real files)."""
    ref = resources.files("layervote") / "fixtures" / name
    if not ref.is_file():
        raise MissingFixtureError(f"bundled fixture {name!r} is missing")
    return ref


def load_toy_corpus() -> tuple[LabelSpace, GoldSet, GoldSet]:
    """The bundled toy intent corpus: (labels, train gold, test gold)."""
    labels = load_label_space(str(fixture_path(TOY_LABELS_RESOURCE)))
    _, train_gold = load_gold(str(fixture_path(TOY_TRAIN_RESOURCE)), label_space=labels)
    _, test_gold = load_gold(str(fixture_path(TOY_TEST_RESOURCE)), label_space=labels)
    return labels, train_gold, test_gold


@dataclass(frozen=True)
class PublishedScores:
    """Typed view over the reference-score fixture."""

    datasets: tuple[str, ...]
    models: dict
    first_layer: dict
    two_model_cnn_ensembles: list
    best_cnn_ensembles: dict
    best_rnn_ensembles: dict
    best_overall_ensembles: dict
    char_embedding_best: dict
    reported_gains: dict
    reported_rnn_first_layer_gain: dict

    def run_scores(self, dataset: str, model_id: str) -> list[float]:
        return list(self.first_layer[dataset][model_id]["runs"])

    def ensemble_score(self, dataset: str, model_id: str) -> float:
        return float(self.first_layer[dataset][model_id]["ensemble"])

    def model_ids(self) -> list[str]:
        return sorted(self.models)

    def family(self, model_id: str) -> str:
        return self.models[model_id]["family"]

    def uses_char(self, model_id: str) -> bool:
        return bool(self.models[model_id]["char"])

    def best_individual(self, dataset: str) -> float:
        return max(
            score for model in self.models for score in self.run_scores(dataset, model)
        )


def load_published_scores(path: str | None = None) -> PublishedScores:
    """Load the bundled fixture, or the same-format file from ``path``."""
    if path is None:
        text = _fixture_text(PUBLISHED_SCORES_RESOURCE)
    else:
        try:
            with open(path, encoding="utf-8") as handle:
                text = handle.read()
        except FileNotFoundError as exc:
            raise MissingFixtureError(f"fixture file {path!r} is missing") from exc
    data = json.loads(text)
    return PublishedScores(
        datasets=tuple(data["datasets"]),
        models=data["models"],
        first_layer=data["first_layer"],
        two_model_cnn_ensembles=data["two_model_cnn_ensembles"],
        best_cnn_ensembles=data["best_cnn_ensembles"],
        best_rnn_ensembles=data["best_rnn_ensembles"],
        best_overall_ensembles=data["best_overall_ensembles"],
        char_embedding_best=data["char_embedding_best"],
        reported_gains=data["reported_gains"],
        reported_rnn_first_layer_gain=data["reported_rnn_first_layer_gain"],
    )
