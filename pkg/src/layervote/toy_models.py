"""Desk-scale prediction sources: a seeded linear classifier and synthetic voters.

Real ensembling experiments need many trained networks; this module supplies
stand-ins that exercise the same machinery in milliseconds:

* a multinomial logistic-regression text classifier whose feature mode
  (bag-of-words, character n-grams, or both) plays the role of architecture
  diversity and whose seed plays the role of initialization diversity;
* a synthetic predictor generator with dial-a-accuracy and dial-a-correlation
  error structure, for controlled studies against closed-form baselines;
* a seeded generator for a small intent corpus with enough lexical overlap,
  typos, and label noise that the toy models genuinely disagree.

Everything is deterministic given its seed: training uses a fixed epoch /
mini-batch schedule, so retraining reproduces parameters byte for byte.
"""

import json
import random
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import GoldSet, LabelSpace, canonicalize_label
from .errors import (
    DegenerateLabelSpaceError,
    EmptyTrainSetError,
    ShapeMismatchError,
    UnknownLabelError,
)
from .prediction_store import PredictionRun, RunId, RunSet

FEATURE_BAG_OF_WORDS = "bag_of_words"
FEATURE_CHAR_NGRAM = "char_ngram"
FEATURE_BOTH = "both"


@dataclass(frozen=True)
class ToyModelConfig:
    model_id: str
    init_index: int = 1
    feature_mode: str = FEATURE_BAG_OF_WORDS
    ngram_n: int = 3
    seed: int = 0
    epochs: int = 30
    learning_rate: float = 0.5
    l2: float = 1e-4
    batch_size: int = 32

    def __post_init__(self):
        if self.feature_mode not in (FEATURE_BAG_OF_WORDS, FEATURE_CHAR_NGRAM, FEATURE_BOTH):
            raise ValueError(f"unknown feature mode {self.feature_mode!r}")
        if self.feature_mode != FEATURE_BAG_OF_WORDS and not 2 <= self.ngram_n <= 4:
            raise ValueError("char n-gram order must be 2..4")
        if self.epochs <= 0 or self.learning_rate <= 0 or self.l2 < 0 or self.batch_size <= 0:
            raise ValueError("epochs, learning_rate, batch_size must be positive; l2 >= 0")


def extract_features(tokens: tuple[str, ...], mode: str, ngram_n: int) -> Counter:
    """Feature counts for one utterance; names are prefixed by feature kind."""
    feats: Counter = Counter()
    if mode in (FEATURE_BAG_OF_WORDS, FEATURE_BOTH):
        for token in tokens:
            feats[f"w:{token}"] += 1
    if mode in (FEATURE_CHAR_NGRAM, FEATURE_BOTH):
        text = " " + " ".join(tokens) + " "  # boundary spaces mark word edges
        for i in range(len(text) - ngram_n + 1):
            feats[f"c{ngram_n}:{text[i:i + ngram_n]}"] += 1
    return feats


@dataclass(frozen=True, eq=False)
class ModelParameters:
    """Trained weights plus everything needed to featurize new utterances."""

    config: ToyModelConfig
    vocabulary: tuple[str, ...]
    class_labels: tuple[str, ...]
    weights: np.ndarray  # (C, F+1); last column is the bias

    def __post_init__(self):
        self.weights.flags.writeable = False


def _design_matrix(
    gold: GoldSet, vocabulary: tuple[str, ...], config: ToyModelConfig
) -> np.ndarray:
    index = {name: i for i, name in enumerate(vocabulary)}
    x = np.zeros((len(gold), len(vocabulary) + 1), dtype=np.float64)
    x[:, -1] = 1.0
    for row, (_, tokens, _) in enumerate(gold.examples):
        for name, count in extract_features(tokens, config.feature_mode, config.ngram_n).items():
            col = index.get(name)
            if col is not None:
                x[row, col] = count
    return x


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def train_toy_model(
    config: ToyModelConfig,
    train_gold: GoldSet,
    labels: LabelSpace,
) -> ModelParameters:
    """Gradient descent on L2-regularized cross-entropy, fully seeded.

    The RNG stream is consumed in a fixed order (initial weights first, then
    one batch permutation per epoch), so identical inputs give identical
    parameters.
    """
    if len(train_gold) == 0:
        raise EmptyTrainSetError("training set is empty")
    for _, _, gold_label in train_gold.examples:
        if gold_label not in labels:
            raise UnknownLabelError(f"train label {gold_label!r} not in label space")

    vocabulary = tuple(
        sorted(
            {
                name
                for _, tokens, _ in train_gold.examples
                for name in extract_features(tokens, config.feature_mode, config.ngram_n)
            }
        )
    )
    x = _design_matrix(train_gold, vocabulary, config)
    y = np.array([labels.position(g) for g in train_gold.gold_labels()], dtype=np.int64)
    n, c = len(train_gold), len(labels)

    rng = np.random.default_rng(config.seed)
    weights = rng.uniform(-0.01, 0.01, size=(c, x.shape[1]))
    onehot = np.eye(c)[y]

    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            probs = _softmax(x[batch] @ weights.T)
            grad = (probs - onehot[batch]).T @ x[batch] / len(batch)
            weights = weights - config.learning_rate * (grad + config.l2 * weights)

    return ModelParameters(
        config=config,
        vocabulary=vocabulary,
        class_labels=labels.labels,
        weights=weights,
    )


def predict_toy(params: ModelParameters, test_gold: GoldSet) -> PredictionRun:
    """Softmax predictions for a gold set, as a validated PredictionRun."""
    labels = LabelSpace(params.class_labels)
    x = _design_matrix(test_gold, params.vocabulary, params.config)
    if x.shape[1] != params.weights.shape[1]:
        raise ShapeMismatchError(
            f"feature width {x.shape[1]} does not match trained weights {params.weights.shape[1]}"
        )
    matrix = _softmax(x @ params.weights.T)
    return PredictionRun(
        run_id=RunId(params.config.model_id, params.config.init_index),
        dataset_id=test_gold.dataset_id,
        matrix=matrix,
        labels=labels,
    )


def train_accuracy(params: ModelParameters, gold: GoldSet) -> float:
    run = predict_toy(params, gold)
    predicted = run.matrix.argmax(axis=1)
    expected = np.array([LabelSpace(params.class_labels).position(g) for g in gold.gold_labels()])
    return float((predicted == expected).mean() * 100.0)


# Four feature configurations, each taken at three base seeds, give the
# canonical 12 models; every model is then trained with `inits` separate
# initializations, so the default bundle is 36 runs feeding 12 first-layer
# ensembles.
STANDARD_TOY_FEATURES = (
    ("BoW", FEATURE_BAG_OF_WORDS, 3),
    ("Char2", FEATURE_CHAR_NGRAM, 2),
    ("Char3", FEATURE_CHAR_NGRAM, 3),
    ("BoWChar3", FEATURE_BOTH, 3),
)
STANDARD_TOY_VARIANTS = 3


def standard_toy_configs(base_seed: int = 7, inits: int = 3) -> list[ToyModelConfig]:
    configs = []
    for model_idx, (name, mode, ngram_n) in enumerate(STANDARD_TOY_FEATURES):
        for variant in range(1, STANDARD_TOY_VARIANTS + 1):
            for init in range(1, inits + 1):
                configs.append(
                    ToyModelConfig(
                        model_id=f"{name}-{variant}",
                        init_index=init,
                        feature_mode=mode,
                        ngram_n=ngram_n,
                        seed=base_seed * 10000 + model_idx * 100 + variant * 10 + init,
                        # stop short of convergence: the objective is convex,
                        # so long training erases initialization diversity
                        epochs=8,
                    )
                )
    return configs


def train_toy_runs(
    configs: list[ToyModelConfig],
    train_gold: GoldSet,
    test_gold: GoldSet,
    labels: LabelSpace,
) -> tuple[RunSet, list[ModelParameters]]:
    """Train every config and predict on the test set."""
    parameters = [train_toy_model(config, train_gold, labels) for config in configs]
    runs = tuple(predict_toy(params, test_gold) for params in parameters)
    return RunSet(dataset_id=test_gold.dataset_id, runs=runs), parameters


# --- parameter serialization ------------------------------------------------


def save_parameters(params: ModelParameters, path: str) -> None:
    data = {
        "config": {
            "model_id": params.config.model_id,
            "init_index": params.config.init_index,
            "feature_mode": params.config.feature_mode,
            "ngram_n": params.config.ngram_n,
            "seed": params.config.seed,
            "epochs": params.config.epochs,
            "learning_rate": params.config.learning_rate,
            "l2": params.config.l2,
            "batch_size": params.config.batch_size,
        },
        "vocabulary": list(params.vocabulary),
        "class_labels": list(params.class_labels),
        "weights": [[float(v) for v in row] for row in params.weights],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, ensure_ascii=False)
        handle.write("\n")


def load_parameters(path: str) -> ModelParameters:
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    return ModelParameters(
        config=ToyModelConfig(**data["config"]),
        vocabulary=tuple(data["vocabulary"]),
        class_labels=tuple(data["class_labels"]),
        weights=np.array(data["weights"], dtype=np.float64),
    )


# --- synthetic predictors ---------------------------------------------------


@dataclass(frozen=True)
class SyntheticPredictorConfig:
    """Synthetic voter family with controllable error structure.

    ``accuracy`` is each predictor's marginal chance of emitting the gold
    label.  ``correlation`` is the probability that a predictor copies the
    shared error source for an example instead of drawing its own: 1.0
    makes all predictors identical, 0.0 makes their errors independent.
    ``confidence_sharpness`` scales how peaked the emitted one-hot-smoothed
    rows are; per-cell jitter keeps confidences informative for fallback
    comparisons.
    """

    accuracy: float
    correlation: float = 0.0
    confidence_sharpness: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.accuracy <= 1.0:
            raise ValueError("accuracy must be in (0, 1]")
        if not 0.0 <= self.correlation <= 1.0:
            raise ValueError("correlation must be in [0, 1]")
        if self.confidence_sharpness <= 0:
            raise ValueError("confidence_sharpness must be positive")


def generate_synthetic_runs(
    config: SyntheticPredictorConfig,
    n_predictors: int,
    gold: GoldSet,
    labels: LabelSpace,
    model_id: str = "Synth",
) -> RunSet:
    """Seeded predictors emitting the gold label with the configured accuracy.

    Wrong answers are uniform over the other labels.  The RNG stream is
    consumed in a fixed order: shared draws first, then per-predictor draws.
    """
    c = len(labels)
    if c < 2:
        raise DegenerateLabelSpaceError("need at least 2 labels")
    if n_predictors < 1:
        raise ValueError("need at least one predictor")
    n = len(gold)
    gold_cols = np.array([labels.position(g) for g in gold.gold_labels()], dtype=np.int64)

    rng = np.random.default_rng(config.seed)
    shared_correct = rng.random(n) < config.accuracy
    shared_offset = rng.integers(1, c, size=n)

    runs = []
    for predictor in range(1, n_predictors + 1):
        use_shared = rng.random(n) < config.correlation
        own_correct = rng.random(n) < config.accuracy
        own_offset = rng.integers(1, c, size=n)
        correct = np.where(use_shared, shared_correct, own_correct)
        offset = np.where(use_shared, shared_offset, own_offset)
        predicted = np.where(correct, gold_cols, (gold_cols + offset) % c)

        sharpness = config.confidence_sharpness * rng.uniform(0.5, 1.5, size=n)
        top = np.exp(sharpness) / (np.exp(sharpness) + c - 1)
        matrix = np.repeat(((1.0 - top) / (c - 1))[:, None], c, axis=1)
        matrix[np.arange(n), predicted] = top
        matrix /= matrix.sum(axis=1, keepdims=True)

        runs.append(
            PredictionRun(
                run_id=RunId(model_id, predictor),
                dataset_id=gold.dataset_id,
                matrix=matrix,
                labels=labels,
            )
        )
    return RunSet(dataset_id=gold.dataset_id, runs=tuple(runs))


def make_synthetic_gold(
    n_examples: int,
    n_labels: int,
    seed: int,
    dataset_id: str = "synth",
) -> tuple[LabelSpace, GoldSet]:
    """Uniform-random gold labels for synthetic-predictor studies."""
    if n_labels < 2:
        raise DegenerateLabelSpaceError("need at least 2 labels")
    labels = LabelSpace(tuple(f"intent{i}" for i in range(n_labels)))
    rng = np.random.default_rng(seed)
    cols = rng.integers(0, n_labels, size=n_examples)
    examples = tuple(
        (f"{dataset_id}-{i:05d}", ("synthetic",), labels.labels[int(c)])
        for i, c in enumerate(cols)
    )
    return labels, GoldSet(dataset_id=dataset_id, examples=examples)


# --- toy corpus generator ---------------------------------------------------

_FILLER = (
    "please hi hello can you i would like to my the a now today thanks "
    "quickly just really need want know about for me"
).split()

# verbs/nouns deliberately overlap across intents ("open", "close", "funds",
# "card", "account") so no single feature family separates them cleanly
_INTENT_WORDS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "check_balance": (("check", "show", "view", "see"), ("balance", "funds", "statement", "account")),
    "transfer_funds": (("transfer", "send", "move", "wire"), ("money", "cash", "funds", "payment")),
    "open_account": (("open", "create", "start"), ("account", "checking", "savings")),
    "close_account": (("close", "cancel", "terminate"), ("account", "card")),
    "card_lost": (("lost", "stole", "blocked", "found"), ("card", "credit", "debit")),
    "exchange_rate": (("rate", "rates", "exchange", "interest"), ("dollar", "euro", "yen", "currency")),
    "branch_hours": (("hours", "open", "close", "schedule"), ("branch", "office", "location")),
    "loan_request": (("loan", "mortgage", "borrow", "financing"), ("apply", "request", "information")),
    "human_support": (("agent", "human", "representative", "person"), ("talk", "speak", "connect", "help")),
}

_MULTI_INTENTS = (("check_balance", "transfer_funds"),)


def _corrupt(word: str, rng: random.Random) -> str:
    """One character-level typo: swap, drop, or double a character."""
    if len(word) < 3:
        return word
    kind = rng.randrange(3)
    pos = rng.randrange(1, len(word) - 1)
    if kind == 0:
        chars = list(word)
        chars[pos], chars[pos + 1] = chars[pos + 1], chars[pos]
        return "".join(chars)
    if kind == 1:
        return word[:pos] + word[pos + 1 :]
    return word[:pos] + word[pos] + word[pos:]


def _keywords_for(intent: str, rng: random.Random) -> list[str]:
    verbs, nouns = _INTENT_WORDS[intent]
    words = [rng.choice(verbs), rng.choice(nouns)]
    if rng.random() < 0.35:
        words.append(rng.choice(nouns))
    return words


def toy_corpus_labels() -> list[str]:
    singles = sorted(_INTENT_WORDS)
    multis = [canonicalize_label(list(parts)) for parts in _MULTI_INTENTS]
    return singles + multis


def make_toy_corpus(
    n_examples: int,
    seed: int,
    dataset_id: str,
    typo_rate: float = 0.18,
    distractor_rate: float = 0.30,
    label_noise: float = 0.04,
    multi_rate: float = 0.10,
) -> GoldSet:
    """Generate utterances with shared vocabulary, typos, and label noise.

    The noise dials are tuned so linear toy models land well below ceiling
    and disagree with each other, which is what makes ensembling visible.
    """
    rng = random.Random(seed)
    all_labels = toy_corpus_labels()
    singles = sorted(_INTENT_WORDS)
    examples = []
    for i in range(n_examples):
        if rng.random() < multi_rate:
            parts = list(rng.choice(_MULTI_INTENTS))
            gold = canonicalize_label(parts)
            keywords = [w for part in parts for w in _keywords_for(part, rng)]
        else:
            intent = rng.choice(singles)
            gold = intent
            keywords = _keywords_for(intent, rng)

        if rng.random() < distractor_rate:
            other = rng.choice(singles)
            verbs, nouns = _INTENT_WORDS[other]
            keywords.append(rng.choice(verbs + nouns))

        keywords = [_corrupt(w, rng) if rng.random() < typo_rate else w for w in keywords]
        n_filler = rng.randint(2, 6)
        tokens = keywords + [rng.choice(_FILLER) for _ in range(n_filler)]
        rng.shuffle(tokens)

        if rng.random() < label_noise:
            gold = rng.choice([lab for lab in all_labels if lab != gold])

        examples.append((f"{dataset_id}-{i:05d}", tuple(tokens), gold))
    return GoldSet(dataset_id=dataset_id, examples=tuple(examples))
