"""Two-layer ensembling over stored softmax predictions.

The pipeline: load row-stochastic prediction matrices for many training
runs; combine same-model runs into first-layer ensembles by majority vote
with confidence; exhaustively enumerate and rank every cross-model
second-layer ensemble; report F1 and gain statistics, with the published
reference scores bundled as a regression fixture.
"""

from .combiner import (
    DEFAULT_POLICY,
    FIRST_LAYER_MEAN_DISTRIBUTION,
    FIRST_LAYER_VOTE,
    MAJORITY_CONF_MAX,
    MAJORITY_CONF_MEAN,
    CombinePolicy,
    FirstLayerEnsemble,
    SecondLayerEnsemble,
    first_layer_predict,
    majority_vote_with_confidence,
    second_layer_predict,
    strict_majority,
)
from .corpus import (
    SEPARATOR,
    GoldSet,
    LabelSpace,
    canonicalize_label,
    label_components,
    load_gold,
    load_label_space,
    save_gold,
    save_label_space,
)
from .enumeration import (
    F1_MACRO,
    F1_MICRO,
    EnsembleResult,
    SweepReport,
    best_subject_to,
    enumerate_subsets,
    run_sweep,
    subset_count,
    write_report_csv,
    write_report_json,
)
from .errors import (
    CombinerError,
    CorpusError,
    DatasetMismatchError,
    DegenerateLabelSpaceError,
    DuplicateRunIdError,
    EmptyVoteListError,
    EnumerationError,
    LayervoteError,
    MetricsError,
    MissingFixtureError,
    NegativeProbabilityError,
    NoMatchingEnsembleError,
    ParseError,
    RowSumViolationError,
    ShapeMismatchError,
    StoreError,
    TooFewModelsError,
    ToyModelError,
    UnknownLabelError,
)
from .metrics import (
    GAIN_VS_MEAN,
    GAIN_VS_MIN,
    accuracy,
    dataset_layer_gain,
    first_layer_gain,
    macro_f1,
    micro_f1,
    pairwise_ensemble_increase,
    round_score,
    total_gain,
)
from .prediction_store import (
    ROW_SUM_TOLERANCE,
    Diagnostic,
    ManifestEntry,
    PredictionRun,
    RunId,
    RunSet,
    Vote,
    argmax_vote,
    load_manifest,
    load_run,
    load_runset,
    read_matrix_csv,
    save_runset,
    validate_matrix,
    write_matrix_csv,
)
from .published import PublishedScores, load_published_scores, load_toy_corpus
from .reports import CheckRow, ReportDocument, build_report, paper_check
from .toy_models import (
    ModelParameters,
    SyntheticPredictorConfig,
    ToyModelConfig,
    generate_synthetic_runs,
    make_synthetic_gold,
    make_toy_corpus,
    predict_toy,
    train_toy_model,
)

__version__ = "0.1.0"
