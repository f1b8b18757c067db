"""Likelihood-free selection between mechanistic network models.

The package forward-simulates networks from a fixed-edge-count random graph
model with triadic-closure mechanisms, summarizes them with five graph
statistics, and discriminates between candidate models with a super-learner
ensemble under the rank (1 - AUC) loss, including a confidence estimate for
the selection.
"""

from .graphs import (
    EdgeProposal,
    Graph,
    InvalidParamsError,
    IterationCapExceededError,
    ModelParams,
    NonTerminatingError,
    count_closeable_triangles,
    edge_probability,
    generate,
    generate_batch,
    generate_with_trace,
    read_edge_list,
    write_edge_list,
)
from .summaries import (
    FEATURE_NAMES,
    SummaryVector,
    avg_clustering,
    degree_quartiles,
    local_clustering,
    read_dataset_csv,
    summarize,
    summarize_many,
    triangle_count,
    write_dataset_csv,
)
from .learners import (
    DEFAULT_LIBRARY,
    Dataset,
    DegenerateDataError,
    FeatureScaler,
    LearnerSpec,
    NonConvergenceError,
    apply_scaler,
    fit_scaler,
    predict_score,
    train,
)
from .ensemble import (
    AUC_LOSS,
    LOGLOSS,
    CrossValidatedPredictions,
    EnsembleWeights,
    FoldAssignment,
    SingleClassError,
    SingleClassFoldError,
    SuperLearnerModel,
    TooFewSamplesError,
    assign_folds,
    auc,
    classify,
    cv_predictions,
    cv_risk,
    cv_risks,
    fit_super_learner,
    optimize_weights,
    predict,
    select_discrete,
)
from .uq import (
    UQ_REGRESSION_LIBRARY,
    CorrectnessLabels,
    UQConfig,
    UQModel,
    compute_oob_labels,
    estimate_confidence,
    fit_uq,
    uq_report,
)
from .harness import (
    METHOD_ORDER,
    CellResult,
    ResultsTable,
    ScenarioConfig,
    SelectionResult,
    build_training_data,
    cell_seed,
    performance_cv_auc,
    run_grid,
    select_for_network,
)
from .rng import derive_seed

__version__ = "0.1.0"
