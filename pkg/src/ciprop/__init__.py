"""ciprop: label propagation over conditional independence graphs.

Pipeline: recover a partial correlation matrix from observations, turn it
into transition matrices, then predict unknown node categories either by
iterative diffusion / a closed-form solve, or by a weighted-node2vec
embedding baseline. The harness reproduces the full experiment protocol.
"""

from ._kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .cigraph import (
    CovarianceMatrix,
    PartialCorrelationMatrix,
    PrecisionMatrix,
    covariance,
    partial_correlation,
    precision,
    recover,
    shrink,
)
from .containers import load_matrix, save_matrix
from .dataset import (
    Dataset,
    KnownMask,
    load_cora,
    load_dataset,
    load_pubmed,
    make_synthetic,
    mask_labels,
    normalize,
    save_dataset,
    subsample,
)
from .embedding import (
    EmbeddingConfig,
    NodeEmbeddings,
    TrainReport,
    fit_classifier,
    node2vec_embed,
    predict_unknown,
    random_walks,
    train_embeddings,
)
from .errors import CipropError, DataError, NumericalError, UsageError
from .harness import (
    METHODS,
    ExperimentSpec,
    compare_methods,
    grid_search,
    load_base_dataset,
    masking_sweep,
    run_cell,
    threshold_sweep,
    write_report,
)
from .propagate import (
    AnalyticalResult,
    IterationResult,
    LabelState,
    PropagationConfig,
    Selection,
    SelectionStrategy,
    analytical,
    init_state,
    iterate_exp,
    iterate_pos,
    iterate_posneg,
    regularizer_term,
    select,
    softmax_rows,
)
from .transition import (
    TransitionConfig,
    TransitionKind,
    TransitionMatrix,
    build_exp,
    build_maxnorm,
    split_pos_neg,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_IMPLEMENTATION",
    "CovarianceMatrix",
    "PartialCorrelationMatrix",
    "PrecisionMatrix",
    "covariance",
    "partial_correlation",
    "precision",
    "recover",
    "shrink",
    "load_matrix",
    "save_matrix",
    "Dataset",
    "KnownMask",
    "load_cora",
    "load_dataset",
    "load_pubmed",
    "make_synthetic",
    "mask_labels",
    "normalize",
    "save_dataset",
    "subsample",
    "EmbeddingConfig",
    "NodeEmbeddings",
    "TrainReport",
    "fit_classifier",
    "node2vec_embed",
    "predict_unknown",
    "random_walks",
    "train_embeddings",
    "CipropError",
    "DataError",
    "NumericalError",
    "UsageError",
    "METHODS",
    "ExperimentSpec",
    "compare_methods",
    "grid_search",
    "load_base_dataset",
    "masking_sweep",
    "run_cell",
    "threshold_sweep",
    "write_report",
    "AnalyticalResult",
    "IterationResult",
    "LabelState",
    "PropagationConfig",
    "Selection",
    "SelectionStrategy",
    "analytical",
    "init_state",
    "iterate_exp",
    "iterate_pos",
    "iterate_posneg",
    "regularizer_term",
    "select",
    "softmax_rows",
    "TransitionConfig",
    "TransitionKind",
    "TransitionMatrix",
    "build_exp",
    "build_maxnorm",
    "split_pos_neg",
    "__version__",
]
