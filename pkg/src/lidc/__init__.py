"""Similar-language identification toolkit.

TF-IDF weighted character/word n-gram and skip-bigram features, one-vs-rest
linear SVMs trained by dual coordinate descent, and hard-majority voting
ensembles with deterministic tie-breaking, plus the tuning and evaluation
machinery around them.
"""

from .corpus import Dataset, Document, LabelCatalog, load_tsv, strip_punctuation
from .ensemble import Ensemble, Member, predict_document, train_ensemble, vote
from .features import (
    FeatureSpec,
    Preprocessing,
    SparseVector,
    TfIdfModel,
    Vocabulary,
    char_ngrams,
    parse_spec_list,
    skip_bigrams,
    smooth_idf,
    tokenize,
    word_ngrams,
)
from .metrics import (
    ConfusionMatrix,
    ErrorReport,
    ScoreReport,
    confusion,
    error_report,
    random_baseline,
    score,
)
from .model_store import ModelFormatError, file_digest, load, save
from .svm import LinearModel, TrainConfig, train_binary, train_multiclass
from .tuning import (
    GridResult,
    GridRow,
    ablate_features,
    full_feature_grid,
    grid_search_c,
    powerset_candidates,
    search_combinations,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Document",
    "LabelCatalog",
    "load_tsv",
    "strip_punctuation",
    "FeatureSpec",
    "Preprocessing",
    "SparseVector",
    "TfIdfModel",
    "Vocabulary",
    "char_ngrams",
    "word_ngrams",
    "skip_bigrams",
    "smooth_idf",
    "tokenize",
    "parse_spec_list",
    "TrainConfig",
    "LinearModel",
    "train_binary",
    "train_multiclass",
    "Ensemble",
    "Member",
    "vote",
    "predict_document",
    "train_ensemble",
    "GridResult",
    "GridRow",
    "grid_search_c",
    "search_combinations",
    "ablate_features",
    "full_feature_grid",
    "powerset_candidates",
    "ConfusionMatrix",
    "ScoreReport",
    "ErrorReport",
    "confusion",
    "score",
    "random_baseline",
    "error_report",
    "save",
    "load",
    "file_digest",
    "ModelFormatError",
    "__version__",
]
