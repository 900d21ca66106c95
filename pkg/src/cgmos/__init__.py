"""Certainty guided minority oversampling for imbalanced binary data.

The package bundles the oversampler itself, the reference methods it is
compared against, two probabilistic classifiers, an evaluation harness
(metrics, ROC/AUC, repeated stratified cross-validation, k-sweep, Wilcoxon
signed-rank), and an executable verification of the underlying theory.
"""

from ._version import __version__
from .baselines import (
    ADASYN,
    OVERSAMPLER_CLASSES,
    SMOTE,
    BorderlineSMOTE,
    RandomDuplication,
    adasyn_oversample,
    borderline_smote_oversample,
    dup_oversample,
    make_oversampler,
    smote_oversample,
)
from .classifiers import CLASSIFIER_CLASSES, KDEBayesClassifier, KNNClassifier, make_classifier, train
from .dataset import (
    Dataset,
    FoldPlan,
    binarize_keep_smallest,
    load_csv,
    make_two_gaussian_fixture,
    minmax_scaled,
    save_csv,
    stratified_folds,
)
from .density import (
    CertaintyProfile,
    DensityModel,
    bandwidth_at,
    certainty_profile,
    compute_bandwidths,
    fit,
    insert_minority_whatif,
    insert_minority_whatif_at,
    posterior,
    posteriors,
)
from .errors import (
    CgmosError,
    DegenerateDatasetError,
    InfeasibleError,
    InfeasibleStratificationError,
    InfeasibleSynthesisError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    VerificationError,
    ZeroCertaintyError,
)
from .evaluation import (
    ConfusionCounts,
    EvaluationReport,
    RocCurve,
    WilcoxonResult,
    confusion,
    cross_validate,
    f_score,
    g_score,
    grade_score_file,
    precision_recall,
    roc_auc,
    sweep_k_delta,
    wilcoxon_signed_rank,
)
from .sampling import (
    CGMOS,
    SynthesisConfig,
    SyntheticBatch,
    WeightTable,
    compute_weights,
    draw_seeds,
    oversample,
    relative_certainty_change,
    synthesize,
)
from .theory import (
    ExpectedGains,
    GainReport,
    addition_likelihood_ratio,
    average_gain,
    average_gain_at,
    expected_gains,
    gain_report,
    run_verification,
    verify_weight_floor,
)

__all__ = [
    "__version__",
    # dataset
    "Dataset",
    "FoldPlan",
    "binarize_keep_smallest",
    "load_csv",
    "save_csv",
    "stratified_folds",
    "make_two_gaussian_fixture",
    "minmax_scaled",
    # density
    "DensityModel",
    "CertaintyProfile",
    "compute_bandwidths",
    "fit",
    "posterior",
    "posteriors",
    "certainty_profile",
    "bandwidth_at",
    "insert_minority_whatif",
    "insert_minority_whatif_at",
    # sampling
    "CGMOS",
    "SynthesisConfig",
    "SyntheticBatch",
    "WeightTable",
    "compute_weights",
    "draw_seeds",
    "synthesize",
    "oversample",
    "relative_certainty_change",
    # baselines
    "RandomDuplication",
    "SMOTE",
    "BorderlineSMOTE",
    "ADASYN",
    "dup_oversample",
    "smote_oversample",
    "borderline_smote_oversample",
    "adasyn_oversample",
    "OVERSAMPLER_CLASSES",
    "make_oversampler",
    # classifiers
    "KDEBayesClassifier",
    "KNNClassifier",
    "CLASSIFIER_CLASSES",
    "make_classifier",
    "train",
    # evaluation
    "ConfusionCounts",
    "confusion",
    "precision_recall",
    "f_score",
    "g_score",
    "RocCurve",
    "roc_auc",
    "EvaluationReport",
    "cross_validate",
    "sweep_k_delta",
    "WilcoxonResult",
    "wilcoxon_signed_rank",
    "grade_score_file",
    # theory
    "ExpectedGains",
    "GainReport",
    "addition_likelihood_ratio",
    "average_gain",
    "average_gain_at",
    "expected_gains",
    "verify_weight_floor",
    "gain_report",
    "run_verification",
    # errors
    "CgmosError",
    "ParseError",
    "ParameterError",
    "DegenerateDatasetError",
    "InfeasibleError",
    "InfeasibleStratificationError",
    "InfeasibleSynthesisError",
    "InsufficientDataError",
    "ZeroCertaintyError",
    "VerificationError",
]
