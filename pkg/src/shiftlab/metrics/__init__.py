from .accuracy import accuracy, accuracy_gap
from .baseline import (
    BaselineFit,
    ClassifierPoint,
    effective_robustness,
    fit_baseline,
    read_fit,
    read_zoo,
    read_zoo_by_dataset,
    write_fit,
    write_zoo,
)
from .diversity import DiversityResult, diversity, pairwise_mean_cosine
from .fid import (
    DEFAULT_MIN_PER_CLASS,
    EPSILON,
    FidResult,
    class_fid,
    fid,
    fid_with_info,
    frechet_from_moments,
)

__all__ = [
    "accuracy",
    "accuracy_gap",
    "BaselineFit",
    "ClassifierPoint",
    "effective_robustness",
    "fit_baseline",
    "read_fit",
    "read_zoo",
    "read_zoo_by_dataset",
    "write_fit",
    "write_zoo",
    "DiversityResult",
    "diversity",
    "pairwise_mean_cosine",
    "DEFAULT_MIN_PER_CLASS",
    "EPSILON",
    "FidResult",
    "class_fid",
    "fid",
    "fid_with_info",
    "frechet_from_moments",
]
