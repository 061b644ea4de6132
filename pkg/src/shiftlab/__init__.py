"""shiftlab: deterministic planning and analytics for mixed real/generated
dataset studies.

The package covers the bookkeeping around generative data augmentation
experiments: expanding prompt templates into generation manifests,
planning seeded real/generated mixtures, filtering generated images by
caption similarity, and scoring the results (accuracy, accuracy gaps,
baseline-relative robustness, Frechet distances, intra-class diversity)
into comparison tables and scatter plot data. Everything is reproducible
byte for byte from its inputs and a seed; model inference lives in a
separate adapter package that speaks this package's file formats.
"""

from .catalog import ClassCatalog, read_catalog, write_catalog
from .embeddings import EmbeddingSet, read_embeddings, write_embeddings
from .errors import FormatError, ShiftlabError, ValidationError
from .evaluator import (
    Comparison,
    EvalRow,
    OverlapMap,
    build_overlap,
    compare_recipes,
    make_eval_row,
    normalize_name,
    read_overlap,
    restricted_accuracy,
    write_overlap,
)
from .filtering import FilterReport, cosine_similarity, filter_by_caption
from .manifests import DatasetManifest, ManifestEntry, read_dataset_manifest, write_dataset_manifest
from .mixture import MixturePlan, grid_plans, plan_fixed_budget, plan_mixture, read_plan, write_plan
from .predictions import PredictionLog, read_prediction_log, write_prediction_log
from .prompts import (
    GenerationManifest,
    Prompt,
    TemplateSet,
    build_manifest,
    expand_prompts,
    load_default_templates,
    read_generation_manifest,
    read_templates,
    write_generation_manifest,
)
from .rng import GENERATOR_ID, mix64, permutation, splitmix64

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ClassCatalog", "read_catalog", "write_catalog",
    "EmbeddingSet", "read_embeddings", "write_embeddings",
    "FormatError", "ShiftlabError", "ValidationError",
    "Comparison", "EvalRow", "OverlapMap", "build_overlap", "compare_recipes",
    "make_eval_row", "normalize_name", "read_overlap", "restricted_accuracy", "write_overlap",
    "FilterReport", "cosine_similarity", "filter_by_caption",
    "DatasetManifest", "ManifestEntry", "read_dataset_manifest", "write_dataset_manifest",
    "MixturePlan", "grid_plans", "plan_fixed_budget", "plan_mixture", "read_plan", "write_plan",
    "PredictionLog", "read_prediction_log", "write_prediction_log",
    "GenerationManifest", "Prompt", "TemplateSet", "build_manifest", "expand_prompts",
    "load_default_templates", "read_generation_manifest", "read_templates",
    "write_generation_manifest",
    "GENERATOR_ID", "mix64", "permutation", "splitmix64",
]
