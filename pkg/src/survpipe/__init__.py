"""survpipe: cohort-specific cancer-survivability modeling pipeline.

Fixed-width clinical record ingestion, chained-equation imputation,
four from-scratch weighted classifiers, imbalance remedies, rank-based
evaluation, and a reproducible experiment runner behind one CLI.
"""
from .dataset import (
    CohortRule,
    Column,
    Dataset,
    LabelRule,
    decode,
    derive_labels,
    drop_required_missing,
    filter_cohort,
    kfold,
    kfold_indices,
    split,
)
from .encoding import (
    EncodedMatrix,
    FeatureMap,
    FeatureRange,
    Standardizer,
    encode,
    fit_encoder,
    fit_standardizer,
    standardize,
)
from .errors import (
    ConfigError,
    ModelIOError,
    ParseError,
    SchemaError,
    SurvpipeError,
    ValidationError,
)
from .imbalance import ImbalancePlan, class_weights, undersample, undersample_indices
from .impute import FittedImputer, ImputePlan, apply_mice, fit_mice, mice_impute
from .ingest import RawDataset, parse_fixed_width, read_delimited, write_delimited
from .metrics import ConfusionMatrix, EvaluationReport, auc, confusion, evaluate_scores, g_mean, roc_points
from .crossval import CVResult, cross_validate
from .models import TrainConfig, classify, load_model, predict_proba, save_model, train
from .ranking import FeatureImportance, importance, rank_table
from .schema import FieldSpec, Schema, format_schema, parse_schema
from .synth import CategoricalGen, ContinuousGen, SynthSpec, benchmark_spec, generate_synthetic, parse_synth_spec, scale_separation

__version__ = "0.1.0"
