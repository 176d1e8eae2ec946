"""Recession forecasting from binary at-risk transformations of a macro panel."""

__version__ = "0.1.0"

from .aggregate import FeatureBlock, PCAFit, Provenance, lag_stack, pca_fit, pca_project, simple_average
from .at_risk import AtRiskConfig, BinaryStateMatrix, Scope, ThresholdPolicy, binarize, resolve_tau, select_tau
from .errors import *  # noqa: F401,F403
from .panel import (
    CsvSchema, PanelMatrix, RawPanel, SeriesMeta, apply_tcode, classify_cyclicality, exclude_and_align,
    parse_csv, shift_target,
)
from .pipeline import InputKind, ModelKind, PipelineSpec
from .tuning import make_splits, penalty_grid, select_C
