"""Iterative supervised principal components for high-dimensional data.

Supervised components are extracted one at a time from an iteratively
deflated, standardized design matrix while a permutation test says the
remaining data still carry signal about the target; unsupervised principal
components fill the rest of the requested dimension.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .data import Dataset, StandardizationParams, Target, encode_labels, regression_target, standardize
from .errors import ConvergenceError, DataFormatError, InvalidInputError, ISPCAError, NoSignalError
from .io import load_csv, load_model, save_model
from .iterative import FitConfig, gamma_grid, ispca_fit
from .logistic import LogisticModel, fit_logistic
from .pca import leading_pc, principal_components
from .projection import Component, ProjectionModel, back_transform_coefficients, transform
from .protocol import EvalReport, SplitPlan, accuracy, mlpd, run_protocol
from .scoring import feature_pvalues, max_score_pvalue, multiclass_scores, score, scores
from .spca import METHODS, fit_reduction, pca_fit, pspca_fit, spca_fit

__all__ = [
    "Component", "ConvergenceError", "DataFormatError", "Dataset", "EvalReport", "FitConfig",
    "ISPCAError", "InvalidInputError", "LogisticModel", "METHODS", "NoSignalError",
    "ProjectionModel", "SplitPlan", "StandardizationParams", "Target", "accuracy",
    "back_transform_coefficients", "encode_labels", "feature_pvalues", "fit_logistic",
    "fit_reduction", "gamma_grid", "ispca_fit", "leading_pc", "load_csv", "load_model",
    "max_score_pvalue", "mlpd", "multiclass_scores", "pca_fit", "principal_components",
    "pspca_fit", "regression_target", "run_protocol", "save_model", "score", "scores",
    "spca_fit", "standardize", "transform",
]
