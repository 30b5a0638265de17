"""Kernel regression under the Welsch (correntropy) loss.

One estimator that behaves like the conditional mean for large scale
parameters and like the conditional mode for small ones, plus the synthetic
data, diagnostics and experiment harness used to study it.
"""
from .core import GaussianKernel, WelschLoss, gram, welsch_loss, welsch_weight
from .errors import DomainError, MccrError, NumericalError, UndefinedLocationError, UsageError
from .modelsel import CvConfig, CvReport, cross_validate
from .solver import FitReport, MccrModel, SolverConfig, fit_mccr, fit_ridge, objective, predict

__version__ = "0.1.0"

__all__ = [
    "GaussianKernel", "WelschLoss", "gram", "welsch_loss", "welsch_weight",
    "MccrError", "UsageError", "DomainError", "NumericalError", "UndefinedLocationError",
    "CvConfig", "CvReport", "cross_validate",
    "MccrModel", "FitReport", "SolverConfig", "fit_mccr", "fit_ridge", "objective", "predict",
]
