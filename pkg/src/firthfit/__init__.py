"""Jeffreys-prior penalized maximum likelihood for binomial regression.

Logit, probit and complementary log-log links; LP-based separation detection;
numerical checks of the existence theory behind the penalized estimator.
"""
from .errors import (
    CholeskyFailure,
    CountOutOfRange,
    DataError,
    DimensionMismatch,
    EmptyData,
    FirthError,
    NoGradient,
    NonIntegerCount,
    RankDeficient,
)
from .fit import FitConfig, FitResult, FitStatus, fit_mle, fit_penalized, standard_errors
from .model import (
    Dataset,
    LinkEval,
    LinkKind,
    fisher_info,
    link_eval,
    log_likelihood,
    score,
    validate_dataset,
)
from .penalty import (
    PenaltyEval,
    binet_cauchy_det,
    penalized_gradient,
    penalized_loglik,
    penalty,
)
from .separation import SeparationKind, SeparationReport, detect_separation, lp_solve

__version__ = "0.1.0"
