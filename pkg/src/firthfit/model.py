"""Binomial regression model: data container, links, likelihood and information.

All link quantities are evaluated in log space where it matters, so that the
working weights keep full relative accuracy far into the tails.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np
import scipy.linalg
from scipy.special import erfc, expit, log_ndtr

from .errors import (
    CholeskyFailure,
    CountOutOfRange,
    DimensionMismatch,
    EmptyData,
    NonFiniteInput,
    NonFiniteResult,
    NonIntegerCount,
)

ETA_CLAMP = 700.0
RANK_RTOL = 1e-10
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


class LinkKind(str, enum.Enum):
    LOGIT = "logit"
    PROBIT = "probit"
    CLOGLOG = "cloglog"

    @property
    def canonical(self) -> bool:
        return self is LinkKind.LOGIT


def as_link(link: LinkKind | str) -> LinkKind:
    if isinstance(link, LinkKind):
        return link
    try:
        return LinkKind(str(link).lower())
    except ValueError:
        raise ValueError(f"unknown link {link!r}; expected one of "
                         f"{[k.value for k in LinkKind]}") from None


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------

def _as_counts(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
        raise NonIntegerCount(f"{name} must contain integers")
    return arr.astype(np.int64)


def column_rank(X: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Numerical rank from a column-pivoted QR factorization."""
    if X.size == 0:
        return 0
    R = scipy.linalg.qr(X, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    # with pivoting |R_00| is the largest column norm
    return int(np.sum(diag > rtol * diag[0]))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Grouped binomial data: ``y[i]`` successes out of ``m[i]`` trials at row ``X[i]``.

    Arrays are copied and made read-only. ``full_column_rank`` is computed once
    at construction; fitting refuses rank-deficient designs.
    """

    X: np.ndarray
    y: np.ndarray
    m: np.ndarray
    full_column_rank: bool = field(init=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DimensionMismatch("X must be two-dimensional")
        if X.shape[0] == 0:
            raise EmptyData("dataset has no observations")
        if X.shape[1] == 0:
            raise DimensionMismatch("dataset has no covariates")
        if not np.all(np.isfinite(X)):
            raise NonFiniteInput("X contains non-finite values")
        y = _as_counts(self.y, "y")
        m = _as_counts(self.m, "m")
        n, p = X.shape
        if y.shape[0] != n or m.shape[0] != n:
            raise DimensionMismatch(
                f"X has {n} rows but y has {y.shape[0]} and m has {m.shape[0]}")
        if n < p:
            raise DimensionMismatch(f"need n >= p, got n={n}, p={p}")
        if np.any(m < 1):
            raise CountOutOfRange("trial counts must be >= 1")
        if np.any(y < 0) or np.any(y > m):
            raise CountOutOfRange("need 0 <= y <= m for every observation")
        for arr in (X, y, m):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "full_column_rank", column_rank(X) == p)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @classmethod
    def binary(cls, X, y) -> "Dataset":
        y = np.asarray(y)
        return cls(X, y, np.ones_like(y, dtype=np.int64))

    def __repr__(self) -> str:
        return (f"Dataset(n={self.n}, p={self.p}, "
                f"full_column_rank={self.full_column_rank})")


def validate_dataset(rows: Iterable[Any]) -> Dataset:
    """Build a :class:`Dataset` from raw records.

    Each record is either a mapping with keys ``y``, ``m`` and ``x`` or a
    ``(y, m, x)`` tuple, where ``x`` is a scalar or a sequence of covariates.
    """
    ys, ms, xs = [], [], []
    for rec in rows:
        if isinstance(rec, Mapping):
            try:
                y, m, x = rec["y"], rec["m"], rec["x"]
            except KeyError as exc:
                raise DimensionMismatch(f"record missing field {exc}") from None
        else:
            try:
                y, m, x = rec
            except (TypeError, ValueError):
                raise DimensionMismatch("records must be (y, m, x) triples") from None
        ys.append(y)
        ms.append(m)
        xs.append(np.atleast_1d(np.asarray(x, dtype=float)))
    if not xs:
        raise EmptyData("no records")
    widths = {x.shape for x in xs}
    if len(widths) != 1 or xs[0].ndim != 1:
        raise DimensionMismatch("records carry differing numbers of covariates")
    return Dataset(np.vstack(xs), ys, ms)


# ---------------------------------------------------------------------------
# Links
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkEval:
    """Link quantities at linear predictor ``eta`` (scalars or equal-shape arrays).

    ``q`` is ``1 - pi`` computed without cancellation; ``logpi``/``logq`` are the
    log-probabilities, ``dlogw`` is ``dw / w`` and ``score_factor`` is
    ``dpi / (pi * (1 - pi))``.
    """

    eta: Any
    pi: Any
    q: Any
    dpi: Any
    w: Any
    dw: Any
    logw: Any
    dlogw: Any
    logpi: Any
    logq: Any
    score_factor: Any


def _softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _logit(eta):
    a = np.abs(eta)
    pi = expit(eta)
    q = expit(-eta)
    logpi = -_softplus(-eta)
    logq = -_softplus(eta)
    logw = -a - 2.0 * np.log1p(np.exp(-a))
    w = np.exp(logw)
    dlogw = q - pi
    return dict(pi=pi, q=q, dpi=w, w=w, dw=w * dlogw, logw=logw, dlogw=dlogw,
                logpi=logpi, logq=logq, score_factor=np.ones_like(eta))


def _probit(eta):
    pi = 0.5 * erfc(-eta / np.sqrt(2.0))
    q = 0.5 * erfc(eta / np.sqrt(2.0))
    logpi = log_ndtr(eta)
    logq = log_ndtr(-eta)
    logphi = -0.5 * eta * eta - _LOG_SQRT_2PI
    logw = 2.0 * logphi - (logpi + logq)  # symmetric in eta -> -eta, bit for bit
    w = np.exp(logw)
    dlogw = -2.0 * eta - np.exp(logphi - logpi) + np.exp(logphi - logq)
    return dict(pi=pi, q=q, dpi=np.exp(logphi), w=w, dw=w * dlogw, logw=logw,
                dlogw=dlogw, logpi=logpi, logq=logq,
                score_factor=np.exp(logphi - (logpi + logq)))


def _cloglog(eta):
    # pi = 1 - exp(-exp(eta)); the weight-formula argument z corresponds to -eta
    t = np.exp(eta)
    pi = -np.expm1(-t)
    q = np.exp(-t)
    logpi = np.where(t > np.log(2.0),
                     np.log1p(-np.exp(-np.maximum(t, np.log(2.0)))),
                     np.log(pi))
    logw = 2.0 * eta - t - logpi
    w = np.exp(logw)
    score_factor = t / pi
    dlogw = 2.0 - score_factor
    return dict(pi=pi, q=q, dpi=np.exp(eta - t), w=w, dw=w * dlogw, logw=logw,
                dlogw=dlogw, logpi=logpi, logq=-t, score_factor=score_factor)


_LINKS = {LinkKind.LOGIT: _logit, LinkKind.PROBIT: _probit,
          LinkKind.CLOGLOG: _cloglog}


def link_eval(link: LinkKind | str, eta) -> LinkEval:
    """Evaluate the link at ``eta`` (scalar or array).

    ``|eta|`` is clamped to 700 before exponentiation. Weights may underflow to
    zero in the far tails of the probit and cloglog links; ``logw`` stays finite.
    """
    link = as_link(link)
    scalar = np.ndim(eta) == 0
    eta = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(eta)):
        raise NonFiniteInput("linear predictor must be finite")
    with np.errstate(over="ignore", under="ignore"):
        vals = _LINKS[link](np.clip(eta, -ETA_CLAMP, ETA_CLAMP))
    if scalar:
        vals = {k: float(v) for k, v in vals.items()}
        return LinkEval(eta=float(eta), **vals)
    return LinkEval(eta=eta, **vals)


@dataclass(frozen=True)
class ModelState:
    beta: np.ndarray
    eta: np.ndarray
    evals: LinkEval

    @classmethod
    def at(cls, ds: Dataset, link: LinkKind | str, beta) -> "ModelState":
        beta = check_beta(ds, beta)
        eta = ds.X @ beta
        return cls(beta=beta, eta=eta, evals=link_eval(link, eta))


def check_beta(ds: Dataset, beta) -> np.ndarray:
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if beta.shape != (ds.p,):
        raise DimensionMismatch(f"beta must have length {ds.p}, got shape {beta.shape}")
    if not np.all(np.isfinite(beta)):
        raise NonFiniteInput("beta must be finite")
    return beta


# ---------------------------------------------------------------------------
# Likelihood, score, information
# ---------------------------------------------------------------------------

def log_likelihood(ds: Dataset, link: LinkKind | str, beta) -> float:
    """Binomial log-likelihood without the binomial-coefficient constant."""
    ev = ModelState.at(ds, link, beta).evals
    val = float(np.sum(ds.y * ev.logpi + (ds.m - ds.y) * ev.logq))
    if not np.isfinite(val):
        raise NonFiniteResult("log-likelihood is not finite")
    return val


def score(ds: Dataset, link: LinkKind | str, beta) -> np.ndarray:
    ev = ModelState.at(ds, link, beta).evals
    # y - m*pi written as y*q - (m - y)*pi keeps accuracy when pi is near 0 or 1
    resid = ds.y * ev.q - (ds.m - ds.y) * ev.pi
    g = ds.X.T @ (resid * ev.score_factor)
    if not np.all(np.isfinite(g)):
        raise NonFiniteResult("score is not finite")
    return g


@dataclass(frozen=True)
class Information:
    """Expected information ``A = X' diag(m w) X`` with its Cholesky factor."""

    A: np.ndarray
    chol: np.ndarray
    logdet: float

    def solve(self, b) -> np.ndarray:
        return scipy.linalg.cho_solve((self.chol, True), b)

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.A.shape[0]))


def information_matrix(ds: Dataset, weights) -> np.ndarray:
    A = (ds.X * (ds.m * weights)[:, None]).T @ ds.X
    return 0.5 * (A + A.T)


def cholesky_information(A: np.ndarray) -> Information:
    if not np.all(np.isfinite(A)):
        raise CholeskyFailure("information matrix is not finite")
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(str(exc)) from None
    d = np.diag(L)
    if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        raise CholeskyFailure("non-positive pivot in Cholesky factor")
    return Information(A=A, chol=L, logdet=float(2.0 * np.sum(np.log(d))))


def fisher_info(ds: Dataset, link: LinkKind | str, beta) -> Information:
    """Expected information at ``beta``; raises :class:`CholeskyFailure`."""
    ev = ModelState.at(ds, link, beta).evals
    return cholesky_information(information_matrix(ds, ev.w))


__all__ = [
    "Dataset", "LinkKind", "LinkEval", "ModelState", "Information", "as_link",
    "validate_dataset", "link_eval", "log_likelihood", "score", "fisher_info",
    "column_rank", "check_beta", "information_matrix", "cholesky_information",
    "ETA_CLAMP",
]
