"""Jeffreys-prior penalty ``0.5 * log det(X' M W X)`` and the penalized objective."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from .errors import CholeskyFailure, NoGradient, TooLargeForOracle
from .model import (
    Dataset,
    LinkKind,
    ModelState,
    cholesky_information,
    information_matrix,
    log_likelihood,
    score,
)

ORACLE_MAX_N = 25


@dataclass(frozen=True)
class PenaltyEval:
    """Penalty pieces at one ``beta``.

    Attributes
    ----------
    A : ndarray
        Expected information ``X' diag(m w) X``.
    chol : ndarray
        Lower Cholesky factor of ``A``.
    logdet : float
        ``log det A``; the penalty value is ``0.5 * logdet``.
    h : ndarray
        Hat diagonals ``m_i w_i x_i' A^{-1} x_i``; they sum to ``p``.
    grad : ndarray
        Gradient of ``0.5 * logdet`` with respect to ``beta``.
    """

    A: np.ndarray
    chol: np.ndarray
    logdet: float
    h: np.ndarray
    grad: np.ndarray

    @property
    def value(self) -> float:
        return 0.5 * self.logdet


def _penalty_from_state(ds: Dataset, state: ModelState) -> PenaltyEval:
    ev = state.evals
    info = cholesky_information(information_matrix(ds, ev.w))
    # weighted rows keep every column of Z inside the unit ball, so no overflow
    Xw = ds.X * np.sqrt(ds.m * ev.w)[:, None]
    Z = scipy.linalg.solve_triangular(info.chol, Xw.T, lower=True)
    h = np.einsum("ij,ij->j", Z, Z)
    if not np.all(np.isfinite(h)):
        raise CholeskyFailure("hat diagonals are not finite")
    # d/dbeta_j of 0.5 log det A = 0.5 tr(A^{-1} X' M diag(w' x_j) X)
    grad = 0.5 * ds.X.T @ (ev.dlogw * h)
    return PenaltyEval(A=info.A, chol=info.chol, logdet=info.logdet, h=h, grad=grad)


def penalty(ds: Dataset, link: LinkKind | str, beta) -> PenaltyEval:
    """Evaluate the penalty; raises :class:`CholeskyFailure` when ``A`` is not SPD."""
    return _penalty_from_state(ds, ModelState.at(ds, link, beta))


def penalized_loglik(ds: Dataset, link: LinkKind | str, beta) -> float:
    """``l(beta) + 0.5 log det A``, or ``-inf`` when the determinant underflows."""
    ll = log_likelihood(ds, link, beta)
    try:
        pen = penalty(ds, link, beta)
    except CholeskyFailure:
        return -np.inf
    return ll + pen.value


def penalized_gradient(ds: Dataset, link: LinkKind | str, beta) -> np.ndarray:
    try:
        pen = penalty(ds, link, beta)
    except CholeskyFailure as exc:
        raise NoGradient(f"penalty gradient undefined: {exc}") from None
    return score(ds, link, beta) + pen.grad


def penalized_objective(ds: Dataset, link: LinkKind | str, beta):
    """Return ``(value, gradient, PenaltyEval)`` in one pass.

    On Cholesky failure returns ``(-inf, None, None)``.
    """
    ll = log_likelihood(ds, link, beta)
    try:
        pen = penalty(ds, link, beta)
    except CholeskyFailure:
        return -np.inf, None, None
    return ll + pen.value, score(ds, link, beta) + pen.grad, pen


# ---------------------------------------------------------------------------
# Binet-Cauchy expansion
# ---------------------------------------------------------------------------

def subset_minors(X: np.ndarray, max_n: int = ORACLE_MAX_N):
    """All ``p``-row subsets of ``X`` in lexicographic order with their minors.

    Returns ``(subsets, minors)`` with ``subsets`` of shape ``(C(n, p), p)``.
    """
    n, p = X.shape
    if n > max_n:
        raise TooLargeForOracle(f"n={n} exceeds the oracle limit {max_n}")
    subsets = np.array(list(itertools.combinations(range(n), p)), dtype=np.intp)
    subsets = subsets.reshape(comb(n, p), p)
    minors = np.linalg.det(X[subsets])
    return subsets, minors


def binet_cauchy_det(ds: Dataset, link: LinkKind | str, beta) -> float:
    """``det(X' M W X)`` summed over all ``p``-subsets of observations.

    Each summand is a squared ``p x p`` minor of ``X`` times the product of the
    subset's ``m_i w_i``, so the result is never negative.
    """
    ev = ModelState.at(ds, link, beta).evals
    subsets, minors = subset_minors(ds.X)
    mw = ds.m * ev.w
    terms = minors ** 2 * np.prod(mw[subsets], axis=1)
    return float(np.sum(terms))


def log_binet_cauchy_det(ds: Dataset, link: LinkKind | str, beta) -> float:
    """``log det(X' M W X)`` via the same expansion, accumulated in log space.

    Stays finite when individual weights underflow; ``-inf`` only when every
    minor vanishes.
    """
    ev = ModelState.at(ds, link, beta).evals
    subsets, minors = subset_minors(ds.X)
    keep = minors != 0.0
    if not np.any(keep):
        return -np.inf
    logmw = np.log(ds.m) + ev.logw
    terms = 2.0 * np.log(np.abs(minors[keep])) + logmw[subsets[keep]].sum(axis=1)
    return float(logsumexp(terms))


__all__ = [
    "PenaltyEval", "penalty", "penalized_loglik", "penalized_gradient",
    "penalized_objective", "binet_cauchy_det", "log_binet_cauchy_det",
    "subset_minors", "ORACLE_MAX_N",
]
