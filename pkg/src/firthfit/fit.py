"""Safeguarded Newton-type ascent for the penalized and plain binomial likelihoods.

Plain likelihood fits use Fisher scoring. Penalized fits use the negative
Jacobian of the exact penalized gradient as curvature whenever it is positive
definite, and the expected information otherwise; the non-canonical links
converge slowly on expected information alone.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import CholeskyFailure, RankDeficient
from .model import Dataset, LinkKind, as_link, fisher_info, log_likelihood, score
from .penalty import penalized_objective, penalty

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
MAX_HALVINGS = 60
DIVERGENCE_WINDOW = 25
PLATEAU_RTOL = 1e-6
# evaluation noise of the objective, in units of eps * (1 + |f|)
ROUNDING_ULPS = 8.0


class FitStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGENCE_SUSPECTED = "divergence_suspected"


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 200
    grad_tol: float = 1e-8
    step_shrink: float = 0.5
    armijo_c: float = 1e-4
    beta0: Optional[np.ndarray] = None
    divergence_norm: float = 1e8
    curvature: str = "hybrid"

    def __post_init__(self):
        if self.curvature not in ("hybrid", "expected"):
            raise ValueError("curvature must be 'hybrid' or 'expected'")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not self.divergence_norm > 0:
            raise ValueError("divergence_norm must be positive")


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit_penalized` or :func:`fit_mle`.

    ``objective`` is the penalized log-likelihood for penalized fits and the plain
    log-likelihood otherwise. ``trace`` holds one ``(objective, ||beta||)`` pair
    per accepted iterate, starting with the initial point.
    """

    beta_hat: np.ndarray
    objective: float
    grad_norm: float
    iterations: int
    status: FitStatus
    se: np.ndarray
    h: np.ndarray
    trace: list = field(repr=False)
    penalized: bool = True
    link: LinkKind = LinkKind.LOGIT

    @property
    def converged(self) -> bool:
        return self.status is FitStatus.CONVERGED

    def to_dict(self) -> dict:
        return {
            "beta_hat": [float(b) for b in self.beta_hat],
            "objective": float(self.objective),
            "grad_norm": float(self.grad_norm),
            "iterations": int(self.iterations),
            "status": self.status.value,
            "se": [float(s) for s in self.se],
            "h": [float(v) for v in self.h],
            "trace": [[float(f), float(r)] for f, r in self.trace],
            "penalized": bool(self.penalized),
            "link": self.link.value,
        }


def standard_errors(ds: Dataset, link: LinkKind | str, beta_hat) -> np.ndarray:
    """Wald standard errors ``sqrt(diag(A^{-1}))``; raises :class:`CholeskyFailure`."""
    info = fisher_info(ds, link, beta_hat)
    return np.sqrt(np.diag(info.inverse()))


def _plain_objective(ds, link, beta):
    try:
        return log_likelihood(ds, link, beta), score(ds, link, beta)
    except ArithmeticError:
        return -np.inf, None


def _penal_objective(ds, link, beta):
    f, g, _ = penalized_objective(ds, link, beta)
    return f, g


def _observed_curvature(ds, link, beta, objective):
    """Negative Jacobian of the exact gradient by central differences, or None."""
    p = beta.shape[0]
    H = np.empty((p, p))
    for j in range(p):
        step = 1e-5 * max(1.0, abs(beta[j]))
        e = np.zeros(p)
        e[j] = step
        _, g_hi = objective(ds, link, beta + e)
        _, g_lo = objective(ds, link, beta - e)
        if g_hi is None or g_lo is None:
            return None
        H[:, j] = -(g_hi - g_lo) / (2.0 * step)
    H = 0.5 * (H + H.T)
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return None
    return L


def _plateaued(trace) -> bool:
    if len(trace) <= DIVERGENCE_WINDOW:
        return False
    window = trace[-(DIVERGENCE_WINDOW + 1):]
    norms = np.array([r for _, r in window])
    objs = np.array([f for f, _ in window])
    growing = bool(np.all(np.diff(norms) > 0))
    flat = abs(objs[-1] - objs[0]) <= PLATEAU_RTOL * (1.0 + abs(objs[-1]))
    return growing and flat


def _ascend(ds: Dataset, link: LinkKind, cfg: FitConfig,
            objective: Callable, penalized: bool) -> FitResult:
    if not ds.full_column_rank:
        raise RankDeficient("design matrix is not of full column rank")
    beta = (np.zeros(ds.p) if cfg.beta0 is None
            else np.array(cfg.beta0, dtype=float).reshape(ds.p))
    f, g = objective(ds, link, beta)
    if g is None:
        raise CholeskyFailure("objective undefined at the starting point")
    trace = [(f, float(np.linalg.norm(beta)))]
    status = FitStatus.MAX_ITERATIONS
    iterations = 0

    while True:
        gnorm = float(np.max(np.abs(g)))
        try:
            info = fisher_info(ds, link, beta)
        except CholeskyFailure:
            # information collapsed; only reachable far out along a divergent path
            status = (FitStatus.MAX_ITERATIONS if penalized
                      else FitStatus.DIVERGENCE_SUSPECTED)
            break
        d = info.solve(g)
        if gnorm <= cfg.grad_tol:
            # a tiny score with a large Newton step is the signature of a
            # likelihood still rising towards infinity
            step_small = np.max(np.abs(d)) <= np.sqrt(cfg.grad_tol) * (
                1.0 + np.max(np.abs(beta)))
            if penalized or step_small:
                status = FitStatus.CONVERGED
                break
        if penalized and cfg.curvature == "hybrid":
            L = _observed_curvature(ds, link, beta, objective)
            if L is not None:
                d = scipy.linalg.cho_solve((L, True), g)
        if iterations >= cfg.max_iter:
            break
        slope = float(g @ d)
        s = 1.0
        accepted = False
        noise = ROUNDING_ULPS * _EPS * (1.0 + abs(f))
        for _ in range(MAX_HALVINGS + 1):
            trial = beta + s * d
            f_new, g_new = objective(ds, link, trial)
            if np.isfinite(f_new) and g_new is not None:
                wanted = cfg.armijo_c * s * slope
                if f_new - f >= wanted:
                    accepted = True
                    break
                # Once the predicted gain is below the rounding noise of the
                # objective, f cannot rank the points; accept on a shrinking
                # gradient as long as f stays within that noise.
                if (wanted <= noise and f_new >= f - noise
                        and np.max(np.abs(g_new)) < gnorm):
                    accepted = True
                    break
            s *= cfg.step_shrink
        if not accepted:
            logger.debug("line search failed at iteration %d", iterations)
            break
        beta, f, g = trial, f_new, g_new
        iterations += 1
        trace.append((f, float(np.linalg.norm(beta))))
        if not penalized and (np.linalg.norm(beta) > cfg.divergence_norm
                              or _plateaued(trace)):
            status = FitStatus.DIVERGENCE_SUSPECTED
            break

    try:
        se = standard_errors(ds, link, beta)
        h = penalty(ds, link, beta).h
    except CholeskyFailure:
        se = np.full(ds.p, np.nan)
        h = np.full(ds.n, np.nan)
    return FitResult(beta_hat=beta, objective=float(f),
                     grad_norm=float(np.max(np.abs(g))), iterations=iterations,
                     status=status, se=se, h=h, trace=trace,
                     penalized=penalized, link=link)


def fit_penalized(ds: Dataset, link: LinkKind | str = LinkKind.LOGIT,
                  cfg: FitConfig | None = None) -> FitResult:
    """Maximize the Jeffreys-prior penalized log-likelihood.

    Newton-type ascent driven by the exact penalized gradient, with Armijo
    backtracking. Curvature comes from differencing that gradient when the
    result is negative definite (``cfg.curvature="hybrid"``) and from the
    expected information otherwise. Steps on which the information
    matrix loses definiteness evaluate to ``-inf`` and are shrunk away.

    Parameters
    ----------
    ds : Dataset
        Must have a full-column-rank design.
    link : LinkKind or str
    cfg : FitConfig, optional

    Returns
    -------
    FitResult
        With ``status`` ``CONVERGED`` once the gradient sup-norm is at most
        ``cfg.grad_tol``.
    """
    return _ascend(ds, as_link(link), cfg or FitConfig(), _penal_objective, True)


def fit_mle(ds: Dataset, link: LinkKind | str = LinkKind.LOGIT,
            cfg: FitConfig | None = None) -> FitResult:
    """Maximize the plain log-likelihood, flagging divergence under separation.

    ``DIVERGENCE_SUSPECTED`` is reported when ``||beta||`` exceeds
    ``cfg.divergence_norm``, or when over the last 25 iterations ``||beta||``
    grew strictly while the objective stayed flat.
    """
    return _ascend(ds, as_link(link), cfg or FitConfig(), _plain_objective, False)


__all__ = ["FitConfig", "FitResult", "FitStatus", "fit_penalized", "fit_mle",
           "standard_errors"]
