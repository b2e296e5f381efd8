"""Numerical checks of the existence theory for Jeffreys-penalized binomial fits.

The checks fall into three groups:

* decay of ``sup_{||u||=1} det(X' M W(r u) X)`` as the radius ``r`` grows, with
  the explicit ``exp(-a c r)`` bound for square designs;
* boundedness of the weight envelopes ``(1 + e^{|z|}) w(z)`` for each link;
* existence experiments: penalized fits on separated data converge to finite
  estimates that beat every far-away point.

Sphere suprema are estimated from a scrambled Sobol sample of directions plus a
local coordinate search, so they are lower bounds. That is the safe side for
decay checks, which fail only if the estimates stay large.
"""
from __future__ import annotations

import functools
import itertools
import warnings
from dataclasses import asdict, dataclass, field
from math import comb
from typing import Optional, Sequence

import mpmath
import numpy as np
import scipy.optimize
from scipy.special import log_ndtr, logsumexp, ndtri
from scipy.stats import qmc

from .errors import ZeroRowNorm
from .fit import FitConfig, FitStatus, fit_mle, fit_penalized
from .model import Dataset, LinkKind, as_link, link_eval
from .penalty import ORACLE_MAX_N, penalized_loglik, subset_minors
from .separation import detect_separation

_EPS = np.finfo(float).eps
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
# relative safety margin on numerically located envelope suprema
_SUP_MARGIN = 1e-9
_MAX_SUBSETS = 50_000


@dataclass(frozen=True)
class SphereScanConfig:
    samples: int = 4096
    refine_steps: int = 50
    radii: tuple = (0.0, 5.0, 10.0, 20.0, 40.0)
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        r = np.asarray(self.radii, dtype=float)
        if r.ndim != 1 or r.size == 0 or np.any(r < 0) or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be nonnegative and strictly increasing")
        object.__setattr__(self, "radii", tuple(float(v) for v in r))


# ---------------------------------------------------------------------------
# Directions on the unit sphere
# ---------------------------------------------------------------------------

def unit_directions(p: int, samples: int, seed: int = 0) -> np.ndarray:
    """Quasi-uniform unit vectors in R^p; exactly ``{+1, -1}`` when ``p == 1``."""
    if p == 1:
        return np.array([[1.0], [-1.0]])
    sobol = qmc.Sobol(d=p, scramble=True, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # balance warning for non powers of 2
        pts = sobol.random(samples)
    G = ndtri(np.clip(pts, 1e-12, 1.0 - 1e-12))
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def _coordinate_search(fun, u0, steps, maximize=True, step0=0.1):
    """Greedy coordinate search on the sphere. ``fun`` maps (k, p) -> (k,)."""
    sign = 1.0 if maximize else -1.0
    u = u0.copy()
    best = sign * fun(u[None, :])[0]
    p = u.shape[0]
    step = step0
    for _ in range(steps):
        cand = np.repeat(u[None, :], 2 * p, axis=0)
        cand[np.arange(p), np.arange(p)] += step
        cand[p + np.arange(p), np.arange(p)] -= step
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        vals = sign * fun(cand)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, u = vals[k], cand[k]
        else:
            step *= 0.5
    return u, sign * best


# ---------------------------------------------------------------------------
# log det along rays
# ---------------------------------------------------------------------------

class _RayDet:
    """Evaluates ``log det(X' M W(r u) X)`` for batches of directions ``u``."""

    def __init__(self, ds: Dataset, link: LinkKind):
        self.ds, self.link = ds, link
        self.logm = np.log(ds.m)
        self.subsets = None
        if ds.n <= ORACLE_MAX_N and comb(ds.n, ds.p) <= _MAX_SUBSETS:
            subsets, minors = subset_minors(ds.X)
            keep = minors != 0.0
            self.subsets = subsets[keep]
            self.log_minor2 = 2.0 * np.log(np.abs(minors[keep]))

    def log_weights(self, U, r):
        eta = r * (U @ self.ds.X.T)
        return link_eval(self.link, eta).logw

    def from_log_weights(self, logw):
        logmw = logw + self.logm
        if self.subsets is not None:
            # Binet-Cauchy in log space: exact even when single weights underflow
            terms = self.log_minor2 + logmw[:, self.subsets].sum(axis=2)
            return logsumexp(terms, axis=1)
        shift = logmw.max(axis=1, keepdims=True)
        A = np.einsum("ki,ij,il->kjl", np.exp(logmw - shift), self.ds.X, self.ds.X)
        sign, logdet = np.linalg.slogdet(A)
        return np.where(sign > 0, logdet + self.ds.p * shift[:, 0], -np.inf)

    def __call__(self, U, r):
        return self.from_log_weights(self.log_weights(U, r))


@dataclass(frozen=True)
class SphereSup:
    radius: float
    log_sup: float
    direction: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.exp(self.log_sup))


def sphere_sup_det(ds: Dataset, link: LinkKind | str, r: float,
                   cfg: SphereScanConfig | None = None) -> SphereSup:
    """Lower estimate of ``sup_{||u||=1} det(X' M W(r u) X)``.

    Deterministic for a fixed ``cfg.seed``. For ``p == 1`` both directions are
    evaluated and the value is exact.
    """
    cfg = cfg or SphereScanConfig()
    return _sphere_sup(_RayDet(ds, as_link(link)), ds.p, float(r), cfg,
                       unit_directions(ds.p, cfg.samples, cfg.seed))


def _sphere_sup(raydet, p, r, cfg, U):
    vals = raydet(U, r)
    k = int(np.argmax(vals))
    u, best = U[k], float(vals[k])
    if p > 1 and r > 0 and cfg.refine_steps > 0:
        u, best = _coordinate_search(lambda V: raydet(V, r), u, cfg.refine_steps)
    return SphereSup(radius=r, log_sup=float(best), direction=u)


# ---------------------------------------------------------------------------
# min over the sphere of sum |cos theta_i(u)|
# ---------------------------------------------------------------------------

def _abs_cos_sum(B, U):
    return np.abs(U @ B.T).sum(axis=1)


def min_abs_cos_sum(X, cfg: SphereScanConfig | None = None):
    """Minimum over unit ``u`` of ``sum_i |cos(angle(x_i, u))|``.

    The function is a norm of ``u`` restricted to the sphere, so its minimum is
    attained at a direction orthogonal to ``p - 1`` linearly independent rows;
    those candidates are enumerated when there are few enough of them, and a
    refined Sobol sample is added on top. Returns ``(c, u)``.
    """
    cfg = cfg or SphereScanConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0.0):
        raise ZeroRowNorm("a design row is the zero vector")
    B = X / norms[:, None]
    if p == 1:
        return float(n), np.array([1.0])

    cands = [unit_directions(p, cfg.samples, cfg.seed)]
    _, sv, Vt = np.linalg.svd(B)
    if sv[-1] <= 1e-12 * sv[0]:
        return 0.0, Vt[-1]
    if comb(n, p - 1) <= _MAX_SUBSETS:
        verts = []
        for rows in itertools.combinations(range(n), p - 1):
            _, s, Vt = np.linalg.svd(B[list(rows)])
            if s[-1] > 1e-12:
                verts.append(Vt[-1])
        if verts:
            cands.append(np.array(verts))
    U = np.vstack(cands)
    vals = _abs_cos_sum(B, U)
    k = int(np.argmin(vals))
    u, c = _coordinate_search(lambda V: _abs_cos_sum(B, V), U[k],
                              cfg.refine_steps, maximize=False, step0=0.01)
    return float(c), u


# ---------------------------------------------------------------------------
# Weight envelopes
# ---------------------------------------------------------------------------

def _grid(z_lo, z_hi, step):
    return np.linspace(z_lo, z_hi, int(round((z_hi - z_lo) / step)) + 1)


def _log_expm1(t):
    t = np.asarray(t, dtype=float)
    big = t > 30.0
    return np.where(big, t + np.log1p(-np.exp(-np.where(big, t, 30.0))),
                    np.log(np.expm1(np.where(big, 1.0, t))))


def _softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _log_envelope(link: LinkKind, z):
    """``log[(1 + e^{|z|}) w(z)]`` in double precision.

    Probit uses the normal-theory weight; cloglog uses the weight formula in its
    own argument, ``exp(-2z) / (exp(exp(-z)) - 1)``.
    """
    z = np.asarray(z, dtype=float)
    head = _softplus(np.abs(z))
    if link is LinkKind.PROBIT:
        logphi = -0.5 * z * z - _LOG_SQRT_2PI
        return head + 2.0 * logphi - log_ndtr(z) - log_ndtr(-z)
    if link is LinkKind.CLOGLOG:
        return head - 2.0 * z - _log_expm1(np.exp(-z))
    return head + link_eval(link, z).logw


def _logit_envelope_mp(z, dps=40):
    """Logit envelope in extended precision; the bound by 1 is tight at the ulp level."""
    with mpmath.workdps(dps):
        out = []
        for v in z:
            x = mpmath.mpf(float(v))
            e = mpmath.exp(x)
            out.append((1 + mpmath.exp(abs(x))) * e / (1 + e) ** 2)
        return out


def cloglog_g(z):
    """Upper bound ``g`` used for the cloglog envelope; tends to 1 and 6 at +-inf."""
    z = np.asarray(z, dtype=float)
    log_den = np.log1p(np.exp(-z) / 2.0 + np.exp(-2.0 * z) / 6.0)
    return np.exp(_softplus(np.abs(z)) - z - log_den)


@dataclass(frozen=True)
class EnvelopeReport:
    link: LinkKind
    z_lo: float
    z_hi: float
    step: float
    sup_f: float
    argmax_z: float
    sup_refined: float
    sup_f_halved: float
    finite_everywhere: bool
    halving_stable: bool
    bound_by_one: Optional[bool] = None
    g_plus: Optional[float] = None
    g_minus: Optional[float] = None
    g_limits_ok: Optional[bool] = None
    f_le_g: Optional[bool] = None
    normal_tail_ok: Optional[bool] = None

    @property
    def envelope_constant(self) -> float:
        """Constant ``K`` with ``w(z) <= K / (1 + e^{|z|})`` for all ``z``."""
        if self.link is LinkKind.LOGIT:
            return 1.0
        return self.sup_refined * (1.0 + _SUP_MARGIN)


def normal_tail_inequalities(z) -> np.ndarray:
    """Pointwise ``Phi(z) > 1/2`` and ``1 - Phi(z) > z phi(z) / (z^2 + 1)``, for z > 0."""
    z = np.asarray(z, dtype=float)
    logphi = -0.5 * z * z - _LOG_SQRT_2PI
    upper_half = log_ndtr(z) > np.log(0.5)
    mills = log_ndtr(-z) > np.log(z) + logphi - np.log1p(z * z)
    return upper_half & mills


def check_weight_envelope(link: LinkKind | str, z_lo: float = -40.0,
                          z_hi: float = 40.0, step: float = 0.01) -> EnvelopeReport:
    """Scan ``f(z) = (1 + e^{|z|}) w(z)`` over a grid and test the known bounds on it.

    The logit scan runs in extended precision so that ``f <= 1`` can be checked
    without tolerance. The reported ``sup_refined`` polishes the grid maximum
    with a bounded scalar search.
    """
    link = as_link(link)
    if not z_lo < z_hi or not step > 0:
        raise ValueError("need z_lo < z_hi and step > 0")
    z = _grid(z_lo, z_hi, step)
    z2 = _grid(z_lo, z_hi, step / 2.0)
    with np.errstate(over="ignore"):
        logf, logf2 = _log_envelope(link, z), _log_envelope(link, z2)
    finite = bool(np.all(np.isfinite(logf)) and np.all(np.isfinite(logf2)))
    k = int(np.argmax(logf))
    sup_f, sup_half = float(np.exp(logf[k])), float(np.exp(np.max(logf2)))

    res = scipy.optimize.minimize_scalar(
        lambda s: -_log_envelope(link, s), method="bounded",
        bounds=(max(z_lo, z[k] - step), min(z_hi, z[k] + step)),
        options={"xatol": 1e-12})
    sup_refined = max(sup_f, float(np.exp(-res.fun)))

    extra = {}
    if link is LinkKind.LOGIT:
        f_mp = _logit_envelope_mp(z)
        extra["bound_by_one"] = all(v <= 1 for v in f_mp)
        sup_f = float(max(f_mp))
        sup_refined = max(sup_refined, sup_f)
    elif link is LinkKind.CLOGLOG:
        g_plus, g_minus = float(cloglog_g(30.0)), float(cloglog_g(-30.0))
        log_g = np.log(cloglog_g(z))
        extra.update(g_plus=g_plus, g_minus=g_minus,
                     g_limits_ok=abs(g_plus - 1.0) < 1e-6 and abs(g_minus - 6.0) < 1e-6,
                     # f and g agree to rounding as z -> +inf, hence the slack
                     f_le_g=bool(np.all(logf <= log_g + 1e-12)))
    else:
        pos = z[z > 0]
        extra["normal_tail_ok"] = bool(np.all(normal_tail_inequalities(pos)))

    return EnvelopeReport(link=link, z_lo=float(z_lo), z_hi=float(z_hi),
                          step=float(step), sup_f=sup_f, argmax_z=float(z[k]),
                          sup_refined=sup_refined, sup_f_halved=sup_half,
                          finite_everywhere=finite,
                          halving_stable=finite and abs(sup_half - sup_f) < 1e-6,
                          **extra)


@functools.lru_cache(maxsize=None)
def envelope_constant(link: LinkKind | str) -> float:
    return check_weight_envelope(as_link(link)).envelope_constant


@dataclass(frozen=True)
class EnvelopeCheck:
    holds: bool
    checked: int
    violations: int
    max_log_excess: float
    constant: float


def envelope_inequality_check(ds: Dataset, link: LinkKind | str, r_list: Sequence[float],
                              cfg: SphereScanConfig | None = None,
                              sup_f: float | None = None) -> EnvelopeCheck:
    """Check ``w_i(r u) <= K / (1 + exp(r |x_i'u|))`` for every sampled ``u``, ``i`` and ``r``.

    ``K`` defaults to the link's envelope constant (1 for logit).
    """
    cfg = cfg or SphereScanConfig()
    link = as_link(link)
    K = envelope_constant(link) if sup_f is None else float(sup_f)
    U = unit_directions(ds.p, cfg.samples, cfg.seed)
    checked = violations = 0
    worst = -np.inf
    for r in r_list:
        eta = float(r) * (U @ ds.X.T)
        ev = link_eval(link, eta)
        a = np.abs(np.clip(eta, -700.0, 700.0))
        bound = np.log(K) - _softplus(a)
        excess = ev.logw - bound
        tol = 8.0 * _EPS * (1.0 + np.abs(bound))
        violations += int(np.sum(excess > tol))
        checked += excess.size
        worst = max(worst, float(np.max(excess)))
    return EnvelopeCheck(holds=violations == 0, checked=checked, violations=violations,
                         max_log_excess=worst, constant=K)


# ---------------------------------------------------------------------------
# Decay of the sphere supremum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayReport:
    """Sphere-supremum decay of ``det(X' M W(r u) X)`` over the configured radii.

    ``coefficient`` is ``sum_S minor_S^2 prod_{k in S} m_k``, which equals
    ``det(X' M X)``. ``decay_rate`` is the largest ``c`` with
    ``sup(r) <= coefficient * envelope^p * exp(-c r)`` at every positive radius.
    For square designs ``a`` and ``c`` are the row-norm minimum and the
    cosine-sum minimum, and ``bound_ok`` records ``prod_i w_i(r u) <=
    K^p exp(-a c r)`` at every sampled direction (``K = 1`` for logit).
    For taller designs ``bound_ok`` records the per-direction envelope bound on
    the full Binet-Cauchy sum.
    """

    link: LinkKind
    radii: tuple
    log_sup: tuple
    coefficient: float
    envelope: float
    decay_rate: float
    strictly_decreasing: bool
    ratio_ok: bool
    bound_ok: tuple
    a: Optional[float] = None
    c: Optional[float] = None

    @property
    def sup(self) -> tuple:
        return tuple(float(np.exp(v)) for v in self.log_sup)

    @property
    def passed(self) -> bool:
        return (self.strictly_decreasing and self.ratio_ok and all(self.bound_ok)
                and self.decay_rate > 0)


def decay_curve(ds: Dataset, link: LinkKind | str,
                cfg: SphereScanConfig | None = None) -> DecayReport:
    cfg = cfg or SphereScanConfig()
    link = as_link(link)
    raydet = _RayDet(ds, link)
    U = unit_directions(ds.p, cfg.samples, cfg.seed)
    K = envelope_constant(link)
    logK = np.log(K)
    square = ds.n == ds.p

    a = c = None
    if square:
        norms = np.linalg.norm(ds.X, axis=1)
        if np.any(norms == 0.0):
            raise ZeroRowNorm("a design row is the zero vector; a = min ||x_i|| = 0")
        a = float(norms.min())
        c, _ = min_abs_cos_sum(ds.X, cfg)

    log_sup, bound_ok = [], []
    for r in cfg.radii:
        s = _sphere_sup(raydet, ds.p, r, cfg, U)
        V = np.vstack([U, s.direction[None, :]])
        logw = raydet.log_weights(V, r)
        if square:
            bound = ds.p * logK - a * c * r
            lhs = logw.sum(axis=1)
        else:
            # envelope weights K / (1 + e^{|eta|}) plugged into the same expansion
            eta = np.clip(r * (V @ ds.X.T), -700.0, 700.0)
            lhs = raydet.from_log_weights(logw)
            bound = raydet.from_log_weights(logK - _softplus(np.abs(eta)))
        tol = 1e-12 * (1.0 + np.abs(bound))
        bound_ok.append(bool(np.all(lhs <= bound + tol)))
        log_sup.append(max(s.log_sup, float(np.max(raydet.from_log_weights(logw)))))

    coefficient = float(np.linalg.det((ds.X * ds.m[:, None]).T @ ds.X))
    log_coef = np.log(coefficient) + ds.p * logK
    radii = np.asarray(cfg.radii)
    ls = np.asarray(log_sup)
    pos = radii > 0
    rate = float(np.min((log_coef - ls[pos]) / radii[pos])) if np.any(pos) else np.nan
    return DecayReport(
        link=link, radii=tuple(cfg.radii), log_sup=tuple(float(v) for v in ls),
        coefficient=coefficient, envelope=K, decay_rate=rate,
        strictly_decreasing=bool(np.all(np.diff(ls[1:]) < 0)),
        ratio_ok=bool(ls[-1] - ls[0] < np.log(1e-8)),
        bound_ok=tuple(bound_ok), a=a, c=c)


def well_spread_design(n: int, p: int, seed: int = 0) -> np.ndarray:
    """Seeded full-rank design whose rows point in well-separated directions.

    Row norms lie in [1, 2]. Directions come from evenly spaced lines (p = 2) or
    from the axes of a regular polyhedron (p = 3), randomly rotated and jittered.
    Near-collinear rows would make the decay constant arbitrarily small, and the
    radii used here would then be too short to show the decay.
    """
    rng = np.random.default_rng(seed)
    norms = rng.uniform(1.0, 2.0, size=n)
    if p == 1:
        return (norms * rng.choice([-1.0, 1.0], size=n))[:, None]
    if p == 2:
        theta = (np.arange(n) + rng.uniform(-0.15, 0.15, size=n)) * np.pi / n
        theta += rng.uniform(0, np.pi)
        D = np.column_stack([np.cos(theta), np.sin(theta)])
    elif p == 3:
        if n > 6:
            raise ValueError("p=3 designs support n <= 6")
        gold = (1.0 + 5.0 ** 0.5) / 2.0
        axes = np.array([[0, 1, gold], [0, -1, gold], [1, gold, 0],
                         [-1, gold, 0], [gold, 0, 1], [-gold, 0, 1]], dtype=float)
        D = (np.eye(3) if n == 3 else axes[rng.permutation(6)[:n]])
        D = D + rng.uniform(-0.05, 0.05, size=D.shape)
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
        D = D @ (Q * np.sign(np.diag(R)))
    else:
        raise ValueError("well_spread_design supports p <= 3")
    signs = rng.choice([-1.0, 1.0], size=n)
    return D * (norms * signs)[:, None]


# ---------------------------------------------------------------------------
# Existence experiments
# ---------------------------------------------------------------------------

SCENARIOS = ("two_point", "separated", "quasi_separated", "overlapped",
             "all_zero", "all_max")


def separated_dataset(seed: int, p: int | None = None, n: int | None = None) -> Dataset:
    """Seeded completely separated binary dataset (intercept first when p >= 2)."""
    rng = np.random.default_rng(seed)
    p = p or int(rng.integers(1, 4))
    n = n or int(rng.integers(max(4, 2 * p), 13))
    while True:
        Z = rng.normal(size=(n, p))
        X = Z if p == 1 else np.column_stack([np.ones(n), Z[:, 1:]])
        b = rng.normal(size=p)
        b /= np.linalg.norm(b)
        eta = X @ b
        if np.min(np.abs(eta)) < 0.05:
            continue
        y = (eta > 0).astype(int)
        ds = Dataset.binary(X, y)
        if 0 < y.sum() < n and ds.full_column_rank:
            return ds


def overlapped_dataset(seed: int, p: int | None = None, n: int = 40,
                       trials: int = 1) -> Dataset:
    """Seeded dataset with both outcomes spread over the design (no separation expected)."""
    rng = np.random.default_rng(seed)
    p = p or int(rng.integers(1, 4))
    while True:
        Z = rng.normal(size=(n, p))
        X = Z if p == 1 else np.column_stack([np.ones(n), Z[:, 1:]])
        beta = rng.normal(scale=0.4, size=p)
        prob = 1.0 / (1.0 + np.exp(-(X @ beta)))
        y = rng.binomial(trials, prob)
        ds = Dataset(X, y, np.full(n, trials))
        if ds.full_column_rank and not detect_separation(ds).separated:
            return ds


def make_scenario(kind: str, seed: int = 0) -> Dataset:
    if kind == "two_point":
        return Dataset.binary([[-1.0], [1.0]], [0, 1])
    if kind == "separated":
        return separated_dataset(seed)
    if kind == "quasi_separated":
        base = separated_dataset(seed, p=2)
        rng = np.random.default_rng(seed + 1)
        # two rows on the separating line x_2 = 0 direction with opposite outcomes
        sep = detect_separation(base).direction
        t = rng.normal()
        on = np.array([1.0, -sep[0] / sep[1]]) if abs(sep[1]) > 1e-12 else np.array([0.0, 1.0])
        X = np.vstack([base.X, on * (1.0 + abs(t)), on * (1.0 + abs(t))])
        return Dataset.binary(X, np.r_[base.y, 0, 1])
    if kind == "overlapped":
        return overlapped_dataset(seed, p=2, n=200, trials=20)
    if kind == "all_zero":
        return Dataset([[1.0]], [0], [5])
    if kind == "all_max":
        return Dataset([[1.0]], [5], [5])
    raise ValueError(f"unknown scenario {kind!r}; choose from {SCENARIOS}")


@dataclass(frozen=True)
class SphereRestriction:
    ok: bool
    value: float
    at_origin: float
    max_far: float
    radius: float


def sphere_restriction_check(ds: Dataset, link: LinkKind | str, beta_hat,
                             n_dirs: int = 100, radius: float = 50.0,
                             seed: int = 0) -> SphereRestriction:
    """Compare ``l*(beta_hat)`` with ``l*(0)`` and with ``l*`` on a sphere of radius 50."""
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(n_dirs, ds.p))
    U = G / np.linalg.norm(G, axis=1, keepdims=True)
    value = penalized_loglik(ds, link, beta_hat)
    origin = penalized_loglik(ds, link, np.zeros(ds.p))
    far = max(penalized_loglik(ds, link, radius * u) for u in U)
    return SphereRestriction(ok=bool(value >= origin and value > far), value=value,
                             at_origin=origin, max_far=float(far), radius=radius)


@dataclass(frozen=True)
class LinkOutcome:
    link: LinkKind
    mle_status: FitStatus
    mle_norm: float
    penalized_status: FitStatus
    beta_hat: tuple
    beta_norm: float
    sphere_ok: bool


@dataclass(frozen=True)
class ExistenceReport:
    dataset_id: str
    separated: bool
    separation_kind: str
    outcomes: tuple = field(default_factory=tuple)

    @property
    def consistent(self) -> bool:
        """Complete separation implies a divergent MLE and a convergent penalized fit."""
        for o in self.outcomes:
            if o.penalized_status is not FitStatus.CONVERGED or not o.sphere_ok:
                return False
            if self.separation_kind == "complete" and \
                    o.mle_status is not FitStatus.DIVERGENCE_SUSPECTED:
                return False
        return True


def existence_experiment(kind: str, seed: int = 0,
                         links: Sequence[LinkKind | str] = tuple(LinkKind),
                         cfg: FitConfig | None = None) -> ExistenceReport:
    ds = make_scenario(kind, seed)
    sep = detect_separation(ds)
    outcomes = []
    for link in map(as_link, links):
        mle = fit_mle(ds, link, cfg)
        pen = fit_penalized(ds, link, cfg)
        sr = sphere_restriction_check(ds, link, pen.beta_hat, seed=seed)
        outcomes.append(LinkOutcome(
            link=link, mle_status=mle.status,
            mle_norm=float(np.linalg.norm(mle.beta_hat)),
            penalized_status=pen.status,
            beta_hat=tuple(float(b) for b in pen.beta_hat),
            beta_norm=float(np.linalg.norm(pen.beta_hat)), sphere_ok=sr.ok))
    return ExistenceReport(dataset_id=f"{kind}:{seed}", separated=sep.separated,
                           separation_kind=sep.kind.value, outcomes=tuple(outcomes))


def multistart_spread(ds: Dataset, link: LinkKind | str, n_starts: int = 8,
                      scale: float = 3.0, seed: int = 0):
    """Refit from random starting points; returns the largest distance between
    converged estimates and the spread of their objective values."""
    rng = np.random.default_rng(seed)
    betas, objs = [], []
    for k in range(n_starts):
        start = np.zeros(ds.p) if k == 0 else rng.normal(scale=scale, size=ds.p)
        if not np.isfinite(penalized_loglik(ds, link, start)):
            continue
        res = fit_penalized(ds, link, FitConfig(beta0=start))
        if res.converged:
            betas.append(res.beta_hat)
            objs.append(res.objective)
    if not betas:
        return np.nan, np.nan
    B = np.array(betas)
    dist = np.max(np.linalg.norm(B[:, None, :] - B[None, :, :], axis=2))
    return float(dist), float(np.ptp(objs))


# ---------------------------------------------------------------------------
# Full verification suite
# ---------------------------------------------------------------------------

def _plain(obj):
    """Recursively convert dataclasses, enums and numpy values to JSON-ready types."""
    if hasattr(obj, "__dataclass_fields__"):
        obj = asdict(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (LinkKind, FitStatus)):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def run_verification(seed: int = 7, cfg: SphereScanConfig | None = None,
                     designs_per_shape: int = 2) -> dict:
    """Run every check at desk scale. Returns ``{"checks": {...}, "details": {...}}``.

    Every entry of ``checks`` is a boolean; the suite passes when all are true.
    """
    cfg = cfg or SphereScanConfig(seed=seed)
    checks, details = {}, {}

    env = {link: check_weight_envelope(link) for link in LinkKind}
    details["envelopes"] = {k.value: _plain(v) for k, v in env.items()}
    checks["logit_envelope_bounded_by_one"] = bool(env[LinkKind.LOGIT].bound_by_one)
    checks["cloglog_g_limits"] = bool(env[LinkKind.CLOGLOG].g_limits_ok)
    checks["cloglog_f_below_g"] = bool(env[LinkKind.CLOGLOG].f_le_g)
    checks["probit_normal_tail_inequalities"] = bool(env[LinkKind.PROBIT].normal_tail_ok)
    checks["envelopes_finite_and_stable"] = all(
        e.finite_everywhere and e.halving_stable for e in env.values())

    decay, shapes = [], [(1, 1), (2, 2), (3, 3), (4, 1), (6, 2), (6, 3)]
    for (n, p), k in itertools.product(shapes, range(designs_per_shape)):
        X = well_spread_design(n, p, seed=seed * 1000 + 10 * n + p + 100 * k)
        ds = Dataset(X, np.zeros(n, dtype=int), np.ones(n, dtype=int))
        for link in LinkKind:
            rep = decay_curve(ds, link, cfg)
            env_chk = envelope_inequality_check(ds, link, cfg.radii, cfg)
            decay.append({"n": n, "p": p, "design": k, "link": link.value,
                          "passed": rep.passed, "envelope_inequality": env_chk.holds,
                          "report": _plain(rep)})
    details["decay"] = decay
    checks["sphere_sup_decay"] = all(d["passed"] for d in decay)
    checks["square_design_exponential_bound"] = all(
        all(d["report"]["bound_ok"]) for d in decay if d["n"] == d["p"])
    checks["weight_envelope_inequality"] = all(d["envelope_inequality"] for d in decay)

    exps = [existence_experiment("two_point"), existence_experiment("all_zero"),
            existence_experiment("all_max")]
    exps += [existence_experiment("separated", seed=seed * 100 + k) for k in range(3)]
    exps += [existence_experiment("quasi_separated", seed=seed * 100 + k) for k in range(2)]
    details["existence"] = [_plain(e) | {"consistent": e.consistent} for e in exps]
    checks["existence_under_separation"] = all(e.consistent for e in exps)
    checks["bounded_estimates"] = all(
        o.beta_norm < 20 for e in exps for o in e.outcomes)
    return {"seed": seed, "checks": checks, "all_passed": all(checks.values()),
            "details": details}


__all__ = [
    "SphereScanConfig", "SphereSup", "DecayReport", "EnvelopeReport", "EnvelopeCheck",
    "ExistenceReport", "LinkOutcome", "SphereRestriction", "unit_directions",
    "sphere_sup_det", "decay_curve", "min_abs_cos_sum", "check_weight_envelope",
    "envelope_inequality_check", "envelope_constant", "cloglog_g",
    "normal_tail_inequalities", "existence_experiment", "make_scenario",
    "separated_dataset", "overlapped_dataset", "well_spread_design",
    "sphere_restriction_check", "multistart_spread", "run_verification", "SCENARIOS",
]
