import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from firthfit import (
    CountOutOfRange,
    Dataset,
    DimensionMismatch,
    EmptyData,
    LinkKind,
    NonIntegerCount,
    fisher_info,
    link_eval,
    log_likelihood,
    score,
    validate_dataset,
)
from firthfit.errors import CholeskyFailure, NonFiniteInput

from conftest import LINKS, central_gradient, fd_relative_error, random_instance


# -- dataset ---------------------------------------------------------------

def test_validate_two_rows():
    ds = validate_dataset([(1, 1, 1.0), (0, 1, -1.0)])
    assert (ds.n, ds.p) == (2, 1)
    assert ds.full_column_rank


def test_validate_mapping_records():
    ds = validate_dataset([{"y": 2, "m": 3, "x": [1.0, 0.5]},
                           {"y": 0, "m": 1, "x": [1.0, -0.5]}])
    assert ds.p == 2 and list(ds.m) == [3, 1]


@pytest.mark.parametrize("rows, exc", [
    ([(2, 1, 1.0)], CountOutOfRange),
    ([(-1, 1, 1.0)], CountOutOfRange),
    ([(0, 0, 1.0)], CountOutOfRange),
    ([(0.5, 1, 1.0)], NonIntegerCount),
    ([(1, 1.5, 1.0)], NonIntegerCount),
    ([], EmptyData),
    ([(1, 1, [1.0, 2.0]), (0, 1, [1.0])], DimensionMismatch),
    ([(1, 1, [1.0, 2.0])], DimensionMismatch),  # n < p
])
def test_validate_errors(rows, exc):
    with pytest.raises(exc):
        validate_dataset(rows)


def test_rank_flag_proportional_columns():
    ds = validate_dataset([(0, 1, [1.0, 2.0]), (1, 1, [2.0, 4.0])])
    assert not ds.full_column_rank


def test_dataset_is_read_only():
    ds = Dataset([[1.0]], [0], [1])
    with pytest.raises(ValueError):
        ds.X[0, 0] = 2.0


# -- links -----------------------------------------------------------------

def test_logit_at_zero():
    ev = link_eval(LinkKind.LOGIT, 0.0)
    assert ev.pi == 0.5 and ev.w == 0.25 and ev.dw == 0.0


def test_probit_at_zero():
    # phi(0)^2 / (1/2 * 1/2) = (1 / 2pi) * 4
    assert link_eval("probit", 0.0).w == pytest.approx(2 / math.pi, rel=1e-14)


def test_cloglog_at_zero():
    assert link_eval("cloglog", 0.0).w == pytest.approx(1 / (math.e - 1), rel=1e-14)


def test_logit_logw_far_tail():
    ev = link_eval("logit", 40.0)
    oracle = 40.0 - 2 * (40.0 + math.log1p(math.exp(-40.0)))
    assert abs(ev.logw - oracle) < 1e-9 * abs(oracle)
    assert ev.logw == pytest.approx(-40.0, rel=1e-9)


def _mp_link(link, eta):
    """Reference link quantities in 50-digit arithmetic."""
    eta = mpmath.mpf(eta)
    if link is LinkKind.LOGIT:
        pi = 1 / (1 + mpmath.exp(-eta))
        dpi = pi * (1 - pi)
    elif link is LinkKind.PROBIT:
        pi = mpmath.ncdf(eta)
        dpi = mpmath.npdf(eta)
    else:
        pi = -mpmath.expm1(-mpmath.exp(eta))
        dpi = mpmath.exp(eta - mpmath.exp(eta))
    q = 1 - pi if link is not LinkKind.CLOGLOG else mpmath.exp(-mpmath.exp(eta))
    if link is LinkKind.PROBIT:
        q = mpmath.ncdf(-eta)
    return pi, q, dpi, dpi ** 2 / (pi * q)


@pytest.mark.parametrize("link", LINKS)
@pytest.mark.parametrize("eta", [-30.0, -8.0, -1.3, 0.0, 0.7, 2.5, 5.0, 30.0])
def test_link_matches_extended_precision(link, eta):
    if link is LinkKind.CLOGLOG and eta >= 30:
        eta = 3.0  # weight underflows far beyond ~6.6 on this side
    with mpmath.workdps(50):
        pi, q, dpi, w = _mp_link(link, eta)
        dw = mpmath.diff(lambda t: _mp_link(link, t)[3], eta)
        logw = mpmath.log(w)
    ev = link_eval(link, eta)
    assert ev.pi == pytest.approx(float(pi), rel=1e-12)
    assert ev.q == pytest.approx(float(q), rel=1e-12)
    assert ev.dpi == pytest.approx(float(dpi), rel=1e-12)
    assert ev.w == pytest.approx(float(w), rel=1e-10)
    assert ev.logw == pytest.approx(float(logw), rel=1e-12, abs=1e-12)
    assert ev.dw == pytest.approx(float(dw), rel=1e-8, abs=1e-300)


@pytest.mark.parametrize("link", LINKS)
def test_weight_identity(link):
    eta = np.linspace(-30, 30, 601)
    ev = link_eval(link, eta)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = ev.dpi ** 2 / (ev.pi * ev.q)
    # the naive form loses everything once pi * q underflows
    ok = np.isfinite(direct) & (ev.dpi > 1e-150) & (ev.pi * ev.q > 1e-290)
    assert np.allclose(ev.w[ok], direct[ok], rtol=1e-10, atol=0)


def test_logit_weight_and_derivative_forms():
    eta = np.linspace(-20, 20, 401)
    ev = link_eval("logit", eta)
    assert np.allclose(ev.w, ev.pi * (1 - ev.pi), rtol=1e-10)
    assert np.allclose(ev.dw, ev.w * (1 - 2 * ev.pi), rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("link", LINKS)
def test_logw_finite_to_clamp(link):
    eta = np.linspace(-700, 700, 2801)
    ev = link_eval(link, eta)
    assert np.all(np.isfinite(ev.logw))
    assert np.all(np.isfinite(ev.dlogw))


@pytest.mark.parametrize("link, lo, hi", [("logit", -700, 700), ("probit", -37, 37),
                                          ("cloglog", -700, 6)])
def test_weight_positive_where_representable(link, lo, hi):
    ev = link_eval(link, np.linspace(lo, hi, 5001))
    assert np.all(ev.w > 0) and np.all(np.isfinite(ev.w))


def test_nonfinite_eta_rejected():
    with pytest.raises(NonFiniteInput):
        link_eval("logit", np.array([0.0, np.nan]))


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-700, max_value=700, allow_nan=False))
def test_logit_envelope_inequality(eta):
    # log[(1 + e^|eta|) w] <= 0, in log space
    ev = link_eval("logit", eta)
    a = abs(eta)
    assert ev.logw + a + math.log1p(math.exp(-a)) <= 4 * np.finfo(float).eps * (1 + a)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
       st.sampled_from([LinkKind.LOGIT, LinkKind.PROBIT]))
def test_symmetric_links_are_even(eta, link):
    a, b = link_eval(link, eta), link_eval(link, -eta)
    assert a.w == b.w and a.logw == b.logw


# -- likelihood, score, information ----------------------------------------

def test_log_likelihood_examples(two_point):
    assert log_likelihood(two_point, "logit", [0.0]) == pytest.approx(-2 * math.log(2), abs=1e-14)
    expected = 1 - math.log(1 + math.e) - math.log(1 + 1 / math.e)
    assert log_likelihood(two_point, "logit", [1.0]) == pytest.approx(expected, abs=1e-14)
    assert expected == pytest.approx(-0.6265233, abs=1e-7)
    ds = Dataset([[1.0]], [0], [5])
    assert log_likelihood(ds, "logit", [0.0]) == pytest.approx(-5 * math.log(2), abs=1e-14)


def test_logit_matches_closed_form(rng):
    for _ in range(20):
        ds, beta = random_instance(rng)
        eta = ds.X @ beta
        closed = np.sum(ds.y * eta - ds.m * np.logaddexp(0, eta))
        assert log_likelihood(ds, "logit", beta) == pytest.approx(closed, rel=1e-12)


def test_score_example(two_point):
    assert score(two_point, "logit", [0.0]) == pytest.approx([1.0], abs=1e-15)


@pytest.mark.parametrize("link", LINKS)
def test_score_zero_at_saturated_fit(link):
    # y_i = m_i * pi_i exactly when pi = 1/2 and y = m/2
    pi_half_eta = {LinkKind.LOGIT: 0.0, LinkKind.PROBIT: 0.0,
                   LinkKind.CLOGLOG: math.log(math.log(2.0))}[link]
    ds = Dataset([[1.0], [1.0]], [2, 3], [4, 6])
    g = score(ds, link, [pi_half_eta])
    assert np.allclose(g, 0.0, atol=1e-12)


@pytest.mark.parametrize("link", LINKS)
def test_score_matches_finite_differences(link, rng):
    for _ in range(50):
        ds, beta = random_instance(rng, beta_norm=3.0)
        fd = central_gradient(lambda b: log_likelihood(ds, link, b), beta, 1e-6)
        assert fd_relative_error(score(ds, link, beta), fd) < 1e-6


def test_fisher_info_examples():
    ds = Dataset([[-1.0], [1.0]], [0, 1], [1, 1])
    assert fisher_info(ds, "logit", [0.0]).A == pytest.approx(np.array([[0.5]]))
    ds = Dataset([[1.0]], [2], [4])
    info = fisher_info(ds, "logit", [0.0])
    assert info.A[0, 0] == pytest.approx(1.0)
    assert info.logdet == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("link", LINKS)
def test_fisher_info_matches_summation(link, rng):
    for _ in range(10):
        X = rng.normal(size=(5, 2))
        m = rng.integers(1, 6, size=5)
        ds = Dataset(X, rng.integers(0, m + 1), m)
        beta = rng.normal(size=2)
        w = link_eval(link, X @ beta).w
        brute = sum(m[i] * w[i] * np.outer(X[i], X[i]) for i in range(5))
        info = fisher_info(ds, link, beta)
        assert np.allclose(info.A, brute, rtol=1e-12, atol=1e-12)
        assert np.allclose(info.A, info.A.T)
        assert np.all(np.linalg.eigvalsh(info.A) > 0)
        assert info.logdet == pytest.approx(np.linalg.slogdet(brute)[1], abs=1e-12)


def test_fisher_info_fails_when_weights_underflow():
    ds = Dataset([[1.0], [1.0]], [1, 1], [1, 1])
    with pytest.raises(CholeskyFailure):
        fisher_info(ds, "probit", [60.0])
