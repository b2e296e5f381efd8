import math

import numpy as np
import pytest

from firthfit import (
    Dataset,
    FitConfig,
    FitStatus,
    LinkKind,
    RankDeficient,
    fit_mle,
    fit_penalized,
    penalized_gradient,
    penalized_loglik,
)
from firthfit.harness import make_scenario, multistart_spread, separated_dataset

from conftest import LINKS


def test_intercept_only_closed_form():
    ds = Dataset([[1.0]], [3], [10])
    res = fit_penalized(ds)
    assert res.converged
    assert res.beta_hat[0] == pytest.approx(math.log(3.5 / 7.5), abs=1e-6)


def test_all_zero_closed_form():
    res = fit_penalized(Dataset([[1.0]], [0], [5]))
    assert res.converged
    assert res.beta_hat[0] == pytest.approx(-math.log(11), abs=1e-6)


def test_two_point_separated_closed_form(two_point):
    res = fit_penalized(two_point)
    assert res.converged
    assert res.beta_hat[0] == pytest.approx(math.log(5), abs=1e-6)
    assert res.grad_norm <= 1e-8


def test_mle_matches_closed_form():
    res = fit_mle(Dataset([[1.0]], [3], [10]))
    assert res.converged
    assert res.beta_hat[0] == pytest.approx(math.log(3 / 7), abs=1e-8)


def test_mle_symmetric_data_at_zero():
    ds = Dataset([[-1.0], [1.0]], [1, 1], [2, 2])
    res = fit_mle(ds)
    assert res.converged and abs(res.beta_hat[0]) < 1e-12


@pytest.mark.parametrize("link", LINKS)
def test_mle_diverges_on_two_point(two_point, link):
    res = fit_mle(two_point, link)
    assert res.status is FitStatus.DIVERGENCE_SUSPECTED
    assert np.linalg.norm(res.beta_hat) > 5


def _grid_argmax(ds, link, lo=-3.0, hi=6.0, step=1e-4):
    """Grid search, coarse to fine; the fine pass has spacing ``step``."""
    for width in (1e-2, step):
        grid = np.arange(lo, hi + width / 2, width)
        vals = np.array([penalized_loglik(ds, link, [b]) for b in grid])
        best = grid[np.argmax(vals)]
        lo, hi = best - 2e-2, best + 2e-2
    return best


@pytest.mark.parametrize("link", [LinkKind.PROBIT, LinkKind.CLOGLOG])
def test_two_point_non_canonical_against_grid(two_point, link):
    res = fit_penalized(two_point, link)
    assert res.converged
    assert res.beta_hat[0] == pytest.approx(_grid_argmax(two_point, link), abs=2e-4)


@pytest.mark.parametrize("link", LINKS)
def test_penalized_trace_is_monotone(link):
    ds = separated_dataset(3, p=3)
    res = fit_penalized(ds, link)
    assert res.converged
    f = np.array([t[0] for t in res.trace])
    noise = 8 * np.finfo(float).eps * (1 + np.abs(f[:-1]))
    assert np.all(np.diff(f) >= -noise)
    assert res.h.sum() == pytest.approx(ds.p, abs=1e-8)
    assert np.all(np.isfinite(res.se)) and np.all(res.se > 0)


@pytest.mark.parametrize("link", LINKS)
def test_overlapped_penalized_close_to_mle(link):
    ds = make_scenario("overlapped", seed=2)
    mle, pen = fit_mle(ds, link), fit_penalized(ds, link)
    assert mle.converged and pen.converged
    # the penalty is O(1) against an O(n) likelihood
    assert np.max(np.abs(mle.beta_hat - pen.beta_hat)) < 0.05


def test_expected_curvature_still_converges_for_logit():
    ds = separated_dataset(5, p=2)
    a = fit_penalized(ds, "logit", FitConfig(curvature="expected"))
    b = fit_penalized(ds, "logit")
    assert a.converged and b.converged
    assert a.beta_hat == pytest.approx(b.beta_hat, abs=1e-7)


def test_max_iterations_status():
    res = fit_penalized(separated_dataset(4, p=3), "cloglog", FitConfig(max_iter=1))
    assert res.status is FitStatus.MAX_ITERATIONS
    assert res.iterations == 1


def test_rank_deficient_rejected():
    ds = Dataset([[1.0, 2.0], [2.0, 4.0]], [0, 1], [1, 1])
    with pytest.raises(RankDeficient):
        fit_penalized(ds)


@pytest.mark.parametrize("kwargs", [dict(max_iter=0), dict(grad_tol=0.0),
                                    dict(step_shrink=1.0), dict(curvature="observed")])
def test_bad_config(kwargs):
    with pytest.raises(ValueError):
        FitConfig(**kwargs)


@pytest.mark.parametrize("seed", range(6))
def test_logit_start_value_does_not_matter(seed):
    dist, spread = multistart_spread(separated_dataset(seed, p=3), "logit",
                                     n_starts=6, seed=seed)
    assert dist < 1e-6 and spread < 1e-9


@pytest.mark.parametrize("link, start", [
    (LinkKind.PROBIT, [0.31, -1.61, 1.08]),
    (LinkKind.CLOGLOG, [0.84, -0.85, -1.65]),
])
def test_non_canonical_links_can_have_two_local_maxima(link, start):
    # Found by multistart: a second, lower local maximum of the penalized
    # likelihood. The fit from the origin reaches the higher one.
    ds = separated_dataset(11, p=3)
    low = fit_penalized(ds, link, FitConfig(beta0=start))
    high = fit_penalized(ds, link)
    assert low.converged and high.converged
    assert np.linalg.norm(low.beta_hat - high.beta_hat) > 1.0
    assert high.objective - low.objective > 0.2
    b = low.beta_hat
    H = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1e-5
        H[:, j] = (penalized_gradient(ds, link, b + e)
                   - penalized_gradient(ds, link, b - e)) / 2e-5
    assert np.all(np.linalg.eigvalsh(0.5 * (H + H.T)) < 0)


def test_to_dict_is_plain():
    d = fit_penalized(Dataset([[1.0]], [3], [10])).to_dict()
    assert d["status"] == "converged" and d["link"] == "logit"
    assert isinstance(d["beta_hat"][0], float)
