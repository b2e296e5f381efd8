import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from firthfit import Dataset, SeparationKind, detect_separation, lp_solve
from firthfit.errors import Infeasible
from firthfit.harness import make_scenario, overlapped_dataset, separated_dataset
from firthfit.separation import LpProblem, Side, certificate_residuals


def test_two_point_is_complete(two_point):
    rep = detect_separation(two_point)
    assert rep.separated and rep.kind is SeparationKind.COMPLETE
    assert rep.direction[0] > 0
    assert rep.classification == (Side.CORRECTLY_SIDED,) * 2


def test_mixed_rows_not_separated():
    ds = Dataset([[1.0], [1.0]], [0, 1], [1, 1])
    rep = detect_separation(ds)
    assert not rep.separated and rep.kind is SeparationKind.NONE
    assert rep.lp_optimum == pytest.approx(0.0, abs=1e-12)


def test_quasi_complete():
    # the last two rows sit on the hyperplane with opposite outcomes
    X = [[1.0, -2.0], [1.0, -1.0], [1.0, 1.0], [1.0, 2.0], [1.0, 0.0], [1.0, 0.0]]
    ds = Dataset.binary(np.array(X)[:, 1:], [0, 0, 1, 1, 0, 1])
    rep = detect_separation(ds)
    assert rep.separated and rep.kind is SeparationKind.QUASI_COMPLETE
    assert rep.classification[-2:] == (Side.ON_HYPERPLANE,) * 2
    assert np.all(certificate_residuals(ds, rep.direction) <= 1e-9)


def test_quasi_separated_scenarios():
    for seed in range(5):
        ds = make_scenario("quasi_separated", seed)
        rep = detect_separation(ds)
        assert rep.kind is SeparationKind.QUASI_COMPLETE


@pytest.mark.parametrize("seed", range(15))
def test_certificates_and_verdicts(seed):
    sep = detect_separation(separated_dataset(seed))
    assert sep.kind is SeparationKind.COMPLETE
    assert np.max(np.abs(sep.direction)) <= 1 + 1e-12
    assert not detect_separation(overlapped_dataset(seed)).separated


def test_grouped_counts_with_mixed_rows():
    ds = Dataset([[1.0], [2.0]], [3, 0], [4, 2])
    # first row mixed -> b = 0 forced
    assert not detect_separation(ds).separated


def test_to_dict():
    d = detect_separation(make_scenario("two_point")).to_dict()
    assert d["kind"] == "complete" and d["separated"] is True


def test_lp_infeasible():
    prob = LpProblem([1.0], [[1.0]], [">="], [5.0], [0.0], [1.0])
    with pytest.raises(Infeasible):
        lp_solve(prob)


def test_lp_bad_shapes():
    with pytest.raises(ValueError):
        LpProblem([1.0, 2.0], [[1.0, 1.0]], ["<=", "<="], [1.0], [0, 0], [1, 1])
    with pytest.raises(ValueError):
        LpProblem([1.0], [[1.0]], ["<"], [1.0], [0.0], [1.0])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_lp_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    q, k = int(rng.integers(1, 5)), int(rng.integers(0, 6))
    c = rng.normal(size=q)
    A = rng.normal(size=(k, q))
    senses = list(rng.choice(["<=", ">=", "="], size=k, p=[0.45, 0.45, 0.1]))
    x0 = rng.uniform(-1, 1, size=q)  # keep the problem feasible
    rhs = A @ x0 + np.where(np.array(senses) == "<=", 0.5, np.where(np.array(senses) == ">=", -0.5, 0.0))
    lo, hi = -np.ones(q) * 2, np.ones(q) * 2
    sol = lp_solve(LpProblem(c, A, senses, rhs, lo, hi))
    ub = [(A[i], rhs[i]) if s == "<=" else (-A[i], -rhs[i]) for i, s in enumerate(senses) if s != "="]
    eq = [(A[i], rhs[i]) for i, s in enumerate(senses) if s == "="]
    ref = linprog(-c,
                  A_ub=np.array([a for a, _ in ub]) if ub else None,
                  b_ub=np.array([b for _, b in ub]) if ub else None,
                  A_eq=np.array([a for a, _ in eq]) if eq else None,
                  b_eq=np.array([b for _, b in eq]) if eq else None,
                  bounds=list(zip(lo, hi)), method="highs")
    assert ref.status == 0
    assert sol.optimum == pytest.approx(-ref.fun, abs=1e-8)
    # primal feasibility of our point
    r = A @ sol.x - rhs
    for ri, s in zip(r, senses):
        assert (s == "<=" and ri <= 1e-8) or (s == ">=" and ri >= -1e-8) or (s == "=" and abs(ri) <= 1e-8)
