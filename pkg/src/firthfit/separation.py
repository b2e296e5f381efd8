"""Separation detection by linear programming.

The detector asks for a direction ``b`` in the box ``[-1, 1]^p`` with
``x_i'b >= 0`` for all-success rows, ``x_i'b <= 0`` for all-failure rows and
``x_i'b = 0`` for rows with mixed outcomes, maximizing the total signed margin.
A positive optimum certifies separation. The LPs are small and dense, so they
are solved with a two-phase tableau simplex using Bland's rule.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Infeasible, LpNumericalFailure, Unbounded
from .model import Dataset

SEPARATION_TOL = 1e-9
_PIVOT_TOL = 1e-11


@dataclass(frozen=True)
class LpProblem:
    """``maximize c'z  s.t.  A z (senses) rhs,  lower <= z <= upper``.

    ``senses`` holds one of ``"<="``, ``"="``, ``">="`` per row of ``A``.
    """

    objective: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        q = c.shape[0]
        A = np.asarray(self.A, dtype=float).reshape(-1, q)
        rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        senses = tuple(self.senses)
        if A.shape[0] != rhs.shape[0] or len(senses) != rhs.shape[0]:
            raise ValueError("constraint rows, senses and rhs disagree in length")
        if lo.shape != (q,) or hi.shape != (q,):
            raise ValueError("bounds must match the number of variables")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("variable bounds must be finite")
        if any(s not in ("<=", "=", ">=") for s in senses):
            raise ValueError(f"unknown constraint sense in {senses}")
        for name, val in (("objective", c), ("A", A), ("rhs", rhs),
                          ("lower", lo), ("upper", hi), ("senses", senses)):
            object.__setattr__(self, name, val)


@dataclass(frozen=True)
class LpSolution:
    optimum: float
    x: np.ndarray
    iterations: int


def _pivot(T, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run_simplex(T, basis, cost, allowed, max_iter):
    """Maximize ``cost'x`` over the tableau in place. Bland's rule throughout."""
    n_rows = T.shape[0]
    for it in range(max_iter):
        reduced = cost - cost[basis] @ T[:, :-1]
        scale = 1.0 + np.max(np.abs(cost))
        entering = [j for j in np.flatnonzero(reduced > _PIVOT_TOL * scale) if allowed[j]]
        if not entering:
            return it
        j = entering[0]
        col = T[:, j]
        best_r, best_ratio = -1, np.inf
        for r in range(n_rows):
            if col[r] > _PIVOT_TOL:
                ratio = T[r, -1] / col[r]
                if ratio < best_ratio - _PIVOT_TOL or (
                        abs(ratio - best_ratio) <= _PIVOT_TOL and basis[r] < basis[best_r]):
                    best_r, best_ratio = r, ratio
        if best_r < 0:
            raise Unbounded("objective is unbounded above")
        _pivot(T, best_r, j)
        basis[best_r] = j
    raise LpNumericalFailure(f"simplex did not terminate within {max_iter} pivots")


def lp_solve(problem: LpProblem, max_iter: int = 10_000) -> LpSolution:
    """Solve a small dense LP with finite variable bounds.

    Raises
    ------
    Infeasible
        Phase one could not drive the artificial variables to zero.
    Unbounded
        Cannot happen with finite bounds; kept as a guard.
    LpNumericalFailure
        The pivot budget ran out.
    """
    c, A, lo, hi = problem.objective, problem.A, problem.lower, problem.upper
    q = c.shape[0]
    width = hi - lo
    if np.any(width < 0):
        raise Infeasible("a lower bound exceeds its upper bound")

    # shift z = lower + v so that 0 <= v <= width
    rows = [A[i] for i in range(A.shape[0])] + [np.eye(q)[j] for j in range(q)]
    rhs = list(problem.rhs - A @ lo) + list(width)
    senses = list(problem.senses) + ["<="] * q
    flip = {"<=": ">=", ">=": "<=", "=": "="}
    for i, b in enumerate(rhs):
        if b < 0:
            rows[i], rhs[i], senses[i] = -rows[i], -b, flip[senses[i]]

    k = len(rows)
    n_slack = sum(s != "=" for s in senses)
    n_art = sum(s != "<=" for s in senses)
    n_cols = q + n_slack + n_art
    T = np.zeros((k, n_cols + 1))
    basis = [0] * k
    s_idx, a_idx = q, q + n_slack
    artificial = np.zeros(n_cols, dtype=bool)
    for i in range(k):
        T[i, :q] = rows[i]
        T[i, -1] = rhs[i]
        if senses[i] == "<=":
            T[i, s_idx] = 1.0
            basis[i] = s_idx
            s_idx += 1
        else:
            if senses[i] == ">=":
                T[i, s_idx] = -1.0
                s_idx += 1
            T[i, a_idx] = 1.0
            artificial[a_idx] = True
            basis[i] = a_idx
            a_idx += 1

    iterations = 0
    if n_art:
        phase1 = np.where(artificial, -1.0, 0.0)
        iterations += _run_simplex(T, basis, phase1, np.ones(n_cols, bool), max_iter)
        if phase1[basis] @ T[:, -1] < -1e-9 * (1.0 + np.max(np.abs(rhs))):
            raise Infeasible("constraints admit no feasible point")
        keep = []
        for r in range(k):
            if artificial[basis[r]]:
                cand = [j for j in range(n_cols)
                        if not artificial[j] and abs(T[r, j]) > _PIVOT_TOL]
                if not cand:
                    continue  # redundant row
                _pivot(T, r, cand[0])
                basis[r] = cand[0]
            keep.append(r)
        T = T[keep]
        basis = [basis[r] for r in keep]

    cost = np.zeros(n_cols)
    cost[:q] = c
    iterations += _run_simplex(T, basis, cost, ~artificial, max_iter)
    v = np.zeros(n_cols)
    v[basis] = T[:, -1]
    z = lo + np.clip(v[:q], 0.0, width)
    return LpSolution(optimum=float(c @ z), x=z, iterations=iterations)


# ---------------------------------------------------------------------------
# Separation
# ---------------------------------------------------------------------------

class SeparationKind(str, enum.Enum):
    NONE = "none"
    QUASI_COMPLETE = "quasi_complete"
    COMPLETE = "complete"


class Side(str, enum.Enum):
    ON_HYPERPLANE = "on_hyperplane"
    CORRECTLY_SIDED = "correctly_sided"


@dataclass(frozen=True)
class SeparationReport:
    separated: bool
    direction: np.ndarray
    classification: tuple
    kind: SeparationKind
    lp_optimum: float

    def to_dict(self) -> dict:
        return {
            "separated": self.separated,
            "kind": self.kind.value,
            "direction": [float(v) for v in self.direction],
            "classification": [c.value for c in self.classification],
            "lp_optimum": float(self.lp_optimum),
        }


def outcome_signs(ds: Dataset) -> np.ndarray:
    """+1 for all-success rows, -1 for all-failure rows, 0 for mixed rows."""
    return np.where(ds.y == ds.m, 1, np.where(ds.y == 0, -1, 0))


def _sign_rows(ds: Dataset, extra_cols: int = 0):
    c = outcome_signs(ds)
    A = np.hstack([ds.X, np.zeros((ds.n, extra_cols))])
    senses = [">=" if ci > 0 else "<=" if ci < 0 else "=" for ci in c]
    return c, A, senses


def certificate_residuals(ds: Dataset, b) -> np.ndarray:
    """Violation of each sign constraint by direction ``b`` (zero when satisfied)."""
    c = outcome_signs(ds)
    eta = ds.X @ np.asarray(b, dtype=float)
    return np.where(c > 0, np.maximum(-eta, 0.0),
                    np.where(c < 0, np.maximum(eta, 0.0), np.abs(eta)))


def detect_separation(ds: Dataset) -> SeparationReport:
    """Decide whether the data are separated and return a certificate direction.

    Complete separation is confirmed with a second LP that maximizes the
    smallest margin ``c_i x_i'b`` over the rows with all-or-nothing outcomes,
    so the returned direction puts none of them on the hyperplane.
    """
    c, A, senses = _sign_rows(ds)
    p = ds.p
    first = lp_solve(LpProblem(objective=c @ ds.X, A=A, senses=senses,
                               rhs=np.zeros(ds.n), lower=-np.ones(p), upper=np.ones(p)))
    if not first.optimum > SEPARATION_TOL:
        return SeparationReport(
            separated=False, direction=np.zeros(p),
            classification=tuple(Side.ON_HYPERPLANE for _ in range(ds.n)),
            kind=SeparationKind.NONE, lp_optimum=first.optimum)

    # maximize t subject to c_i x_i'b >= t on decided rows
    decided = c != 0
    A2 = np.hstack([ds.X * np.where(decided, c, 1)[:, None],
                    -decided[:, None].astype(float)])
    senses2 = [">=" if d else "=" for d in decided]
    obj2 = np.zeros(p + 1)
    obj2[-1] = 1.0
    second = lp_solve(LpProblem(objective=obj2, A=A2, senses=senses2,
                                rhs=np.zeros(ds.n),
                                lower=np.r_[-np.ones(p), 0.0],
                                upper=np.ones(p + 1)))
    if second.optimum > SEPARATION_TOL:
        b, kind = second.x[:p], SeparationKind.COMPLETE
    else:
        b, kind = first.x, SeparationKind.QUASI_COMPLETE
    margins = np.abs(ds.X @ b)
    sides = tuple(Side.ON_HYPERPLANE if mg <= SEPARATION_TOL else Side.CORRECTLY_SIDED
                  for mg in margins)
    return SeparationReport(separated=True, direction=b, classification=sides,
                            kind=kind, lp_optimum=first.optimum)


__all__ = ["LpProblem", "LpSolution", "lp_solve", "SeparationKind", "Side",
           "SeparationReport", "detect_separation", "certificate_residuals",
           "outcome_signs", "SEPARATION_TOL"]
