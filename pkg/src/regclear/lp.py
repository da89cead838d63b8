"""Dense two-phase simplex for the small dispatch LPs used by every market.

Programs are always minimisations. Dual values follow the sensitivity
convention ``dual = d(objective) / d(rhs)``, so a binding ``>=`` requirement
has a non-negative dual and a binding ``<=`` limit a non-positive one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

LE, GE, EQ = "<=", ">=", "="
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"

DEFAULT_MAX_PIVOTS = 10_000
# consecutive degenerate pivots tolerated before switching to Bland's rule
DEGENERATE_STREAK = 10


class LpError(Exception):
    pass


class MalformedProgramError(LpError, ValueError):
    pass


class IterationLimitError(LpError, RuntimeError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    cost: float = 0.0


@dataclass(frozen=True)
class Constraint:
    name: str
    coefficients: Mapping[str, float]
    relation: str
    rhs: float


class LinearProgram:
    """A named-variable, named-constraint minimisation problem.

    Variables and constraints keep their declaration order, which is also the
    order used to break ties between equally attractive pivots.
    """

    def __init__(self):
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self._var_index: dict[str, int] = {}
        self._con_names: set[str] = set()

    def add_variable(self, name, lower=0.0, upper=math.inf, cost=0.0):
        if name in self._var_index:
            raise MalformedProgramError(f"duplicate variable name {name!r}")
        self._var_index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lower), float(upper), float(cost)))
        return name

    def add_constraint(self, name, coefficients, relation, rhs):
        if name in self._con_names:
            raise MalformedProgramError(f"duplicate constraint name {name!r}")
        if relation not in (LE, GE, EQ):
            raise MalformedProgramError(f"constraint {name!r}: bad relation {relation!r}")
        self._con_names.add(name)
        coefs = {k: float(v) for k, v in coefficients.items()}
        self.constraints.append(Constraint(name, coefs, relation, float(rhs)))
        return name

    def set_rhs(self, name, rhs):
        """Return a copy of the program with one constraint's rhs replaced."""
        out = LinearProgram()
        for v in self.variables:
            out.add_variable(v.name, v.lower, v.upper, v.cost)
        found = False
        for c in self.constraints:
            if c.name == name:
                found = True
                out.add_constraint(c.name, c.coefficients, c.relation, rhs)
            else:
                out.add_constraint(c.name, c.coefficients, c.relation, c.rhs)
        if not found:
            raise KeyError(name)
        return out

    def index(self, name):
        return self._var_index[name]

    def check(self):
        for v in self.variables:
            if math.isnan(v.lower) or math.isnan(v.upper) or not math.isfinite(v.cost):
                raise MalformedProgramError(f"variable {v.name!r}: non-finite data")
            if v.lower == math.inf or v.upper == -math.inf:
                raise MalformedProgramError(f"variable {v.name!r}: unusable bound")
            if v.lower > v.upper:
                raise MalformedProgramError(f"variable {v.name!r}: lower > upper")
        for c in self.constraints:
            if not math.isfinite(c.rhs):
                raise MalformedProgramError(f"constraint {c.name!r}: non-finite rhs")
            for k, a in c.coefficients.items():
                if k not in self._var_index:
                    raise MalformedProgramError(f"constraint {c.name!r}: unknown variable {k!r}")
                if not math.isfinite(a):
                    raise MalformedProgramError(f"constraint {c.name!r}: non-finite coefficient on {k!r}")


@dataclass(frozen=True)
class LpSolution:
    status: str
    primal: dict[str, float] = field(default_factory=dict)
    duals: dict[str, float] = field(default_factory=dict)
    objective: float = math.nan
    reduced_costs: dict[str, float] = field(default_factory=dict)
    pivots: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


def solve(lp: LinearProgram, max_pivots: int = DEFAULT_MAX_PIVOTS, tol: float = 1e-9) -> LpSolution:
    """Solve ``lp`` and return primal values, constraint duals and the objective.

    Infeasible and unbounded programs are reported through ``status``.
    Raises :class:`MalformedProgramError` for bad input and
    :class:`IterationLimitError` if ``max_pivots`` is exceeded.
    """
    lp.check()
    return _Simplex(lp, max_pivots, tol).run()


class _Simplex:
    def __init__(self, lp, max_pivots, tol):
        self.lp = lp
        self.max_pivots = max_pivots
        self.tol = tol
        self.pivots = 0
        self._build()

    def _build(self):
        lp = self.lp
        n = len(lp.variables)
        # each original variable maps to std columns: x = offset + sum(sign * x_std)
        self.var_cols: list[list[tuple[int, float]]] = []
        self.var_offset = np.zeros(n)
        bound_rows = []  # (std col, ub) for x_std <= ub
        ncol = 0
        for j, v in enumerate(lp.variables):
            if math.isfinite(v.lower):
                self.var_offset[j] = v.lower
                self.var_cols.append([(ncol, 1.0)])
                if math.isfinite(v.upper):
                    bound_rows.append((ncol, v.upper - v.lower))
                ncol += 1
            elif math.isfinite(v.upper):
                self.var_offset[j] = v.upper
                self.var_cols.append([(ncol, -1.0)])
                ncol += 1
            else:
                self.var_cols.append([(ncol, 1.0), (ncol + 1, -1.0)])
                ncol += 2
        nstd = ncol

        m_con = len(lp.constraints)
        m = m_con + len(bound_rows)
        A = np.zeros((m, nstd))
        b = np.zeros(m)
        rel = []
        for i, con in enumerate(lp.constraints):
            rhs = con.rhs
            for name, a in con.coefficients.items():
                j = lp.index(name)
                rhs -= a * self.var_offset[j]
                for col, sign in self.var_cols[j]:
                    A[i, col] += a * sign
            b[i] = rhs
            rel.append(con.relation)
        for k, (col, ub) in enumerate(bound_rows):
            A[m_con + k, col] = 1.0
            b[m_con + k] = ub
            rel.append(LE)

        c = np.zeros(nstd)
        for j, v in enumerate(lp.variables):
            for col, sign in self.var_cols[j]:
                c[col] += v.cost * sign

        flip = np.where(b < 0, -1.0, 1.0)
        A *= flip[:, None]
        b *= flip
        swap = {LE: GE, GE: LE, EQ: EQ}
        rel = [swap[r] if f < 0 else r for r, f in zip(rel, flip)]

        n_slack = sum(r != EQ for r in rel)
        n_art = sum(r != LE for r in rel)
        N = nstd + n_slack + n_art
        T = np.zeros((m + 2, N + 1))
        T[:m, :nstd] = A
        T[:m, -1] = b
        basis = np.zeros(m, dtype=np.int64)
        ident = np.zeros(m, dtype=np.int64)  # column holding +e_i at start
        s = nstd
        a = nstd + n_slack
        for i, r in enumerate(rel):
            if r == LE:
                T[i, s] = 1.0
                basis[i] = ident[i] = s
                s += 1
            else:
                if r == GE:
                    T[i, s] = -1.0
                    s += 1
                T[i, a] = 1.0
                basis[i] = ident[i] = a
                a += 1
        self.art_start = nstd + n_slack
        # row m: phase-2 reduced costs, row m+1: phase-1 reduced costs
        T[m, :nstd] = c
        art_rows = [i for i, r in enumerate(rel) if r != LE]
        if art_rows:
            T[m + 1, :] = -T[art_rows, :].sum(axis=0)
            T[m + 1, self.art_start:N] = 0.0
        self.T = T
        self.m, self.N, self.nstd = m, N, nstd
        self.m_con = m_con
        self.basis = basis
        self.ident = ident
        self.flip = flip
        self.scale = max(1.0, float(np.abs(b).max(initial=0.0)))

    def _pivot(self, r, col):
        T = self.T
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise IterationLimitError(f"simplex exceeded {self.max_pivots} pivots")
        prow = T[r] / T[r, col]
        colv = T[:, col].copy()
        colv[r] = 0.0
        rows = np.flatnonzero(colv)
        T[rows] -= colv[rows, None] * prow
        T[r] = prow
        T[:, col] = 0.0
        T[r, col] = 1.0
        self.basis[r] = col

    def _iterate(self, cost_row, ncols):
        """Run simplex pivots on ``cost_row`` over columns ``[0, ncols)``."""
        T, m, tol = self.T, self.m, self.tol
        streak = 0
        while True:
            d = T[cost_row, :ncols]
            if streak >= DEGENERATE_STREAK:
                cand = np.flatnonzero(d < -tol)
                if cand.size == 0:
                    return OPTIMAL
                col = int(cand[0])
            else:
                col = int(np.argmin(d))
                if d[col] >= -tol:
                    return OPTIMAL
            colv = T[:m, col]
            rows = np.flatnonzero(colv > tol)
            if rows.size == 0:
                return UNBOUNDED
            ratios = T[rows, -1] / colv[rows]
            best = ratios.min()
            ties = rows[ratios <= best + tol * max(1.0, abs(best))]
            r = int(ties[np.argmin(self.basis[ties])])
            streak = streak + 1 if best <= tol else 0
            self._pivot(r, col)

    def _drive_out_artificials(self):
        T = self.T
        for r in range(self.m):
            if self.basis[r] >= self.art_start:
                row = T[r, : self.art_start]
                nz = np.flatnonzero(np.abs(row) > 1e-9)
                if nz.size:
                    self._pivot(r, int(nz[0]))

    def run(self):
        lp, T, m = self.lp, self.T, self.m
        if self.art_start < self.N:
            self._iterate(m + 1, self.N)
            if -T[m + 1, -1] > 1e-9 * self.scale:
                return LpSolution(INFEASIBLE, pivots=self.pivots)
            self._drive_out_artificials()
        status = self._iterate(m, self.art_start)
        if status == UNBOUNDED:
            return LpSolution(UNBOUNDED, pivots=self.pivots)

        xstd = np.zeros(self.N)
        xstd[self.basis] = T[:m, -1]
        primal = {}
        for j, v in enumerate(lp.variables):
            x = self.var_offset[j] + sum(sign * xstd[col] for col, sign in self.var_cols[j])
            # snap round-off onto the bound it came from
            if math.isfinite(v.lower) and abs(x - v.lower) <= 1e-12 * max(1.0, abs(v.lower)):
                x = v.lower
            elif math.isfinite(v.upper) and abs(x - v.upper) <= 1e-12 * max(1.0, abs(v.upper)):
                x = v.upper
            primal[v.name] = float(x)

        y = -T[m, self.ident] * self.flip
        y[np.abs(y) < 1e-12] = 0.0
        duals = {con.name: float(y[i]) for i, con in enumerate(lp.constraints)}
        reduced = {}
        for v in lp.variables:
            reduced[v.name] = v.cost
        for i, con in enumerate(lp.constraints):
            if duals[con.name]:
                for name, a in con.coefficients.items():
                    reduced[name] -= a * duals[con.name]
        objective = math.fsum(v.cost * primal[v.name] for v in lp.variables)
        return LpSolution(OPTIMAL, primal, duals, float(objective), reduced, self.pivots)


def constraint_activity(lp: LinearProgram, con: Constraint, primal: Mapping[str, float]) -> float:
    return math.fsum(a * primal[k] for k, a in con.coefficients.items())


def dual_objective(lp: LinearProgram, sol: LpSolution) -> float:
    """Objective of the dual implied by ``sol.duals`` and ``sol.reduced_costs``.

    Bound multipliers are taken from the reduced costs: a positive reduced
    cost prices the lower bound, a negative one the upper bound.
    """
    terms = [sol.duals[c.name] * c.rhs for c in lp.constraints]
    for v in lp.variables:
        d = sol.reduced_costs[v.name]
        if d > 1e-12 and math.isfinite(v.lower):
            terms.append(d * v.lower)
        elif d < -1e-12 and math.isfinite(v.upper):
            terms.append(d * v.upper)
    return math.fsum(terms)
