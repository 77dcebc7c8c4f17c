"""Thin MILP layer: columns, monotone row accumulation, exact re-verification.

The engine is only a search device.  Every incumbent it returns is rounded
on integer columns and re-checked against all rows in exact arithmetic.
Engines are selected with the ``ZERO_REGRETS_BACKEND`` environment variable.
"""

from __future__ import annotations

import logging
import math
import os
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from .errors import BackendError, InputError, NumericalError
from .game import MAXIMIZE, MINIMIZE
from .lifting import Column, LinExpr, Row

log = logging.getLogger(__name__)

INTEGRALITY_TOL = 1e-6
FEASIBILITY_TOL = 1e-6

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
TIME_LIMIT_INCUMBENT = "time_limit_with_incumbent"
TIME_LIMIT_EMPTY = "time_limit_no_incumbent"


@dataclass
class EngineResult:
    status: str  # optimal | infeasible | limit | unbounded | error
    x: np.ndarray | None
    bound: float | None
    message: str = ""


def _highs_engine(c, integrality, lb, ub, A, row_lb, row_ub, time_limit) -> EngineResult:
    options = {"disp": False, "presolve": True, "mip_rel_gap": 0.0}
    if time_limit is not None:
        options["time_limit"] = max(float(time_limit), 1e-3)
    constraints = LinearConstraint(A, row_lb, row_ub) if A.shape[0] else None
    try:
        res = milp(c, integrality=integrality, bounds=Bounds(lb, ub), constraints=constraints, options=options)
    except ValueError as exc:
        raise BackendError(f"highs rejected the model: {exc}") from exc
    status = {0: "optimal", 1: "limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
    bound = getattr(res, "mip_dual_bound", None)
    return EngineResult(status, res.x if res.x is not None else None, bound, res.message)


ENGINES: dict[str, Callable[..., EngineResult]] = {"highs": _highs_engine}


def get_engine(name: str | None = None) -> tuple[str, Callable[..., EngineResult]]:
    name = name or os.environ.get("ZERO_REGRETS_BACKEND", "highs")
    try:
        return name, ENGINES[name]
    except KeyError:
        raise InputError(f"unknown MILP backend {name!r}; available: {sorted(ENGINES)}") from None


@dataclass
class SolveOutcome:
    status: str
    values: list | None = None
    objective: Fraction | None = None
    bound: float | None = None
    time: float = 0.0

    @property
    def has_incumbent(self) -> bool:
        return self.values is not None


class SolverModel:
    """Columns, rows and a linear objective.  Rows are only ever appended."""

    def __init__(self, columns: Iterable[Column], rows: Iterable[Row] = (), backend: str | None = None, name: str = "model"):
        self.columns: list[Column] = list(columns)
        self.rows: list[Row] = []
        self.name = name
        self.backend, self._engine = get_engine(backend)
        self.objective = LinExpr()
        self.sense = MAXIMIZE
        self.objective_scale = 1
        self.add_rows(rows)

    @property
    def ncols(self) -> int:
        return len(self.columns)

    def add_columns(self, columns: Iterable[Column]) -> list[int]:
        start = len(self.columns)
        self.columns.extend(columns)
        return list(range(start, len(self.columns)))

    def add_rows(self, rows: Iterable[Row]) -> None:
        rows = list(rows)
        n = len(self.columns)
        for row in rows:
            for c, _ in row.coeffs:
                if not 0 <= c < n:
                    raise InputError(f"row references column {c}, model has {n}")
        self.rows.extend(rows)

    def set_objective(self, expr: LinExpr, sense: str) -> None:
        if sense not in (MAXIMIZE, MINIMIZE):
            raise InputError(f"unknown objective sense {sense!r}")
        self.objective = expr
        self.sense = sense
        scale = 1
        for v in expr.coeffs.values():
            scale = math.lcm(scale, v.denominator)
        self.objective_scale = scale

    def _matrix(self, rows: Sequence[Row]):
        data, ri, ci = [], [], []
        lo = np.full(len(rows), -np.inf)
        hi = np.full(len(rows), np.inf)
        for r, row in enumerate(rows):
            for c, a in row.coeffs:
                ri.append(r)
                ci.append(c)
                data.append(float(a))
            if row.sense in ("<=", "="):
                hi[r] = row.rhs
            if row.sense in (">=", "="):
                lo[r] = row.rhs
        A = sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), len(self.columns)))
        return A, lo, hi

    def solve(self, time_limit: float | None = None, extra_rows: Sequence[Row] = (), fixed: dict[int, int] | None = None) -> SolveOutcome:
        """Solve with the permanent rows plus ``extra_rows`` (this call only)
        and columns in ``fixed`` pinned to the given values."""
        t0 = time.monotonic()
        if time_limit is not None and time_limit <= 0:
            return SolveOutcome(TIME_LIMIT_EMPTY, time=0.0)
        rows = self.rows + list(extra_rows)
        ncol = len(self.columns)
        c = np.zeros(ncol)
        for col, v in self.objective.coeffs.items():
            c[col] = float(v * self.objective_scale)
        if self.sense == MAXIMIZE:
            c = -c
        lb = np.array([float(col.lower) for col in self.columns])
        ub = np.array([float(col.upper) for col in self.columns])
        for col, v in (fixed or {}).items():
            lb[col] = ub[col] = float(v)
        integrality = np.array([1 if col.integer else 0 for col in self.columns])
        A, rlo, rhi = self._matrix(rows)
        res = self._engine(c, integrality, lb, ub, A, rlo, rhi, time_limit)
        elapsed = time.monotonic() - t0

        if res.status == "infeasible":
            out = SolveOutcome(INFEASIBLE, time=elapsed)
        elif res.status == "unbounded":
            raise InputError(f"{self.name}: objective is unbounded")
        elif res.status == "error":
            raise BackendError(f"{self.name}: solver failure: {res.message}")
        elif res.x is None:
            out = SolveOutcome(TIME_LIMIT_EMPTY, time=elapsed)
        else:
            values = self._exact_point(res.x, rows, fixed or {})
            status = OPTIMAL if res.status == "optimal" else TIME_LIMIT_INCUMBENT
            bound = res.bound
            if bound is not None:
                bound = -bound if self.sense == MAXIMIZE else bound
                bound = bound / self.objective_scale + float(self.objective.const)
            out = SolveOutcome(status, values, self.objective.evaluate(values), bound, elapsed)
        log.info(
            "solve model=%s backend=%s status=%s value=%s bound=%s rows=%d cols=%d time=%.4f",
            self.name, self.backend, out.status,
            None if out.objective is None else float(out.objective),
            out.bound, len(rows), ncol, elapsed,
        )
        return out

    def _exact_point(self, x: np.ndarray, rows: Sequence[Row], fixed: dict[int, int]) -> list:
        values: list = []
        for k, (col, v) in enumerate(zip(self.columns, x)):
            if col.integer:
                r = round(float(v))
                if abs(v - r) > INTEGRALITY_TOL:
                    raise NumericalError(f"{self.name}: column {col.name} = {v} is not integral")
                q = Fraction(r)
            else:
                q = Fraction(float(v))
                q = min(max(q, col.lower), col.upper)
            if k in fixed:
                q = Fraction(fixed[k])
            elif not col.lower <= q <= col.upper:
                raise NumericalError(f"{self.name}: column {col.name} = {q} outside its bounds")
            values.append(q)
        integer_cols = [col.integer for col in self.columns]
        for row in rows:
            if all(integer_cols[c] for c, _ in row.coeffs):
                if not row.satisfied(values):
                    raise NumericalError(f"{self.name}: rounded point violates row {row}")
            else:
                tol = FEASIBILITY_TOL * max(1, abs(row.rhs), sum(abs(a) for _, a in row.coeffs))
                if row.violation(values) > tol:
                    raise NumericalError(f"{self.name}: point violates row {row} beyond tolerance")
        return values

    def to_lp_text(self) -> str:
        return lp_text(self.columns, self.rows, self.objective, self.sense)


def solve(model: SolverModel, time_limit: float | None = None) -> SolveOutcome:
    return model.solve(time_limit)


def add_rows(model: SolverModel, rows: Iterable[Row]) -> None:
    model.add_rows(rows)


def _fmt(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else repr(float(v))


def lp_text(columns: Sequence[Column], rows: Sequence[Row], objective: LinExpr, sense: str) -> str:
    """CPLEX LP-format dump, readable by most MILP solvers."""
    names = [f"c{k}_{col.name}" for k, col in enumerate(columns)]

    def terms(pairs) -> str:
        parts = [f"{'-' if a < 0 else '+'} {_fmt(abs(a))} {names[c]}" for c, a in pairs]
        return " ".join(parts) if parts else "0 " + (names[0] if names else "")

    out = ["Maximize" if sense == MAXIMIZE else "Minimize"]
    out.append(" obj: " + terms(sorted(objective.coeffs.items())))
    if objective.const:
        out.append(f"\\ objective constant {objective.const}")
    out.append("Subject To")
    for k, row in enumerate(rows):
        sense_txt = {"<=": "<=", ">=": ">=", "=": "="}[row.sense]
        out.append(f" r{k}{'_' + row.tag if row.tag else ''}: {terms(row.coeffs)} {sense_txt} {row.rhs}")
    out.append("Bounds")
    for name, col in zip(names, columns):
        out.append(f" {_fmt(col.lower)} <= {name} <= {_fmt(col.upper)}")
    ints = [name for name, col in zip(names, columns) if col.integer]
    if ints:
        out.append("General")
        out.extend(f" {name}" for name in ints)
    out.append("End")
    return "\n".join(out) + "\n"
