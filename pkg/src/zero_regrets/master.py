"""The cutting-plane master loop.

Optimize welfare over the lifted set plus every cut found so far, hand the
incumbent to the separation oracle, and stop once the oracle certifies it.
Because all equilibrium cuts are valid, the first certified incumbent is a
welfare-optimal PNE, and an infeasible master proves there is none.

Extensions: enumeration (certified profiles are removed by no-good rows),
absolute epsilon (constant or minimized column) and relative epsilon.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .backend import INFEASIBLE, OPTIMAL, SolverModel
from .bruteforce import price_ratios
from .errors import InputError, InternalError, NumericalError, OracleTimeout
from .game import MAXIMIZE, MINIMIZE, GameInstance, StrategyProfile, gain, welfare
from .lifting import Column, LinExpr, LiftedModel, Row, build_lifted_model, make_row, row_from_expr
from .oracle import DOMINANCE, EPSILON, GENERAL, NOGOOD, PAYOFF, EquilibriumCut, Oracle, Tolerance, extend_values

log = logging.getLogger(__name__)

SELECT = "select"
ENUMERATE = "enumerate"
EPSILON_ABS = "epsilon_abs"
EPSILON_REL = "epsilon_rel"
MODES = (SELECT, ENUMERATE, EPSILON_ABS, EPSILON_REL)

PNE_FOUND = "PNE_FOUND"
NO_PNE = "NO_PNE"
TIME_LIMIT = "TIME_LIMIT"

CSV_COLUMNS = ["instance", "status", "PoS", "#EI", "#EI_P", "#EI_D", "#It", "Time", "Time-1st", "PNE*", "OSW", "Bound"]


@dataclass
class SolveConfig:
    """``epsilon=None`` in ``epsilon_abs`` mode minimizes epsilon instead of
    optimizing welfare."""

    mode: str = SELECT
    epsilon: Fraction | None = None
    limit: int | None = None
    time_limit: float | None = 1800.0
    cut_batch: str = "all"
    strategic_cuts: bool = True
    tie_break: bool = True
    workers: int = 1
    backend: str | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise InputError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.cut_batch not in ("all", "one"):
            raise InputError("cut batching must be 'all' or 'one'")
        if self.limit is not None and self.limit < 1:
            raise InputError("enumeration limit must be at least 1")
        if self.epsilon is not None:
            self.epsilon = Fraction(self.epsilon)
            if self.epsilon < 0:
                raise InputError("epsilon must be nonnegative")
        if self.mode == EPSILON_REL and self.epsilon is None:
            raise InputError("relative epsilon needs a value")

    @property
    def minimize_epsilon(self) -> bool:
        return self.mode == EPSILON_ABS and self.epsilon is None


def _frac_out(v: Fraction | None):
    if v is None:
        return None
    return str(v) if v.denominator != 1 else v.numerator


@dataclass
class SolveReport:
    status: str
    mode: str
    sense: str
    instance: str = ""
    pnes: list[tuple[StrategyProfile, Fraction]] = field(default_factory=list)
    osw: Fraction | None = None
    osw_profile: StrategyProfile | None = None
    pos: Fraction | None = None
    poa: Fraction | None = None
    ei: int = 0
    ei_d: int = 0
    ei_p: int = 0
    iterations: int = 0
    time_total: float = 0.0
    time_first: float | None = None
    bound: Fraction | float | None = None
    epsilon: Fraction | None = None
    regrets: list[Fraction] | None = None
    objective_sense: str = MAXIMIZE
    objective_trace: list[Fraction] = field(default_factory=list)
    incumbent_trace: list[StrategyProfile] = field(default_factory=list)
    cuts: list[EquilibriumCut] = field(default_factory=list)

    @property
    def best(self) -> tuple[StrategyProfile, Fraction] | None:
        return self.pnes[0] if self.pnes else None

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "instance": self.instance,
            "status": self.status,
            "mode": self.mode,
            "sense": self.sense,
            "pnes": [{"profile": [list(x) for x in p], "welfare": _frac_out(w)} for p, w in self.pnes],
            "osw": _frac_out(self.osw),
            "osw_profile": None if self.osw_profile is None else [list(x) for x in self.osw_profile],
            "pos": _frac_out(self.pos),
            "poa": _frac_out(self.poa),
            "counters": {"EI": self.ei, "EI_D": self.ei_d, "EI_P": self.ei_p, "iterations": self.iterations},
            "bound": _frac_out(self.bound) if isinstance(self.bound, Fraction) else self.bound,
            "epsilon": _frac_out(self.epsilon),
            "regrets": None if self.regrets is None else [_frac_out(r) for r in self.regrets],
            "objective_trace": [_frac_out(v) for v in self.objective_trace],
        }
        if timings:
            out["time_total"] = self.time_total
            out["time_first"] = self.time_first
        return out

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), indent=2)

    def csv_row(self) -> dict:
        best = self.best
        return {
            "instance": self.instance,
            "status": self.status,
            "PoS": "" if self.pos is None else f"{float(self.pos):.4f}",
            "#EI": self.ei,
            "#EI_P": self.ei_p,
            "#EI_D": self.ei_d,
            "#It": self.iterations,
            "Time": f"{self.time_total:.3f}",
            "Time-1st": "" if self.time_first is None else f"{self.time_first:.3f}",
            "PNE*": "" if best is None else _frac_out(best[1]),
            "OSW": "" if self.osw is None else _frac_out(self.osw),
            "Bound": "" if self.bound is None else (_frac_out(self.bound) if isinstance(self.bound, Fraction) else self.bound),
        }

    def csv_line(self, header: bool = False) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
        if header:
            w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


def _expr_range(expr: LinExpr, columns: Sequence[Column]) -> Fraction:
    """Width of the interval ``expr`` can take over the column box."""
    return sum((abs(v) * (columns[c].upper - columns[c].lower) for c, v in expr.coeffs.items()), Fraction(0))


class _Session:
    """State of one master run.  Column layout: lifted columns, the epsilon
    column (when minimized), then columns appended by cut extensions."""

    def __init__(self, game: GameInstance, config: SolveConfig, lifted: LiftedModel | None):
        self.game = game
        self.config = config
        self.lifted = lifted or build_lifted_model(game)
        self.oracle = Oracle(game, self.lifted, config.backend, config.workers)
        self.master = SolverModel(self.lifted.columns, self.lifted.rows, config.backend, name="master")
        self.extensions = []
        self.eps_col: int | None = None
        self.t0 = time.monotonic()
        self.deadline = None if config.time_limit is None else self.t0 + config.time_limit
        self.binary_cols = [
            k for k, col in enumerate(self.lifted.columns) if col.integer and col.lower == 0 and col.upper == 1
        ]
        if config.minimize_epsilon:
            width = max(_expr_range(u, self.lifted.columns) for u in self.lifted.utilities)
            (self.eps_col,) = self.master.add_columns([Column("epsilon", Fraction(0), width, False)])
            self.master.set_objective(LinExpr({self.eps_col: Fraction(1)}), MINIMIZE)
        else:
            self.master.set_objective(self.lifted.welfare, game.sense)
        self.tol = self._tolerance()
        self.pool: list[EquilibriumCut] = []
        # strategic cuts hold for exact equilibria only
        exact = config.mode in (SELECT, ENUMERATE) or (config.mode == EPSILON_ABS and config.epsilon == 0)
        if config.strategic_cuts and exact and game.strategic is not None:
            self.pool = list(game.strategic(self.lifted))
        self.pool_added = [False] * len(self.pool)

    def _tolerance(self) -> Tolerance:
        cfg = self.config
        if cfg.mode == EPSILON_ABS:
            if cfg.epsilon is None:
                return Tolerance("abs", Fraction(0), self.eps_col)
            return Tolerance("abs", cfg.epsilon)
        if cfg.mode == EPSILON_REL:
            if self.game.sense != MAXIMIZE:
                raise InputError("relative epsilon is only defined for maximization games")
            return Tolerance("rel", cfg.epsilon)
        return Tolerance()

    def remaining(self) -> float | None:
        if self.deadline is None:
            return None
        return self.deadline - time.monotonic()

    def exact_point(self, profile: StrategyProfile, eps_value: Fraction = Fraction(0)) -> list:
        values = self.lifted.induce(profile)
        if self.eps_col is not None:
            values.append(eps_value)
        for ext in self.extensions:
            values = extend_values(ext, profile, values)
        return values

    def add_cut(self, cut: EquilibriumCut) -> None:
        if cut.extension is not None:
            cols = self.master.add_columns(cut.extension.columns)
            if cols and cols[0] != self.master.ncols - len(cols):
                raise InternalError("extension columns out of order")
            self.extensions.append(cut.extension)
            self.master.add_rows(cut.extension.rows)
        self.master.add_rows([cut.row])

    def solve_master(self):
        """Solve; among optimal points prefer the one with most binary columns at one."""
        out = self.master.solve(self.remaining())
        if out.status != OPTIMAL or not self.config.tie_break or self.eps_col is not None:
            return out
        target = self.master.objective.evaluate(out.values)
        sense = ">=" if self.master.sense == MAXIMIZE else "<="
        keep = row_from_expr(self.master.objective - LinExpr(const=target), sense, "tie")
        support = LinExpr({c: Fraction(1) for c in self.binary_cols})
        saved = (self.master.objective, self.master.sense)
        self.master.set_objective(support, MAXIMIZE)
        try:
            second = self.master.solve(self.remaining(), extra_rows=[keep])
        except NumericalError:
            second = None
        finally:
            self.master.set_objective(*saved)
        if second is None or second.status != OPTIMAL:
            return out
        second.objective = self.master.objective.evaluate(second.values)
        return second


def _verify_rows(rows: Sequence[Row], values: Sequence) -> None:
    for row in rows:
        if row.tag != "tie" and not row.satisfied(values):
            raise InternalError(f"exact incumbent violates master row {row}")


def run(game: GameInstance, config: SolveConfig | None = None, lifted: LiftedModel | None = None) -> SolveReport:
    """Run the master loop in the mode given by ``config``."""
    config = config or SolveConfig()
    s = _Session(game, config, lifted)
    report = SolveReport("", config.mode, game.sense, instance=game.name)
    report.objective_sense = s.master.sense
    enumerate_mode = config.mode == ENUMERATE
    seen: set[tuple[StrategyProfile, Fraction]] = set()

    def finish(status: str) -> SolveReport:
        report.status = status
        report.time_total = time.monotonic() - s.t0
        if report.pnes and report.osw is not None:
            ws = [w for _, w in report.pnes]
            best, worst = ws[0], ws[-1]
            pos, poa = price_ratios(game.sense, report.osw, best, worst)
            report.pos = pos
            report.poa = poa if enumerate_mode else pos
        log.info(
            "master status=%s iterations=%d EI=%d EI_D=%d EI_P=%d pnes=%d time=%.3f",
            status, report.iterations, report.ei, report.ei_d, report.ei_p, len(report.pnes), report.time_total,
        )
        return report

    if s.eps_col is not None:
        # welfare is not the master objective here: get OSW from its own solve
        aux = SolverModel(s.lifted.columns, s.lifted.rows, config.backend, name="osw")
        aux.set_objective(s.lifted.welfare, game.sense)
        out = aux.solve(s.remaining())
        if out.status == INFEASIBLE:
            raise InputError("the game has no feasible profile")
        if out.status == OPTIMAL:
            prof = s.lifted.decode(out.values)
            report.osw, report.osw_profile = welfare(game, prof), prof

    while True:
        remaining = s.remaining()
        if remaining is not None and remaining <= 0:
            return finish(TIME_LIMIT)
        out = s.solve_master()
        report.iterations += 1
        if out.status == INFEASIBLE:
            if report.iterations == 1:
                raise InputError("the game has no feasible profile")
            return finish(PNE_FOUND if report.pnes else NO_PNE)
        if out.status != OPTIMAL:
            if out.bound is not None:
                report.bound = out.bound
            return finish(TIME_LIMIT)

        profile = s.lifted.decode(out.values)
        w = welfare(game, profile)
        if report.iterations == 1 and s.eps_col is None:
            report.osw, report.osw_profile = w, profile

        eps_req = Fraction(0)
        if s.eps_col is not None:
            base = s.exact_point(profile)
            for row in s.master.rows:
                coef = dict(row.coeffs).get(s.eps_col)
                if coef:
                    # coef * eps + rest >= rhs
                    rest = row.activity(base)
                    eps_req = max(eps_req, Fraction(row.rhs - rest, coef))
        values = s.exact_point(profile, eps_req)
        _verify_rows(s.master.rows, values)
        objective = eps_req if s.eps_col is not None else w
        # with epsilon as a column the same profile may return with a larger epsilon
        if (profile, objective) in seen:
            raise InternalError(f"incumbent {profile} repeated")
        seen.add((profile, objective))
        report.objective_trace.append(objective)
        report.incumbent_trace.append(profile)
        report.bound = objective

        new_cuts: list[EquilibriumCut] = []
        for k, cut in enumerate(s.pool):
            if not s.pool_added[k] and not cut.row.satisfied(values):
                s.pool_added[k] = True
                new_cuts.append(cut)
        try:
            sep = s.oracle.separate(
                profile,
                values=values,
                tol=s.tol,
                threshold=eps_req if s.eps_col is not None else None,
                batch=config.cut_batch,
                time_limit=s.remaining(),
            )
        except OracleTimeout:
            return finish(TIME_LIMIT)

        if sep.is_equilibrium:
            if new_cuts:
                raise InternalError("a strategic cut removes a certified equilibrium")
            report.pnes.append((profile, w))
            if report.time_first is None:
                report.time_first = time.monotonic() - s.t0
            if config.mode in (EPSILON_ABS, EPSILON_REL):
                report.regrets = [r for r in sep.regrets]
                report.epsilon = max(report.regrets) if config.mode == EPSILON_ABS else config.epsilon
            if not enumerate_mode or (config.limit is not None and len(report.pnes) >= config.limit):
                return finish(PNE_FOUND)
            nogood = _nogood_row(s.lifted, values)
            cut = EquilibriumCut(None, None, nogood, NOGOOD)
            report.cuts.append(cut)
            s.add_cut(cut)
            continue

        new_cuts.extend(sep.cuts)
        for cut in new_cuts:
            if cut.provenance in (GENERAL, EPSILON):
                report.ei += 1
            elif cut.provenance == DOMINANCE:
                report.ei_d += 1
            elif cut.provenance == PAYOFF:
                report.ei_p += 1
            report.cuts.append(cut)
            s.add_cut(cut)


def _nogood_row(lifted: LiftedModel, values: Sequence) -> Row:
    """Exclude exactly the current assignment of all strategy bits."""
    coeffs = {}
    ones = 0
    for c in lifted.bit_columns():
        if values[c] == 1:
            coeffs[c] = -1
            ones += 1
        else:
            coeffs[c] = 1
    return make_row(coeffs, ">=", 1 - ones, NOGOOD)


def select_best_pne(game: GameInstance, config: SolveConfig | None = None, **kwargs) -> SolveReport:
    config = config or SolveConfig(**kwargs)
    if config.mode != SELECT:
        raise InputError("select_best_pne needs mode 'select'")
    return run(game, config)


def enumerate_pnes(game: GameInstance, config: SolveConfig | None = None, **kwargs) -> SolveReport:
    config = config or SolveConfig(mode=ENUMERATE, **kwargs)
    if config.mode != ENUMERATE:
        raise InputError("enumerate_pnes needs mode 'enumerate'")
    return run(game, config)


def epsilon_pne(game: GameInstance, config: SolveConfig | None = None, **kwargs) -> SolveReport:
    config = config or SolveConfig(mode=EPSILON_ABS, **kwargs)
    if config.mode not in (EPSILON_ABS, EPSILON_REL):
        raise InputError("epsilon_pne needs mode 'epsilon_abs' or 'epsilon_rel'")
    return run(game, config)
