"""LP entry point wrapping the simplex in the public Solution type."""

from __future__ import annotations

import math

import numpy as np

from .core import Solution, SolverConfig, Status, relative_gap
from .simplex import BoundedSimplex, SimplexOutcome
from .standard import StandardForm, standardize

__all__ = ["solve_lp", "solve_standard_lp"]

_STATUS = {
    "optimal": Status.OPTIMAL,
    "infeasible": Status.INFEASIBLE,
    "unbounded": Status.UNBOUNDED,
    "iteration_limit": Status.ITERATION_LIMIT,
}


def _solve_bounds_only(std: StandardForm) -> SimplexOutcome:
    """No rows: each variable independently sits at its cheapest bound."""
    n = std.num_cols
    x = np.zeros(n)
    for j in range(n):
        c, lo, hi = std.cost[j], std.lower[j], std.upper[j]
        if c > 0 or (c == 0 and math.isfinite(lo)):
            if not math.isfinite(lo):
                ray = np.zeros(n)
                ray[j] = -1.0
                return SimplexOutcome("unbounded", x, -math.inf, None, None, 0, ray=ray)
            x[j] = lo
        elif c < 0 or math.isfinite(hi):
            if not math.isfinite(hi):
                ray = np.zeros(n)
                ray[j] = 1.0
                return SimplexOutcome("unbounded", x, -math.inf, None, None, 0, ray=ray)
            x[j] = hi
        else:
            x[j] = 0.0
    obj = float(std.cost @ x)
    return SimplexOutcome("optimal", x, obj, np.zeros(0), std.cost.copy(), 0)


def solve_standard_lp(std: StandardForm, cfg: SolverConfig,
                      lower: np.ndarray | None = None,
                      upper: np.ndarray | None = None,
                      max_iterations: int | None = None) -> SimplexOutcome:
    """Solve the LP relaxation of a standard form, optionally with replaced
    bound vectors (used by branch and bound)."""
    lo = std.lower if lower is None else lower
    hi = std.upper if upper is None else upper
    if np.any(lo > hi):
        x = np.zeros(std.num_cols)
        return SimplexOutcome("infeasible", x, math.inf, None, None, 0, phase=1)
    if std.num_rows == 0:
        return _solve_bounds_only(std)
    simplex = BoundedSimplex(
        std.A, std.b, lo, hi, std.cost,
        feasibility_tol=cfg.feasibility_tol,
        optimality_tol=cfg.optimality_tol,
        max_iterations=cfg.max_iterations if max_iterations is None else max_iterations,
    )
    return simplex.solve()


def _as_solution(prog, out: SimplexOutcome) -> Solution:
    n = getattr(prog, "num_vars")
    values = np.asarray(out.x[:n], dtype=float)
    status = _STATUS[out.status]
    objective = out.objective
    if status == Status.INFEASIBLE:
        objective = math.inf
    elif status == Status.UNBOUNDED:
        objective = -math.inf
    bound = objective if status in (Status.OPTIMAL, Status.INFEASIBLE,
                                    Status.UNBOUNDED) else -math.inf
    return Solution(
        status=status,
        values=values,
        objective=objective,
        bound=bound,
        gap=relative_gap(objective, bound),
        iterations=out.iterations,
        duals=out.y,
        reduced_costs=None if out.reduced_costs is None else out.reduced_costs[:n],
        ray=None if out.ray is None else np.asarray(out.ray[:n]),
        farkas=out.farkas,
        var_refs=tuple(getattr(prog, "var_refs", ())),
        integral=True,
        message=f"simplex finished in phase {out.phase}",
    )


def solve_lp(prog, config: SolverConfig | None = None) -> Solution:
    """Solve the program as a pure LP; integrality flags are ignored."""
    cfg = config or SolverConfig()
    std = standardize(prog)
    out = solve_standard_lp(std, cfg)
    return _as_solution(prog, out)
