"""Branch and bound over the integer variables of a compiled program.

Node selection is best-bound (a node's key is its parent's LP objective),
ties broken by creation order; branching picks the most fractional integer
variable, ties broken by lowest variable index.  Both rules are
deterministic, so identical inputs explore identical trees.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .core import Solution, SolverConfig, Status, relative_gap
from .lp import solve_standard_lp, _as_solution
from .standard import standardize

__all__ = ["solve_milp", "solve"]


def _apply_overrides(std, overrides: dict):
    lower = std.lower.copy()
    upper = std.upper.copy()
    for j, (lo, hi) in overrides.items():
        lower[j] = lo
        upper[j] = hi
    return lower, upper


def _fractionality(x: np.ndarray, int_idx: np.ndarray) -> np.ndarray:
    vals = x[int_idx]
    return np.abs(vals - np.round(vals))


def solve_milp(prog, config: SolverConfig | None = None) -> Solution:
    """Exact MILP solve; needs at least one integer-flagged variable."""
    cfg = config or SolverConfig()
    std = standardize(prog)
    int_idx = std.integer_idx
    if int_idx.size == 0:
        raise ValueError("program has no integer variables; use solve_lp")

    root = solve_standard_lp(std, cfg)
    nodes_explored = 1
    iterations = root.iterations
    if root.status in ("infeasible", "unbounded", "iteration_limit"):
        sol = _as_solution(prog, root)
        sol = Solution(**{**sol.__dict__, "nodes": nodes_explored,
                          "duals": None, "reduced_costs": None})
        return sol

    incumbent_x: np.ndarray | None = None
    incumbent_obj = math.inf
    counter = 0
    heap: list[tuple[float, int, dict]] = []
    root_x = root.x.copy()

    def push(bound: float, overrides: dict) -> None:
        nonlocal counter
        counter += 1
        heapq.heappush(heap, (bound, counter, overrides))

    def frontier_bound() -> float:
        return heap[0][0] if heap else incumbent_obj

    def branch(out, overrides: dict) -> None:
        frac = _fractionality(out.x, int_idx)
        cand = np.flatnonzero(frac > cfg.integrality_tol)
        # most fractional: fractional part closest to one half, lowest index first
        dist = np.abs(frac[cand] - 0.5)
        j = int(int_idx[cand[int(np.lexsort((cand, dist))[0])]])
        xj = out.x[j]
        plo, phi = overrides.get(j, (std.lower[j], std.upper[j]))
        down = math.floor(xj + cfg.integrality_tol)
        up = math.ceil(xj - cfg.integrality_tol)
        if down >= plo - 1e-12:
            push(out.objective, {**overrides, j: (plo, float(down))})
        if up <= phi + 1e-12:
            push(out.objective, {**overrides, j: (float(up), phi)})

    # root handling
    if np.all(_fractionality(root.x, int_idx) <= cfg.integrality_tol):
        incumbent_x = root.x.copy()
        incumbent_obj = root.objective
    else:
        branch(root, {})

    status = Status.OPTIMAL
    while heap:
        if nodes_explored >= cfg.max_nodes:
            status = Status.GAP_LIMIT
            break
        if incumbent_x is not None and relative_gap(incumbent_obj, frontier_bound()) <= cfg.mip_gap:
            break
        bound_est, _, overrides = heapq.heappop(heap)
        if incumbent_x is not None and bound_est >= incumbent_obj - 1e-9 * max(
                1.0, abs(incumbent_obj)):
            continue
        lower, upper = _apply_overrides(std, overrides)
        out = solve_standard_lp(std, cfg, lower, upper)
        nodes_explored += 1
        iterations += out.iterations
        if out.status == "infeasible":
            continue
        if out.status == "unbounded":
            # a subproblem ray is feasible for the root as well
            sol = _as_solution(prog, out)
            return Solution(**{**sol.__dict__, "nodes": nodes_explored,
                               "duals": None, "reduced_costs": None})
        if out.status == "iteration_limit":
            status = Status.GAP_LIMIT
            break
        if incumbent_x is not None and out.objective >= incumbent_obj - 1e-9 * max(
                1.0, abs(incumbent_obj)):
            continue
        if np.all(_fractionality(out.x, int_idx) <= cfg.integrality_tol):
            incumbent_x = out.x.copy()
            incumbent_obj = out.objective
        else:
            branch(out, overrides)

    if incumbent_x is None and status == Status.GAP_LIMIT:
        # completion dive: fix every integer to the rounded root relaxation
        overrides = {}
        for j in int_idx:
            r = float(np.round(root_x[j]))
            r = min(max(r, std.lower[j]), std.upper[j])
            overrides[int(j)] = (r, r)
        lower, upper = _apply_overrides(std, overrides)
        out = solve_standard_lp(std, cfg, lower, upper)
        iterations += out.iterations
        if out.status == "optimal":
            incumbent_x = out.x.copy()
            incumbent_obj = out.objective

    bound = frontier_bound() if heap else incumbent_obj
    if incumbent_x is None:
        if status == Status.GAP_LIMIT:
            return Solution(status=Status.GAP_LIMIT, values=np.zeros(prog.num_vars),
                            objective=math.inf, bound=bound, gap=math.inf,
                            iterations=iterations, nodes=nodes_explored,
                            var_refs=tuple(prog.var_refs), integral=False,
                            message="node limit reached before any incumbent")
        return Solution(status=Status.INFEASIBLE, values=np.zeros(prog.num_vars),
                        objective=math.inf, bound=math.inf, gap=0.0,
                        iterations=iterations, nodes=nodes_explored,
                        var_refs=tuple(prog.var_refs), integral=False,
                        message="all branches fathomed without a feasible point")

    n = prog.num_vars
    values = incumbent_x[:n].copy()
    # snap integer values exactly and let the reported objective match the
    # reported point
    for j in int_idx:
        if j < n:
            values[j] = float(np.round(values[j])) + 0.0  # also clears -0.0
    incumbent_obj = float(np.asarray(prog.objective) @ values)
    gap = relative_gap(incumbent_obj, bound)
    if status == Status.OPTIMAL and gap > cfg.mip_gap:
        status = Status.GAP_LIMIT
    return Solution(status=status, values=values, objective=incumbent_obj,
                    bound=bound, gap=gap, iterations=iterations, nodes=nodes_explored,
                    var_refs=tuple(prog.var_refs), integral=True,
                    message=f"branch and bound explored {nodes_explored} nodes")


def solve(prog, config: SolverConfig | None = None) -> Solution:
    """Dispatch on integrality: MILP when any variable is integer-flagged."""
    from .lp import solve_lp

    if any(prog.is_integer):
        return solve_milp(prog, config)
    return solve_lp(prog, config)
