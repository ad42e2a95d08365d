"""Cross-checks of the built-in solver against scipy's HiGHS on mid-size
instances.  The acceptance oracles stay enumeration-based; these tests add
independent coverage at sizes enumeration cannot reach."""

import numpy as np
import pytest
import scipy.optimize as sopt
import scipy.sparse as sp

from enopt.formulate import compile_system
from enopt.scenario import load_scenario
from enopt.solver import Status, solve_lp, solve_milp

from conftest import make_program


def _random_structured(rng, n_lo=10, n_hi=40, m_lo=8, m_hi=40):
    n = int(rng.integers(n_lo, n_hi + 1))
    m = int(rng.integers(m_lo, m_hi + 1))
    A = rng.uniform(-2, 2, size=(m, n))
    A[rng.uniform(size=(m, n)) < 0.7] = 0.0  # keep it sparse-ish
    # make sure no row is entirely empty
    for i in range(m):
        if not A[i].any():
            A[i, int(rng.integers(0, n))] = 1.0
    senses = np.where(rng.uniform(size=m) < 0.25, "=", "<=")
    # build b around a known feasible interior point so most instances solve
    x0 = rng.uniform(0.2, 2.0, size=n)
    slackish = rng.uniform(0.0, 3.0, size=m)
    b = A @ x0 + np.where(senses == "=", 0.0, slackish)
    upper = rng.uniform(2.5, 12.0, size=n)
    c = rng.uniform(-5, 5, size=n)
    rows = [([(j, A[i, j]) for j in range(n) if A[i, j] != 0.0], senses[i], b[i])
            for i in range(m)]
    return c, A, senses, b, upper, rows


def _scipy_reference(c, A, senses, b, upper, integrality=None):
    le = senses == "<="
    constraints = []
    if le.any():
        constraints.append(sopt.LinearConstraint(A[le], -np.inf, b[le]))
    if (~le).any():
        constraints.append(sopt.LinearConstraint(A[~le], b[~le], b[~le]))
    res = sopt.milp(c=c, constraints=constraints,
                    bounds=sopt.Bounds(np.zeros(len(c)), upper),
                    integrality=integrality if integrality is not None
                    else np.zeros(len(c)))
    return res


@pytest.mark.parametrize("seed", range(6))
def test_midsize_lps_match_highs(seed):
    rng = np.random.default_rng(7000 + seed)
    for _ in range(5):
        c, A, senses, b, upper, rows = _random_structured(rng)
        ref = _scipy_reference(c, A, senses, b, upper)
        sol = solve_lp(make_program(c, rows, upper=upper))
        if ref.status == 2:  # infeasible
            assert sol.status == Status.INFEASIBLE
        else:
            assert ref.status == 0
            assert sol.status == Status.OPTIMAL
            assert sol.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_midsize_milps_match_highs(seed):
    rng = np.random.default_rng(8000 + seed)
    for _ in range(3):
        c, A, senses, b, upper, rows = _random_structured(rng, 8, 20, 6, 16)
        integrality = (rng.uniform(size=len(c)) < 0.4).astype(float)
        upper = np.where(integrality > 0, np.ceil(upper), upper)
        ref = _scipy_reference(c, A, senses, b, upper, integrality)
        sol = solve_milp(make_program(c, rows, upper=upper,
                                      integer=integrality.astype(int)))
        if ref.status == 2:
            assert sol.status == Status.INFEASIBLE
        else:
            assert ref.status == 0
            assert sol.status == Status.OPTIMAL
            assert sol.objective == pytest.approx(ref.fun, rel=1e-6, abs=1e-6)


def _prog_to_scipy(prog):
    n = prog.num_vars
    data, ri, ci, senses, b = [], [], [], [], []
    for i, row in enumerate(prog.rows):
        for j, coef in row.terms:
            ri.append(i)
            ci.append(j)
            data.append(coef)
        senses.append(row.sense)
        b.append(row.rhs)
    A = sp.coo_matrix((data, (ri, ci)), shape=(len(prog.rows), n)).tocsr()
    b = np.array(b)
    senses = np.array(senses)
    lo = np.where(senses == "<=", -np.inf, b)
    hi = np.where(senses == ">=", np.inf, b)
    constraints = sopt.LinearConstraint(A, lo, hi)
    return constraints


def test_desk_replica_lp_matches_highs(scenario_dir):
    scn = load_scenario(scenario_dir / "paper_system_48.json")
    prog = compile_system(scn.system)
    constraints = _prog_to_scipy(prog)
    ref = sopt.milp(c=np.asarray(prog.objective),
                    constraints=constraints,
                    bounds=sopt.Bounds(np.asarray(prog.lower),
                                       np.asarray(prog.upper)),
                    integrality=np.zeros(prog.num_vars))
    assert ref.status == 0
    sol = solve_lp(prog)
    assert sol.status == Status.OPTIMAL
    assert sol.objective == pytest.approx(ref.fun, rel=1e-8)


def test_coverage_fixture_milp_matches_highs(coverage_system):
    prog = compile_system(coverage_system)
    constraints = _prog_to_scipy(prog)
    ref = sopt.milp(c=np.asarray(prog.objective),
                    constraints=constraints,
                    bounds=sopt.Bounds(np.asarray(prog.lower),
                                       np.asarray(prog.upper)),
                    integrality=np.asarray(prog.is_integer, dtype=float))
    assert ref.status == 0
    sol = solve_milp(prog)
    assert sol.status == Status.OPTIMAL
    assert sol.objective == pytest.approx(ref.fun, rel=1e-6)


def test_coverage_fixture_milp_is_deterministic(coverage_system):
    a = solve_milp(compile_system(coverage_system))
    b = solve_milp(compile_system(coverage_system))
    assert a.objective == b.objective
    assert a.nodes == b.nodes
    assert np.array_equal(a.values, b.values)


def test_two_unit_commitment_day_matches_highs():
    """A 12-step day with two committed plants, min up/down times and a
    cycling price signal: a denser commitment MILP than the fixtures."""
    from enopt import model as M

    T = 12
    load = (6.0, 8.0, 11.0, 14.0, 12.0, 9.0, 7.0, 10.0, 15.0, 13.0, 8.0, 6.0)
    grid = M.TimeGrid((1.0,) * T)
    nodes = (M.Node("elec", "e", load),
             M.Node("fuel", "g", (0.0,) * T, boundary=True))
    comps = (
        M.Component("base_unit", M.SingleConversion("fuel", "elec", 0.45),
                    M.CapacitySpec(),
                    commitment=M.UnitCommitment(unit_capacity=10.0, unit_min_load=4.0,
                                                startup_cost=30.0, min_up_steps=3,
                                                min_down_steps=2),
                    costs=M.CostSpec(fuel=8.0)),
        M.Component("peak_unit", M.SingleConversion("fuel", "elec", 0.35),
                    M.CapacitySpec(),
                    commitment=M.UnitCommitment(unit_capacity=8.0, unit_min_load=2.0,
                                                startup_cost=5.0, min_up_steps=2,
                                                min_down_steps=2),
                    costs=M.CostSpec(fuel=14.0)),
        M.Component("wind", M.SourceConversion("elec"),
                    M.CapacitySpec(initial=6.0,
                                   availability=(0.8, 0.2, 0.1, 0.3, 0.9, 1.0,
                                                 0.7, 0.2, 0.0, 0.1, 0.6, 0.9))),
    )
    sys_ = M.EnergySystem(grid, nodes, comps, ())
    prog = compile_system(sys_)
    constraints = _prog_to_scipy(prog)
    ref = sopt.milp(c=np.asarray(prog.objective),
                    constraints=constraints,
                    bounds=sopt.Bounds(np.asarray(prog.lower),
                                       np.asarray(prog.upper)),
                    integrality=np.asarray(prog.is_integer, dtype=float))
    assert ref.status == 0
    sol = solve_milp(prog)
    assert sol.status == Status.OPTIMAL
    assert sol.objective == pytest.approx(ref.fun, rel=1e-6)

    from enopt.analyze import verify_solution

    assert verify_solution(sys_, sol, prog).passed
