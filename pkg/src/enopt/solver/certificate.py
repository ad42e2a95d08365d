"""Independent optimality checks on returned solutions.

For LPs the check verifies primal feasibility, consistency of the reported
reduced costs with the duals, the bounded-variable duality identity and
complementary slackness.  For MILP incumbents it verifies feasibility,
integrality and validity of the reported bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Solution, Status

__all__ = ["CertificateReport", "check_certificate"]

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class CertificateReport:
    ok: bool
    kind: str  # "lp" or "milp"
    max_primal_residual: float
    max_dual_residual: float
    max_complementarity: float
    duality_gap: float
    max_integrality: float
    violations: tuple[str, ...] = ()

    def __str__(self) -> str:
        head = f"certificate {'OK' if self.ok else 'FAILED'} ({self.kind})"
        if self.violations:
            return head + "\n  " + "\n  ".join(self.violations)
        return head


def _row_activity(row, x: np.ndarray) -> float:
    return float(sum(coef * x[idx] for idx, coef in row.terms))


def _primal_residuals(prog, x: np.ndarray) -> tuple[float, list[str]]:
    worst = 0.0
    notes = []
    for i, row in enumerate(prog.rows):
        act = _row_activity(row, x)
        scale = max(1.0, abs(row.rhs))
        if row.sense == LE:
            resid = (act - row.rhs) / scale
        elif row.sense == GE:
            resid = (row.rhs - act) / scale
        else:
            resid = abs(act - row.rhs) / scale
        if resid > worst:
            worst = resid
        if resid > 1e-6:
            notes.append(f"row {i} ({row.tag} {row.owner} t={row.step}) residual {resid:.3e}")
    for j in range(prog.num_vars):
        below = prog.lower[j] - x[j]
        above = x[j] - prog.upper[j]
        resid = max(below, above, 0.0) / max(1.0, abs(x[j]))
        if resid > worst:
            worst = resid
        if resid > 1e-6:
            notes.append(f"variable {prog.var_refs[j].label()} out of bounds by {resid:.3e}")
    return worst, notes


def check_certificate(prog, sol: Solution, tol: float = 1e-6) -> CertificateReport:
    """Verify an Optimal solution against the program it came from."""
    if sol.status != Status.OPTIMAL:
        raise ValueError(f"certificates only apply to optimal solutions, got {sol.status}")
    x = np.asarray(sol.values, dtype=float)
    primal, notes = _primal_residuals(prog, x)

    if sol.duals is None or any(prog.is_integer):
        # MILP incumbent: feasibility + integrality + bound validity
        max_int = 0.0
        for j in range(prog.num_vars):
            if prog.is_integer[j]:
                frac = abs(x[j] - round(x[j]))
                max_int = max(max_int, frac)
                if frac > 1e-5:
                    notes.append(f"integer variable {prog.var_refs[j].label()} "
                                 f"has fractional value {x[j]!r}")
        gap = sol.objective - sol.bound
        if gap < -tol * max(1.0, abs(sol.objective)):
            notes.append(f"reported bound {sol.bound} exceeds objective {sol.objective}")
        recomputed = float(prog.objective @ x)
        if abs(recomputed - sol.objective) > tol * max(1.0, abs(recomputed)):
            notes.append(f"objective mismatch: reported {sol.objective}, "
                         f"recomputed {recomputed}")
        ok = not notes
        return CertificateReport(ok, "milp", primal, 0.0, 0.0,
                                 abs(gap), max_int, tuple(notes))

    y = np.asarray(sol.duals, dtype=float)
    d = np.asarray(sol.reduced_costs, dtype=float)
    c = np.asarray(prog.objective, dtype=float)
    cscale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)

    # reduced costs consistent with duals: d = c - A^T y
    dhat = c.copy()
    for i, row in enumerate(prog.rows):
        for idx, coef in row.terms:
            dhat[idx] -= coef * y[i]
    dual_resid = float(np.max(np.abs(dhat - d))) / cscale if c.size else 0.0
    if dual_resid > tol:
        notes.append(f"reduced costs inconsistent with duals by {dual_resid:.3e}")

    # weak-duality identity for bounded variables:
    # c'x = y'b + sum_j d_j x_j + sum_i y_i (a_i'x - b_i) collapses to the
    # complementarity-weighted form below
    dual_value = 0.0
    comp = 0.0
    for i, row in enumerate(prog.rows):
        act = _row_activity(row, x)
        dual_value += y[i] * row.rhs
        slack_comp = abs(y[i] * (act - row.rhs)) / max(1.0, abs(row.rhs)) / cscale
        comp = max(comp, slack_comp)
        if slack_comp > tol:
            notes.append(f"row {i} ({row.tag}) dual {y[i]:.3e} on slack row "
                         f"(complementarity {slack_comp:.3e})")
    for j in range(prog.num_vars):
        dual_value += d[j] * x[j]
        if d[j] > tol * cscale:
            resid = abs(x[j] - prog.lower[j]) * d[j] / cscale
        elif d[j] < -tol * cscale:
            resid = abs(prog.upper[j] - x[j]) * abs(d[j]) / cscale
        else:
            resid = 0.0
        resid = resid / max(1.0, abs(x[j]))
        comp = max(comp, resid)
        if resid > tol:
            notes.append(f"variable {prog.var_refs[j].label()} violates complementary "
                         f"slackness by {resid:.3e}")
    obj = float(c @ x)
    gap = abs(obj - dual_value) / max(1.0, abs(obj))
    if gap > tol:
        notes.append(f"duality gap {gap:.3e}")
    ok = not notes
    return CertificateReport(ok, "lp", primal, dual_resid, comp, gap, 0.0, tuple(notes))
