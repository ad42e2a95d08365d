"""Primal simplex for bounded variables, two-phase with artificial columns.

Design notes:

* Variables carry their bounds directly (no slack rows for upper bounds),
  which keeps capacity caps out of the constraint matrix.
* The basis is held as a sparse LU factorisation (scipy ``splu``) plus a
  product-form eta file; the factorisation is rebuilt every few dozen pivots
  and before optimality is declared, so the final point is computed from a
  fresh factorisation.
* Pricing is Dantzig (largest reduced-cost violation).  A run of degenerate
  pivots switches to Bland's rule (smallest index in, smallest index out),
  which guarantees termination; the first non-degenerate step switches back.
* The objective is normalised by its largest coefficient internally, so
  scaling the objective by any positive factor leaves the pivot sequence,
  and therefore the returned vertex, unchanged.

Phase 1 starts from all structural variables at a finite bound, slacks
absorbing what they can, and one artificial column per remaining row.  The
sum of artificials is driven to zero; leftover basic artificials are pivoted
out or pinned to zero for phase 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import SolverError

__all__ = ["SimplexOutcome", "BoundedSimplex"]

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3

PIVOT_TOL = 1e-9
DEGENERATE_STEP = 1e-10
REFACTOR_EVERY = 64
STALL_WINDOW = 40


@dataclass
class SimplexOutcome:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: np.ndarray  # all columns (structural + slack)
    objective: float
    y: np.ndarray | None  # row duals, original objective units
    reduced_costs: np.ndarray | None  # all columns, original objective units
    iterations: int
    ray: np.ndarray | None = None
    farkas: np.ndarray | None = None
    phase: int = 2


class BoundedSimplex:
    def __init__(self, A: sp.csc_matrix, b: np.ndarray, lower: np.ndarray,
                 upper: np.ndarray, cost: np.ndarray, *,
                 feasibility_tol: float = 1e-6, optimality_tol: float = 1e-7,
                 max_iterations: int = 200_000):
        self.m, n_cols = A.shape
        self.n_real = n_cols  # structural + slack; artificials come after
        self.ftol = feasibility_tol
        self.otol = optimality_tol
        self.max_iterations = max_iterations

        # normalise the objective so tolerances are scale-free
        self.scale = float(np.max(np.abs(cost))) if cost.size else 0.0
        if self.scale <= 0.0:
            self.scale = 1.0
        self.cost_orig = cost.astype(float)

        # initial nonbasic statuses: prefer a finite lower bound
        status = np.where(np.isfinite(lower), AT_LOWER,
                          np.where(np.isfinite(upper), AT_UPPER, FREE)).astype(np.int8)
        x_nb = np.where(status == AT_LOWER, lower, 0.0)
        x_nb = np.where(status == AT_UPPER, upper, x_nb)
        residual = b - A @ x_nb

        # slack crash: let each row's slack absorb the residual if its bounds
        # allow, otherwise add an artificial column for the row
        basis = np.empty(self.m, dtype=np.int64)
        xB = np.empty(self.m)
        signs = np.ones(self.m)
        art_rows = []
        n = self.n_real
        for i in range(self.m):
            s = n - self.m + i  # slack column of row i
            target = x_nb[s] + residual[i]
            if lower[s] - 1e-9 <= target <= upper[s] + 1e-9:
                basis[i] = s
                status[s] = BASIC
                xB[i] = min(max(target, lower[s]), upper[s])
            else:
                # artificial takes the row residual, signed so it starts >= 0
                basis[i] = n + i
                signs[i] = 1.0 if residual[i] >= 0 else -1.0
                xB[i] = abs(residual[i])
                art_rows.append(i)

        self.A = sp.hstack([A, sp.diags(signs, format="csc")], format="csc")
        self.AT = self.A.T.tocsr()
        self.lower = np.concatenate([lower, np.zeros(self.m)])
        self.upper = np.concatenate([upper, np.zeros(self.m)])
        for i in art_rows:
            self.upper[n + i] = math.inf
        art_status = np.full(self.m, AT_LOWER, dtype=np.int8)
        self.status = np.concatenate([status, art_status])
        self.status[basis] = BASIC
        self.basis = basis
        self.xB = xB
        self.b = b.astype(float)

        self.cost_phase1 = np.zeros(n + self.m)
        self.cost_phase1[n:] = 1.0
        self.cost_phase2 = np.concatenate([self.cost_orig / self.scale, np.zeros(self.m)])

        self.iterations = 0
        self.etas: list[tuple[int, np.ndarray]] = []
        self.lu = None
        self._refactor()

    # -- linear algebra ------------------------------------------------------

    def _refactor(self) -> None:
        B = self.A[:, self.basis].tocsc()
        try:
            self.lu = splu(B)
        except RuntimeError as exc:  # singular basis: numerical breakdown
            raise SolverError(f"basis factorisation failed: {exc}") from exc
        self.etas = []
        x_nb = self._nonbasic_values()
        self.xB = self.lu.solve(self.b - self.A @ x_nb)

    def _nonbasic_values(self) -> np.ndarray:
        x = np.where(self.status == AT_LOWER, self.lower, 0.0)
        x = np.where(self.status == AT_UPPER, self.upper, x)
        x[self.basis] = 0.0
        return x

    def _ftran(self, col: np.ndarray) -> np.ndarray:
        w = self.lu.solve(col)
        for r, wcol in self.etas:
            t = w[r] / wcol[r]
            if t != 0.0:
                w = w - wcol * t
            w[r] = t
        return w

    def _btran(self, cb: np.ndarray) -> np.ndarray:
        z = cb.astype(float).copy()
        for r, wcol in reversed(self.etas):
            zr = z[r]
            s = z @ wcol
            z[r] = (zr - (s - zr * wcol[r])) / wcol[r]
        return self.lu.solve(z, trans="T")

    def _column(self, j: int) -> np.ndarray:
        start, end = self.A.indptr[j], self.A.indptr[j + 1]
        col = np.zeros(self.m)
        col[self.A.indices[start:end]] = self.A.data[start:end]
        return col

    # -- pricing and ratio test ----------------------------------------------

    def _price(self, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self._btran(cost[self.basis])
        d = cost - self.AT @ y
        return y, d

    def _entering(self, d: np.ndarray, bland: bool) -> int | None:
        nb = self.status != BASIC
        movable = self.upper > self.lower
        viol = np.zeros(d.shape)
        lo = nb & movable & (self.status == AT_LOWER) & (d < -self.otol)
        up = nb & movable & (self.status == AT_UPPER) & (d > self.otol)
        fr = nb & movable & (self.status == FREE) & (np.abs(d) > self.otol)
        viol[lo] = -d[lo]
        viol[up] = d[up]
        viol[fr] = np.abs(d[fr])
        if not viol.any():
            return None
        if bland:
            return int(np.argmax(viol > 0.0))
        return int(np.argmax(viol))

    def _ratio_test(self, q: int, sigma: float, w: np.ndarray, bland: bool):
        """Largest step t >= 0 keeping all basics inside their bounds.

        Returns (t, leaving_row or None); None means the entering variable
        hits its opposite bound first (a bound flip), or that the step is
        unbounded when t is inf.
        """
        delta = sigma * w
        lims = np.full(self.m, math.inf)
        lbB = self.lower[self.basis]
        ubB = self.upper[self.basis]
        pos = delta > PIVOT_TOL
        neg = delta < -PIVOT_TOL
        with np.errstate(invalid="ignore"):
            lims[pos] = (self.xB[pos] - lbB[pos]) / delta[pos]
            lims[neg] = (self.xB[neg] - ubB[neg]) / delta[neg]
        np.maximum(lims, 0.0, out=lims)
        t_rows = lims.min() if self.m else math.inf
        own = self.upper[q] - self.lower[q]
        if own <= t_rows:
            return own, None
        if not math.isfinite(t_rows):
            return math.inf, None
        cand = np.flatnonzero(lims <= t_rows + 1e-9 * (1.0 + t_rows))
        if bland:
            r = cand[int(np.argmin(self.basis[cand]))]
        else:
            # prefer the numerically largest pivot, then the smallest index
            order = np.lexsort((self.basis[cand], -np.abs(w[cand])))
            r = cand[order[0]]
        return float(lims[r]), int(r)

    def _value_of(self, j: int) -> float:
        st = self.status[j]
        if st == AT_LOWER:
            return float(self.lower[j])
        if st == AT_UPPER:
            return float(self.upper[j])
        return 0.0

    # -- main loop -------------------------------------------------------------

    def _run_phase(self, cost: np.ndarray):
        """Iterate until no violated reduced cost remains.

        Returns (outcome_tag, y, d) where outcome_tag is "optimal",
        "unbounded" or "iteration_limit".
        """
        stall = 0
        bland = False
        while True:
            y, d = self._price(cost)
            q = self._entering(d, bland)
            if q is None and self.etas:
                self._refactor()
                y, d = self._price(cost)
                q = self._entering(d, bland)
            if q is None:
                return "optimal", y, d
            if self.iterations >= self.max_iterations:
                return "iteration_limit", y, d
            self.iterations += 1

            sigma = 1.0 if (self.status[q] == AT_LOWER
                            or (self.status[q] == FREE and d[q] < 0)) else -1.0
            w = self._ftran(self._column(q))
            t, r = self._ratio_test(q, sigma, w, bland)
            if math.isinf(t):
                ray = np.zeros(self.A.shape[1])
                ray[q] = sigma
                ray[self.basis] = -sigma * w
                return "unbounded", y, ray
            if r is None:
                # bound flip: entering runs to its other bound, basis unchanged
                self.xB -= t * (sigma * w)
                self.status[q] = AT_UPPER if self.status[q] == AT_LOWER else AT_LOWER
            else:
                self.xB -= t * (sigma * w)
                leaving = self.basis[r]
                # a leaving variable always stops at a finite bound (infinite
                # bounds never limit the ratio test)
                self.status[leaving] = AT_LOWER if sigma * w[r] > 0 else AT_UPPER
                if leaving >= self.n_real:
                    # artificial leaves for good
                    self.upper[leaving] = 0.0
                    self.status[leaving] = AT_LOWER
                self.basis[r] = q
                self.xB[r] = self._value_of(q) + sigma * t
                self.status[q] = BASIC
                self.etas.append((r, w))
                if len(self.etas) >= REFACTOR_EVERY:
                    self._refactor()
            if t <= DEGENERATE_STEP:
                stall += 1
                if stall >= STALL_WINDOW:
                    bland = True
            else:
                stall = 0
                bland = False

    def _drive_out_artificials(self) -> None:
        for r in range(self.m):
            if self.basis[r] < self.n_real:
                continue
            er = np.zeros(self.m)
            er[r] = 1.0
            rho = self._btran(er)
            rowvals = self.AT @ rho
            entering = None
            for j in np.flatnonzero(np.abs(rowvals) > 1e-7):
                if j < self.n_real and self.status[j] != BASIC:
                    entering = int(j)
                    break
            art = self.basis[r]
            if entering is None:
                # dependent row: pin the artificial at zero and leave it basic
                self.upper[art] = 0.0
                continue
            w = self._ftran(self._column(entering))
            if abs(w[r]) <= PIVOT_TOL:
                self.upper[art] = 0.0
                continue
            self.status[art] = AT_LOWER
            self.upper[art] = 0.0
            self.basis[r] = entering
            self.xB[r] = self._value_of(entering)
            self.status[entering] = BASIC
            self.etas.append((r, w))
        self._refactor()

    def solve(self) -> SimplexOutcome:
        # phase 1: minimise the sum of artificials
        if np.any(self.basis >= self.n_real):
            tag, y, d = self._run_phase(self.cost_phase1)
            if tag == "iteration_limit":
                return self._outcome("iteration_limit", phase=1)
            art_mask = self.basis >= self.n_real
            infeas = float(np.sum(np.maximum(self.xB[art_mask], 0.0)))
            if infeas > self.ftol * max(1.0, float(np.max(np.abs(self.b), initial=0.0))):
                out = self._outcome("infeasible", phase=1)
                out.farkas = y
                return out
            self._drive_out_artificials()

        tag, y, extra = self._run_phase(self.cost_phase2)
        if tag == "unbounded":
            out = self._outcome("unbounded")
            out.ray = extra[:self.n_real]
            out.y = y * self.scale
            return out
        if tag == "iteration_limit":
            return self._outcome("iteration_limit")
        out = self._outcome("optimal")
        out.y = y * self.scale
        d = extra.copy()
        d[self.status == BASIC] = 0.0
        out.reduced_costs = d[:self.n_real] * self.scale
        return out

    def _outcome(self, status: str, phase: int = 2) -> SimplexOutcome:
        x = self._nonbasic_values()
        x[self.basis] = self.xB
        x = x[:self.n_real]
        obj = float(self.cost_orig @ x)
        return SimplexOutcome(status=status, x=x, objective=obj, y=None,
                              reduced_costs=None, iterations=self.iterations, phase=phase)
