"""Conversion of a program into equality standard form with bounded slacks.

Each row gains one slack column with coefficient +1; the row sense moves
into the slack's bounds (<= gives slack in [0, inf), >= in (-inf, 0] and
equality pins it to 0).  Variables keep their own bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = ["StandardForm", "standardize"]

LE, EQ, GE = "<=", "=", ">="


@dataclass
class StandardForm:
    A: sp.csc_matrix  # (m, n_struct + m)
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    cost: np.ndarray
    n_struct: int
    integer_idx: np.ndarray  # structural indices flagged integer

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def num_cols(self) -> int:
        return self.A.shape[1]


def standardize(prog) -> StandardForm:
    n = prog.num_vars
    rows = prog.rows
    m = len(rows)
    data, ri, ci = [], [], []
    b = np.zeros(m)
    slack_lo = np.zeros(m)
    slack_hi = np.zeros(m)
    for i, row in enumerate(rows):
        for j, a in row.terms:
            ri.append(i)
            ci.append(j)
            data.append(a)
        ri.append(i)
        ci.append(n + i)
        data.append(1.0)
        b[i] = row.rhs
        if row.sense == LE:
            slack_lo[i], slack_hi[i] = 0.0, np.inf
        elif row.sense == GE:
            slack_lo[i], slack_hi[i] = -np.inf, 0.0
        elif row.sense == EQ:
            slack_lo[i], slack_hi[i] = 0.0, 0.0
        else:
            raise ValueError(f"unknown row sense {row.sense!r}")
    A = sp.coo_matrix((data, (ri, ci)), shape=(m, n + m)).tocsc()
    lower = np.concatenate([np.asarray(prog.lower, dtype=float), slack_lo])
    upper = np.concatenate([np.asarray(prog.upper, dtype=float), slack_hi])
    cost = np.concatenate([np.asarray(prog.objective, dtype=float), np.zeros(m)])
    integer_idx = np.flatnonzero(np.asarray(prog.is_integer, dtype=bool))
    return StandardForm(A, b, lower, upper, cost, n, integer_idx)
