"""
Dense two-phase simplex with Bland's anti-cycling rule.

The LPs solved here are tiny (a handful of variables and constraints), so the
full tableau is kept and the reduced costs are recomputed at every pivot.
"""
from collections import namedtuple

import numpy as np

from .errors import InvalidArgument, SolverError

OPTIMAL = 'optimal'
INFEASIBLE = 'infeasible'
UNBOUNDED = 'unbounded'

PIVOT_TOL = 1e-9
MAX_ITERATIONS = 10000

LPResult = namedtuple('LPResult', ['status', 'x', 'value'])


class LinearProgram:
    """
    maximize c.z  subject to  A_ub z <= b_ub,  A_eq z == b_eq,  z >= lower

    Entries of `lower` may be -inf to declare free variables; it defaults to 0.
    """
    def __init__(self, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lower=None):
        self.c = np.asarray(c, dtype=float).ravel()
        n = self.c.size
        if n == 0:
            raise InvalidArgument("an LP needs at least one variable")
        self.A_ub, self.b_ub = self._block(A_ub, b_ub, n, 'inequality')
        self.A_eq, self.b_eq = self._block(A_eq, b_eq, n, 'equality')
        self.lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float).ravel()
        if self.lower.shape != (n,):
            raise InvalidArgument("expected %d lower bounds, got %d" % (n, self.lower.size))
        if np.any(np.isnan(self.lower)) or np.any(self.lower == np.inf):
            raise InvalidArgument("lower bounds must be finite or -inf")
        for name in ('c', 'A_ub', 'b_ub', 'A_eq', 'b_eq'):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidArgument("LP coefficients in %s must be finite" % name)

    @staticmethod
    def _block(A, b, n, kind):
        if A is None and b is None:
            return np.zeros((0, n)), np.zeros(0)
        if A is None or b is None:
            raise InvalidArgument("%s constraints need both a matrix and a right-hand side" % kind)
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).ravel()
        if A.size == 0 and b.size == 0:
            return np.zeros((0, n)), np.zeros(0)
        if A.ndim != 2 or A.shape[1] != n:
            raise InvalidArgument("%s matrix has shape %s, expected (*, %d)" % (kind, A.shape, n))
        if A.shape[0] != b.size:
            raise InvalidArgument("%s matrix has %d rows but %d right-hand sides" % (kind, A.shape[0], b.size))
        return A, b

    @property
    def num_vars(self):
        return self.c.size


def _pivot(tab, basis, row, col):
    tab[row] /= tab[row, col]
    for i in range(tab.shape[0]):
        if i != row and tab[i, col] != 0.0:
            tab[i] -= tab[i, col] * tab[row]
    basis[row] = col


def _run_phase(tab, basis, cost, tol):
    for _ in range(MAX_ITERATIONS):
        reduced = cost - cost[basis] @ tab[:, :-1]
        entering = np.flatnonzero(reduced > tol)
        if entering.size == 0:
            return OPTIMAL
        # Bland: lowest-index improving column, lowest-index basic variable among ratio ties
        col = entering[0]
        column = tab[:, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            return UNBOUNDED
        ratios = tab[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        _pivot(tab, basis, ties[np.argmin(basis[ties])], col)
    raise SolverError("simplex did not terminate within %d pivots" % MAX_ITERATIONS)


def lp_solve(lp, tol=PIVOT_TOL):
    """
    Solve a LinearProgram.

    Returns:
        LPResult(status, x, value); x and value are None unless status is OPTIMAL
    """
    if not isinstance(lp, LinearProgram):
        raise InvalidArgument("lp_solve expects a LinearProgram")
    n = lp.num_vars
    free = np.flatnonzero(~np.isfinite(lp.lower))
    shift = np.where(np.isfinite(lp.lower), lp.lower, 0.0)

    # z = shift + M s with s >= 0; free variables are split into a difference
    M = np.hstack([np.eye(n), np.zeros((n, free.size))])
    for k, j in enumerate(free):
        M[j, n + k] = -1.0
    ns = M.shape[1]

    m_ub, m_eq = lp.A_ub.shape[0], lp.A_eq.shape[0]
    A = np.vstack([
        np.hstack([lp.A_ub @ M, np.eye(m_ub)]),
        np.hstack([lp.A_eq @ M, np.zeros((m_eq, m_ub))]),
    ])
    b = np.concatenate([lp.b_ub - lp.A_ub @ shift, lp.b_eq - lp.A_eq @ shift])
    negative = b < 0.0
    A[negative] *= -1.0
    b[negative] *= -1.0

    m, n_cols = A.shape
    tab = np.hstack([A, np.eye(m), b[:, None]])
    basis = n_cols + np.arange(m)

    phase1 = np.concatenate([np.zeros(n_cols), -np.ones(m)])
    _run_phase(tab, basis, phase1, tol)
    infeasibility = -phase1[basis] @ tab[:, -1]
    if infeasibility > 1e-8 * max(1.0, np.abs(b).max(initial=0.0)):
        return LPResult(INFEASIBLE, None, None)

    redundant = []
    for row in range(m):
        if basis[row] >= n_cols:
            candidates = np.flatnonzero(np.abs(tab[row, :n_cols]) > tol)
            if candidates.size:
                _pivot(tab, basis, row, candidates[0])
            else:
                redundant.append(row)
    tab = np.delete(tab, redundant, axis=0)
    basis = np.delete(basis, redundant)
    tab = np.hstack([tab[:, :n_cols], tab[:, -1:]])

    phase2 = np.concatenate([lp.c @ M, np.zeros(m_ub)])
    status = _run_phase(tab, basis, phase2, tol)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None)

    s = np.zeros(n_cols)
    s[basis] = tab[:, -1]
    z = shift + M @ s[:ns]
    return LPResult(OPTIMAL, z, float(lp.c @ z))
