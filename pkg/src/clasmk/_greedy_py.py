"""Pure numpy implementation of the greedy landmark scan.

Used as the fallback when the compiled extension is not built.  Both
backends share the same contract: scan the rows of X in order, admit a
point as a landmark when its squared kernel-space residual against the
span of the current landmarks exceeds ``tol``, and stop once ``max_rank``
landmarks are held.  Residuals are tracked through an incrementally grown
Cholesky factor of the landmark Gram matrix.
"""

import numpy as np
from scipy.linalg import solve_triangular

FAMILY_RBF = 0
FAMILY_POLY = 1

# Admission thresholds below this are floored so exact kernel-space
# duplicates (residual ~ 1e-16 from roundoff) are never admitted.
_TOL_FLOOR = 1e-12


def _kernel_col(X_sel, x, family, param, sq_sel, sq_x):
    if family == FAMILY_RBF:
        d2 = np.maximum(sq_sel + sq_x - 2.0 * (X_sel @ x), 0.0)
        return np.exp(-d2 / (param * param))
    base = (1.0 + X_sel @ x) / np.sqrt((1.0 + sq_sel) * (1.0 + sq_x))
    return base ** int(param)


def greedy_select(X, family, param, tol, max_rank):
    """Return the indices of greedily admitted landmark rows of X."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    thresh = max(tol, _TOL_FLOOR)
    sq = np.einsum("ij,ij->i", X, X)

    L = np.zeros((max_rank, max_rank))
    sel = []
    for i in range(n):
        m = len(sel)
        if m == 0:
            L[0, 0] = 1.0  # normalized kernels: k(x, x) = 1
            sel.append(i)
        else:
            idx = np.asarray(sel)
            kvec = _kernel_col(X[idx], X[i], family, param, sq[idx], sq[i])
            z = solve_triangular(L[:m, :m], kvec, lower=True, check_finite=False)
            r2 = 1.0 - float(z @ z)
            if r2 > thresh:
                L[m, :m] = z
                L[m, m] = np.sqrt(max(r2, 1e-15))
                sel.append(i)
        if len(sel) == max_rank:
            break
    return np.asarray(sel, dtype=np.int64)
