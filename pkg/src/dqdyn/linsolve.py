"""Dense linear solve by Gaussian elimination with full pivoting.

Used for the 6x6 Newton systems. Full (row and column) pivoting costs little
at this size, is deterministic across platforms, and the pivot sequence gives
a free growth-based condition estimate: the ratio of the first to the last
pivot magnitude. The estimate is crude (a lower bound on the true condition
number up to modest factors) but is exactly what the step-abort rule needs.
"""

import numpy as np

from ._compat import njit
from .errors import SingularMatrixError
from .quat import Array

COND_LIMIT = 1e12


@njit(cache=True)
def solve_full_pivot(A: Array, b: Array):
    """Solve A x = b. Returns (x, cond_estimate, ok).

    ok is False when elimination hits an exactly zero pivot block; x is
    meaningless in that case. No exceptions are raised here so the function
    can run in nopython mode.
    """
    n = A.shape[0]
    U = A.copy()
    y = b.copy()
    perm = np.arange(n)
    for k in range(n):
        pr = k
        pc = k
        best = -1.0
        for i in range(k, n):
            for j in range(k, n):
                v = abs(U[i, j])
                if v > best:
                    best = v
                    pr = i
                    pc = j
        if best <= 0.0:
            return y, np.inf, False
        if pr != k:
            for j in range(n):
                tmp = U[k, j]
                U[k, j] = U[pr, j]
                U[pr, j] = tmp
            ty = y[k]
            y[k] = y[pr]
            y[pr] = ty
        if pc != k:
            for i in range(n):
                tmp = U[i, k]
                U[i, k] = U[i, pc]
                U[i, pc] = tmp
            tp = perm[k]
            perm[k] = perm[pc]
            perm[pc] = tp
        piv = U[k, k]
        for i in range(k + 1, n):
            m = U[i, k] / piv
            if m != 0.0:
                U[i, k] = 0.0
                for j in range(k + 1, n):
                    U[i, j] -= m * U[k, j]
                y[i] -= m * y[k]
    z = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = y[i]
        for j in range(i + 1, n):
            s -= U[i, j] * z[j]
        z[i] = s / U[i, i]
    x = np.empty(n)
    for k in range(n):
        x[perm[k]] = z[k]
    cond = abs(U[0, 0]) / abs(U[n - 1, n - 1])
    return x, cond, True


def solve_linear(A, b, cond_limit: float = COND_LIMIT) -> Array:
    """Validated solve; raises SingularMatrixError on singular or
    condition-estimate-above-limit systems."""
    A = np.ascontiguousarray(np.asarray(A, dtype=np.float64))
    b = np.ascontiguousarray(np.asarray(b, dtype=np.float64))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SingularMatrixError(f"matrix must be square, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise SingularMatrixError(f"rhs shape {b.shape} does not match matrix {A.shape}")
    x, cond, ok = solve_full_pivot(A, b)
    if not ok:
        raise SingularMatrixError("matrix is singular (zero pivot)")
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularMatrixError(
            f"matrix condition estimate {cond:.3e} exceeds limit {cond_limit:.1e}"
        )
    return x
