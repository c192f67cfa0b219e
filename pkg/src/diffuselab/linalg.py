"""Sparse SPD linear algebra: CSR wrapper, Jacobi-PCG and a Thomas solver.

Matrix storage and matvec are delegated to scipy.sparse; the iteration
itself is written out so the report (iterations, final true residual) is
deterministic and under our control.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class DimensionMismatch(ValueError):
    pass


class ZeroPivot(ValueError):
    pass


@dataclass
class SolveReport:
    iterations: int
    relative_residual: float  # ||Ax - b|| / ||b||, recomputed at exit
    converged: bool


class SparseMatrix:
    """Symmetric sparse matrix in CSR form."""

    def __init__(self, mat: sp.spmatrix):
        self.csr = sp.csr_matrix(mat)
        if self.csr.shape[0] != self.csr.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got {self.csr.shape}")

    @classmethod
    def from_coo(cls, n: int, rows, cols, vals) -> "SparseMatrix":
        return cls(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))

    @property
    def n(self) -> int:
        return self.csr.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.csr @ x

    def diagonal(self) -> np.ndarray:
        return self.csr.diagonal()

    def symmetry_defect(self) -> float:
        """max |A_ij - A_ji| relative to max |A_ij|."""
        d = self.csr - self.csr.T
        scale = np.abs(self.csr.data).max() if self.csr.nnz else 1.0
        defect = np.abs(d.data).max() if d.nnz else 0.0
        return float(defect / scale)

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()


def cg_solve(
    A: SparseMatrix,
    b: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 50_000,
    jacobi: bool = True,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate gradients for SPD systems.

    Stops when the true relative residual ||b - Ax|| / ||b|| drops below
    tol.  On non-convergence the best iterate is returned with
    converged=False; nothing is raised.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (A.n,):
        raise DimensionMismatch(f"rhs shape {b.shape} does not match matrix size {A.n}")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), SolveReport(0, 0.0, True)

    if jacobi:
        diag = A.diagonal()
        if np.any(diag <= 0):
            raise ZeroPivot("Jacobi preconditioner needs a positive diagonal")
        minv = 1.0 / diag
    else:
        minv = None

    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A.matvec(x)
    z = r * minv if minv is not None else r
    p = z.copy()
    rz = float(r @ z)
    iterations = 0
    restarts = 0
    last_restart_resid = np.inf
    stagnation_ref = np.inf
    for iterations in range(1, max_iter + 1):
        Ap = A.matvec(p)
        pAp = float(p @ Ap)
        if pAp <= 0:
            break  # loss of positive definiteness at roundoff level
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        resid = float(np.linalg.norm(r)) / bnorm
        if iterations % 1000 == 0:
            # bail out once roundoff stalls the recursion below tol
            if resid > 0.5 * stagnation_ref:
                break
            stagnation_ref = resid
        if resid <= tol:
            # recompute from scratch; the recursive residual can drift
            true_resid = float(np.linalg.norm(b - A.matvec(x))) / bnorm
            if true_resid <= tol:
                return x, SolveReport(iterations, true_resid, True)
            # restart with the true residual; give up once it stagnates
            if true_resid >= 0.5 * last_restart_resid or restarts >= 3:
                break
            last_restart_resid = true_resid
            restarts += 1
            r = b - A.matvec(x)
        z = r * minv if minv is not None else r
        rz_new = float(r @ z)
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p

    true_resid = float(np.linalg.norm(b - A.matvec(x))) / bnorm
    return x, SolveReport(iterations, true_resid, true_resid <= tol)


def thomas_solve(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Direct solve of a tridiagonal system by forward elimination.

    lower[i] multiplies x[i-1] in row i (lower[0] unused); upper[i]
    multiplies x[i+1] in row i (upper[-1] unused).
    """
    n = len(diag)
    if not (len(lower) == len(upper) == len(b) == n):
        raise DimensionMismatch("tridiagonal bands and rhs must share a length")
    c = np.array(upper, dtype=float)
    d = np.array(diag, dtype=float)
    y = np.array(b, dtype=float)
    for i in range(1, n):
        if d[i - 1] == 0.0:
            raise ZeroPivot(f"zero pivot at row {i - 1}")
        m = lower[i] / d[i - 1]
        d[i] -= m * c[i - 1]
        y[i] -= m * y[i - 1]
    if d[-1] == 0.0:
        raise ZeroPivot(f"zero pivot at row {n - 1}")
    x = np.empty(n)
    x[-1] = y[-1] / d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = (y[i] - c[i] * x[i + 1]) / d[i]
    return x
