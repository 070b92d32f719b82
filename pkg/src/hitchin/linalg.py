"""Preconditioned conjugate gradients for the SPD systems of the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def pcg(A, b, M=None, x0=None, rtol=1e-12, atol=0.0, maxiter=None) -> CGResult:
    """Solve A x = b for symmetric positive (semi-)definite A.

    ``A`` and ``M`` may be sparse matrices, LinearOperators or callables;
    ``M`` approximates A^{-1}.  Stops when ||r|| <= max(rtol ||b||, atol).
    """
    matvec = A if callable(A) and not hasattr(A, "dot") else A.dot
    if M is None:
        prec = lambda r: r  # noqa: E731
    elif callable(M) and not hasattr(M, "dot"):
        prec = M
    else:
        prec = M.dot

    n = b.shape[0]
    maxiter = maxiter or 10 * n
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=b.dtype)
    r = b - matvec(x) if x0 is not None else b.copy()
    bnorm = np.linalg.norm(b)
    stop = max(rtol * bnorm, atol)
    rnorm = np.linalg.norm(r)
    history = [rnorm]
    if rnorm <= stop:
        return CGResult(x, 0, True, history)
    z = prec(r)
    p = z.copy()
    rz = r @ z
    for k in range(1, maxiter + 1):
        Ap = matvec(p)
        pAp = p @ Ap
        if pAp <= 0:
            return CGResult(x, k, False, history)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rnorm = np.linalg.norm(r)
        history.append(rnorm)
        if rnorm <= stop:
            return CGResult(x, k, True, history)
        z = prec(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return CGResult(x, maxiter, False, history)


def jacobi(A: sp.spmatrix):
    d = A.diagonal()
    inv = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), 1.0)
    return lambda r: inv * r


def amg(A: sp.spmatrix, kind: str = "rs"):
    """Algebraic multigrid V-cycle as a preconditioner (pyamg)."""
    import pyamg

    A = sp.csr_matrix(A)
    if kind == "rs":
        ml = pyamg.ruge_stuben_solver(A)
    else:
        ml = pyamg.smoothed_aggregation_solver(A)
    return ml.aspreconditioner()


def make_preconditioner(A, kind: str):
    if kind == "none":
        return None
    if kind == "jacobi":
        return jacobi(A)
    if kind in ("amg", "rs"):
        return amg(A, "rs")
    if kind == "sa":
        return amg(A, "sa")
    raise ValueError(f"unknown preconditioner {kind!r}")
