"""2D solver for  Delta psi = 2 (|mu_+|^2 e^psi - |mu_-|^2 e^-psi)  (alpha = 0).

Five-point Laplacian on a uniform square grid, Dirichlet data equal to the
balanced value log(|mu_-|/|mu_+|) on the boundary, damped Newton with
preconditioned CG for the SPD system (-Delta_h + w) d = res.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator

from .core import Factorization, abs_F, boundary_psi
from .errors import ConvergenceError, DomainError
from .linalg import make_preconditioner, pcg

log = logging.getLogger(__name__)

DEFAULT_N = 513
ROOT_MARGIN = 3.0


@dataclass(frozen=True)
class GridSpec:
    """Square [-L, L]^2 with N points per side; arrays are indexed [iy, ix]."""

    L: float
    N: int = DEFAULT_N

    def __post_init__(self):
        if self.N < 5 or self.N % 2 == 0:
            raise DomainError(f"N must be odd and >= 5 (z = 0 on a node), got {self.N}")
        if not self.L > 0:
            raise DomainError(f"half width must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))

    @classmethod
    def for_roots(cls, zeros, N: int = DEFAULT_N, L_min: float = 6.0) -> "GridSpec":
        rmax = max((abs(z) for z in zeros), default=0.0)
        return cls(max(L_min, 2 * rmax + ROOT_MARGIN), N)

    @property
    def h(self) -> float:
        return 2 * self.L / (self.N - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.N)

    @cached_property
    def z(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x, self.x)
        return X + 1j * Y

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights (including h^2)."""
        w1 = np.full(self.N, self.h)
        w1[0] = w1[-1] = self.h / 2
        return np.outer(w1, w1)

    @cached_property
    def boundary(self) -> np.ndarray:
        m = np.zeros((self.N, self.N), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m

    def check_zeros(self, zeros) -> None:
        lim = self.L - ROOT_MARGIN
        for z in zeros:
            if abs(z.real) > lim or abs(z.imag) > lim:
                raise DomainError(
                    f"zero {z:.4g} closer than {ROOT_MARGIN} to the boundary of [-{self.L:g}, {self.L:g}]^2"
                )

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(self.weights * f))


@lru_cache(maxsize=8)
def _neg_laplacian(N: int, h: float) -> sp.csr_matrix:
    n = N - 2
    e = np.ones(n)
    T = sp.diags([-e[:-1], 2 * e, -e[:-1]], [-1, 0, 1])
    I = sp.identity(n)
    return ((sp.kron(I, T) + sp.kron(T, I)) / h**2).tocsr()


@dataclass
class Field2D:
    spec: GridSpec
    fac: Factorization
    psi: np.ndarray
    residual_sup: float = float("nan")
    newton_iters: int = 0
    converged: bool = False
    history: list = field(default_factory=list)
    precond: object = field(default=None, repr=False, compare=False)

    @cached_property
    def moduli_sq(self) -> tuple[np.ndarray, np.ndarray]:
        z = self.spec.z
        return np.abs(self.fac.mu_plus(z)) ** 2, np.abs(self.fac.mu_minus(z)) ** 2

    @property
    def absF(self) -> np.ndarray:
        return abs_F(self.psi, self.spec.z, self.fac)

    def flux(self) -> float:
        """Trapezoidal int |F| d^2x over the grid."""
        return self.spec.integrate(self.absF)

    def __getstate__(self):
        state = self.__dict__.copy()
        state["precond"] = None
        state.pop("moduli_sq", None)
        return state


def _moduli_sq(fac: Factorization, spec: GridSpec):
    z = spec.z
    return np.abs(fac.mu_plus(z)) ** 2, np.abs(fac.mu_minus(z)) ** 2


def _residual_interior(psi, P, Q, h):
    c = psi[1:-1, 1:-1]
    lap = (psi[2:, 1:-1] + psi[:-2, 1:-1] + psi[1:-1, 2:] + psi[1:-1, :-2] - 4 * c) / h**2
    return lap - 2 * (P[1:-1, 1:-1] * np.exp(c) - Q[1:-1, 1:-1] * np.exp(-c))


def residual_grid(fac: Factorization, spec: GridSpec, psi: np.ndarray) -> np.ndarray:
    """Discrete residual Delta_h psi - RHS on interior nodes, zero on the boundary."""
    P, Q = _moduli_sq(fac, spec)
    out = np.zeros_like(psi, dtype=float)
    out[1:-1, 1:-1] = _residual_interior(psi, P, Q, spec.h)
    return out


def residual(field: Field2D) -> float:
    P, Q = field.moduli_sq
    return float(np.max(np.abs(_residual_interior(field.psi, P, Q, field.spec.h))))


def newton_weight(field: Field2D) -> np.ndarray:
    P, Q = field.moduli_sq
    return 2 * (P * np.exp(field.psi) + Q * np.exp(-field.psi))


def linearized_apply(field: Field2D, delta_psi: np.ndarray) -> np.ndarray:
    """Jacobian action Delta_h d - 2(|mu_+|^2 e^psi + |mu_-|^2 e^-psi) d on interior nodes."""
    d = np.asarray(delta_psi, dtype=float)
    if d.shape != field.psi.shape:
        raise DomainError("delta_psi does not match the field grid")
    h = field.spec.h
    w = newton_weight(field)
    out = np.zeros_like(d)
    c = d[1:-1, 1:-1]
    out[1:-1, 1:-1] = (d[2:, 1:-1] + d[:-2, 1:-1] + d[1:-1, 2:] + d[1:-1, :-2] - 4 * c) / h**2 - w[
        1:-1, 1:-1
    ] * c
    return out


def initial_guess(fac: Factorization, spec: GridSpec) -> np.ndarray:
    """0.5 log((|mu_-|^2 + h^2)/(|mu_+|^2 + h^2)) with exact boundary data."""
    P, Q = _moduli_sq(fac, spec)
    h2 = spec.h**2
    psi = 0.5 * (np.log(Q + h2) - np.log(P + h2))
    b = spec.boundary
    psi[b] = boundary_psi(fac, spec.z[b])
    return psi


def solve_psi(
    fac: Factorization,
    spec: GridSpec | None = None,
    initial: Field2D | None = None,
    tol: float = 1e-10,
    max_newton: int = 40,
    cg_rtol: float = 1e-4,
    preconditioner: str = "amg",
    reuse_preconditioner: bool = True,
) -> Field2D:
    """Solve the alpha = 0 equation for ``fac`` on ``spec``.

    ``initial`` (same spec) supplies a warm start; its boundary values are
    replaced by this factorization's Dirichlet data.
    ``cg_rtol`` is the inexact-Newton forcing term for the inner CG solves;
    the outer residual target ``tol`` is unaffected.  With
    ``reuse_preconditioner`` the multigrid hierarchy of ``initial`` is kept,
    which pays off only when the warm start is close.
    """
    zeros = fac.zeros()
    if spec is None:
        spec = initial.spec if initial is not None else GridSpec.for_roots(zeros)
    spec.check_zeros(zeros)
    if initial is not None and initial.spec != spec:
        raise DomainError("warm start lives on a different grid")

    P, Q = _moduli_sq(fac, spec)
    h = spec.h
    b = spec.boundary
    if initial is None:
        psi = initial_guess(fac, spec)
    else:
        psi = initial.psi.copy()
        psi[b] = boundary_psi(fac, spec.z[b])

    n = spec.N - 2
    lap = _neg_laplacian(spec.N, h)
    precond = initial.precond if initial is not None and reuse_preconditioner else None
    if precond is not None and precond[0] != preconditioner:
        precond = None

    res = _residual_interior(psi, P, Q, h)
    rs = float(np.max(np.abs(res)))
    history = [rs]
    it = 0
    while rs > tol:
        if it >= max_newton:
            raise ConvergenceError(
                f"Newton did not reach {tol:g} in {max_newton} steps (residual {rs:.3e})", rs, history
            )
        it += 1
        c = psi[1:-1, 1:-1]
        w = 2 * (P[1:-1, 1:-1] * np.exp(c) + Q[1:-1, 1:-1] * np.exp(-c))
        A = (lap + sp.diags(w.ravel())).tocsr()
        if precond is None:
            precond = (preconditioner, make_preconditioner(A, preconditioner))
        sol = pcg(A, res.ravel(), M=precond[1], rtol=cg_rtol, maxiter=4000)
        if not sol.converged or len(sol.history) > 80:
            # stale multigrid hierarchy: rebuild for the current Jacobian
            precond = (preconditioner, make_preconditioner(A, preconditioner))
            sol = pcg(A, res.ravel(), M=precond[1], rtol=cg_rtol, x0=sol.x, maxiter=20000)
            if not sol.converged:
                raise ConvergenceError("CG failed inside Newton", rs, history)
        step = sol.x.reshape(n, n)
        lam = 1.0
        for _ in range(31):
            trial = psi.copy()
            trial[1:-1, 1:-1] += lam * step
            tres = _residual_interior(trial, P, Q, h)
            trs = float(np.max(np.abs(tres)))
            if np.isfinite(trs) and trs < rs:
                break
            lam *= 0.5
        else:
            raise ConvergenceError(f"Newton line search stalled at residual {rs:.3e}", rs, history)
        psi, res, rs = trial, tres, trs
        history.append(rs)
        log.debug("newton %d: residual %.3e (lambda %.3g, cg %d)", it, rs, lam, sol.iterations)
    return Field2D(spec, fac, psi, rs, it, True, history, precond)


def radial_slice(field: Field2D) -> tuple[np.ndarray, np.ndarray]:
    """psi along the non-negative real axis: (r, psi)."""
    N = field.spec.N
    mid = N // 2
    return field.spec.x[mid:], field.psi[mid, mid:]


def rotation_orbit_deviation(field: Field2D, order: int = 3) -> float:
    """Max deviation of psi along orbits z -> e^{2 pi i k/order} z (bilinear interpolation).

    Off-grid orbit points are interpolated, so this is O(h^2) even for an
    exactly symmetric field; see ``grid_orbit_deviation`` for the exact check.
    """
    spec = field.spec
    interp = RegularGridInterpolator((spec.x, spec.x), field.psi)  # (y, x)
    z = spec.z
    inside = np.abs(z) < spec.L * 0.7
    pts = z[inside]
    base = field.psi[inside]
    dev = 0.0
    for k in range(1, order):
        zr = pts * np.exp(2j * math.pi * k / order)
        vals = interp(np.column_stack([zr.imag, zr.real]))
        dev = max(dev, float(np.max(np.abs(vals - base))))
    return dev


def grid_orbit_deviation(field: Field2D) -> float:
    """Max |psi - psi o R| over quarter turns R, which map the grid onto itself.

    For rotationally symmetric data (H = z^n, or the a = 0 minus sheet at
    W = 0) this vanishes up to rounding.
    """
    return max(float(np.max(np.abs(field.psi - np.rot90(field.psi, k)))) for k in (1, 2, 3))
