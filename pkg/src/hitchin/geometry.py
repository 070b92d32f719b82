"""L^2 metric on the Gamma-invariant surfaces S_+ (chart K) and S_- (chart W).

A tangent vector is the difference quotient of two psi-gauge solutions,
projected L^2-orthogonally to infinitesimal gauge motions

    L(eps) = ([Phi, eps], D_zb eps),   eps anti-Hermitian traceless,

with eps = i (e1 s1 + e2 s2 + e3 s3) vanishing on and outside the grid
boundary.  The projection solves the normal equations L^T W L e = L^T W V
by preconditioned CG, where W is the discrete weight of the norm

    ||V||^2 = 1/2 int tr(Phidot Phidot^* + 4 Adot Adot^*).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .asymptotics import exterior_integral
from .core import (
    MINUS,
    PAULI,
    PLUS,
    Cubic,
    GaugeFields,
    d_zbar,
    factorize,
    reconstruct_fields,
    roots,
)
from .elliptic import Field2D, GridSpec, solve_psi
from .errors import ConvergenceError, DomainError, HitchinError, PreconditionError, ProjectionError
from .linalg import make_preconditioner, pcg

log = logging.getLogger(__name__)

ISIGMA = tuple(1j * s for s in PAULI)
_ENTRIES = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass
class TangentVector:
    phi_dot: np.ndarray
    a_zbar_dot: np.ndarray
    base: Field2D | None = None
    projected: bool = False

    def __add__(self, other):
        return TangentVector(self.phi_dot + other.phi_dot, self.a_zbar_dot + other.a_zbar_dot, self.base)

    def __sub__(self, other):
        return TangentVector(self.phi_dot - other.phi_dot, self.a_zbar_dot - other.a_zbar_dot, self.base)

    def scaled(self, c: float) -> "TangentVector":
        return TangentVector(c * self.phi_dot, c * self.a_zbar_dot, self.base, self.projected)


@dataclass
class MetricSample:
    coordinate: complex
    omega: float
    curvature: float = float("nan")
    iso_spread: float = float("nan")
    resid_gauge: float = float("nan")
    resid_holo: float = float("nan")
    norms: tuple = ()
    field: Field2D | None = field(default=None, repr=False, compare=False)


# -- factorizations along the two surfaces ---------------------------------


def sheet_factorization(a: float, coordinate: complex, sheet: str, branch: complex | None = None):
    """Factorization and dH/d(chart) at a chart point.

    S_+: chart K.  S_-: chart W (K = W^3 + a W) unless ``branch`` is given,
    in which case the chart is K and the odd lump is the zero of H nearest
    ``branch``.
    """
    if sheet == PLUS:
        return factorize(Cubic(a, coordinate), PLUS), -1.0 + 0j
    if sheet != MINUS:
        raise PreconditionError(f"unknown sheet {sheet!r}")
    if branch is None:
        W = complex(coordinate)
        return factorize(Cubic(a, W**3 + a * W), MINUS, W), -(3 * W * W + a)
    cubic = Cubic(a, coordinate)
    W = min(roots(cubic.poly), key=lambda r: abs(r - branch))
    return factorize(cubic, MINUS, W), -1.0 + 0j


# -- tangent vectors -------------------------------------------------------


def tangent_raw(field_minus: Field2D, field_plus: Field2D, delta: complex, base: Field2D | None = None) -> TangentVector:
    """(fields(c + delta/2) - fields(c - delta/2)) / |delta| for unit-speed motion along delta."""
    if field_minus.spec != field_plus.spec:
        raise DomainError("tangent_raw: fields live on different grids")
    if not (field_minus.converged and field_plus.converged):
        raise PreconditionError("tangent_raw needs converged fields")
    step = abs(delta)
    if not 1e-3 <= step <= 0.1:
        raise PreconditionError(f"|delta| must lie in [1e-3, 0.1], got {step:g}")
    spec = field_plus.spec
    gp = reconstruct_fields(field_plus.fac, spec, field_plus.psi)
    gm = reconstruct_fields(field_minus.fac, spec, field_minus.psi)
    return TangentVector((gp.phi - gm.phi) / step, (gp.a_zbar - gm.a_zbar) / step, base)


def l2_norm_sq(V: TangentVector, spec: GridSpec | None = None) -> float:
    """Trapezoidal 1/2 int tr(Phidot Phidot^* + 4 Adot Adot^*) over the grid."""
    spec = spec or V.base.spec
    dens = 0.5 * (
        np.sum(np.abs(V.phi_dot) ** 2, axis=(-1, -2)) + 4 * np.sum(np.abs(V.a_zbar_dot) ** 2, axis=(-1, -2))
    )
    return spec.integrate(dens)


def holomorphy_residual(V: TangentVector, interior: int = 2) -> float:
    """sup |D_zb Phidot - [Phi, Adot]| over nodes at least ``interior`` cells from the edge."""
    base = V.base
    g = reconstruct_fields(base.fac, base.spec, base.psi)
    h = base.spec.h
    dphi = np.empty_like(V.phi_dot)
    for j, k in _ENTRIES:
        dphi[..., j, k] = d_zbar(V.phi_dot[..., j, k], h)
    lhs = dphi + g.a_zbar @ V.phi_dot - V.phi_dot @ g.a_zbar
    rhs = g.phi @ V.a_zbar_dot - V.a_zbar_dot @ g.phi
    r = np.sqrt(np.sum(np.abs(lhs - rhs) ** 2, axis=(-1, -2)))
    s = slice(interior, -interior)
    return float(np.max(r[s, s]))


@lru_cache(maxsize=4)
def _difference_ops(N: int, h: float):
    """Interior embedding S and central differences D_x, D_y (N^2 x (N-2)^2)."""
    n_int = (N - 2) ** 2
    idx = np.arange(N * N).reshape(N, N)[1:-1, 1:-1].ravel()
    S = sp.csr_matrix((np.ones(n_int), (idx, np.arange(n_int))), shape=(N * N, n_int))
    d1 = sp.diags([np.full(N - 1, 1.0), np.full(N - 1, -1.0)], [1, -1]) / (2 * h)
    I = sp.identity(N)
    Dx = (sp.kron(I, d1, format="csr") @ S).tocsr()
    Dy = (sp.kron(d1, I, format="csr") @ S).tocsr()
    return S, Dx, Dy


class GaugeOperator:
    """L at a base field as sparse blocks, with normal equations per coupled group.

    The real output vector has 16 row blocks (Phidot then Adot; entries
    00, 01, 10, 11; real then imaginary part), each of length N^2.  Only the
    nonzero (row block, component) pieces are stored.  Components whose
    pieces share no row block decouple in L^T W L and are solved separately;
    for alpha = 0 bases the sigma_3 direction splits from sigma_1, sigma_2.
    """

    def __init__(self, base: Field2D, fields: GaugeFields | None = None):
        self.base = base
        spec = self.spec = base.spec
        N = spec.N
        g = fields or reconstruct_fields(base.fac, spec, base.psi)
        self.fields = g
        self.n_int = (N - 2) ** 2
        S, Dx, Dy = _difference_ops(N, spec.h)

        self.pieces: dict[tuple[int, int], sp.csr_matrix] = {}
        comm = {
            (kind, comp): F @ s - s @ F
            for kind, F in (("phi", g.phi), ("a", g.a_zbar))
            for comp, s in enumerate(ISIGMA)
        }
        row = 0
        for kind in ("phi", "a"):
            for j, k in _ENTRIES:
                for comp, s in enumerate(ISIGMA):
                    C = comm[(kind, comp)][..., j, k].ravel()
                    if kind == "phi":
                        cx = cy = 0j
                    else:
                        cx = s[j, k] / 2
                        cy = 1j * s[j, k] / 2
                    for part, (c, x, y) in enumerate(
                        ((C.real, cx.real, cy.real), (C.imag, cx.imag, cy.imag))
                    ):
                        blk = self._block(c, x, y, S, Dx, Dy)
                        if blk is not None:
                            self.pieces[(row + part, comp)] = blk
                row += 2
        # per-block quadrature weights: 1/2 for Phidot, 2 = 4 * 1/2 for Adot
        w = spec.weights.ravel()
        self.row_weight = [0.5 * w] * 8 + [2.0 * w] * 8
        self.groups = self._coupled_groups()
        self._normal: dict[tuple[int, ...], tuple] = {}

    @staticmethod
    def _block(c, cx, cy, S, Dx, Dy):
        out = None
        if np.any(c != 0):
            out = sp.diags(c) @ S
        for coef, D in ((cx, Dx), (cy, Dy)):
            if coef != 0:
                out = coef * D if out is None else out + coef * D
        return None if out is None else out.tocsr()

    def _coupled_groups(self):
        rows = {a: {r for (r, c) in self.pieces if c == a} for a in range(3)}
        groups: list[list[int]] = []
        for a in range(3):
            merged = [g for g in groups if any(rows[a] & rows[b] for b in g)]
            new = sorted({a}.union(*[set(g) for g in merged]))
            groups = [g for g in groups if g not in merged] + [new]
        return [tuple(g) for g in sorted(groups)]

    def matvec(self, e: np.ndarray) -> np.ndarray:
        """L e as the flat real vector."""
        N2 = self.spec.N ** 2
        e = e.reshape(3, self.n_int)
        out = np.zeros(16 * N2)
        for (r, a), B in self.pieces.items():
            out[r * N2 : (r + 1) * N2] += B @ e[a]
        return out

    def rmatvec_weighted(self, v: np.ndarray) -> np.ndarray:
        """L^T W v."""
        N2 = self.spec.N ** 2
        out = np.zeros((3, self.n_int))
        for (r, a), B in self.pieces.items():
            out[a] += B.T @ (self.row_weight[r] * v[r * N2 : (r + 1) * N2])
        return out.ravel()

    def normal_matrix(self, group: tuple[int, ...]):
        """(L^T W L restricted to ``group``, multigrid preconditioner), cached."""
        if group not in self._normal:
            blocks = [[None] * len(group) for _ in group]
            for ia, a in enumerate(group):
                for ib, b in enumerate(group):
                    acc = None
                    for (r, c), B in self.pieces.items():
                        if c != a or (r, b) not in self.pieces:
                            continue
                        term = B.T @ sp.diags(self.row_weight[r]) @ self.pieces[(r, b)]
                        acc = term if acc is None else acc + term
                    blocks[ia][ib] = acc
            M = sp.bmat(blocks, format="csr")
            kind = "rs" if len(group) == 1 else "sa"
            self._normal[group] = (M, make_preconditioner(M, kind))
        return self._normal[group]

    @property
    def L(self) -> sp.csr_matrix:
        """The assembled matrix (for inspection and tests)."""
        N2 = self.spec.N ** 2
        grid = [[None] * 3 for _ in range(16)]
        for (r, a), B in self.pieces.items():
            grid[r][a] = B
        for r in range(16):
            if all(b is None for b in grid[r]):
                grid[r][0] = sp.csr_matrix((N2, self.n_int))
        for a in range(3):
            if all(grid[r][a] is None for r in range(16)):
                grid[0][a] = sp.csr_matrix((N2, self.n_int))
        return sp.bmat(grid, format="csr")

    @property
    def wv(self) -> np.ndarray:
        return np.concatenate(self.row_weight)

    # vector <-> matrix-grid conversions
    def flatten(self, V: TangentVector) -> np.ndarray:
        out = []
        for arr in (V.phi_dot, V.a_zbar_dot):
            for j, k in _ENTRIES:
                e = arr[..., j, k].ravel()
                out.append(e.real)
                out.append(e.imag)
        return np.concatenate(out)

    def unflatten(self, v: np.ndarray) -> TangentVector:
        N = self.spec.N
        chunks = v.reshape(16, N, N)
        arrs = []
        for half in (chunks[:8], chunks[8:]):
            a = np.zeros((N, N, 2, 2), dtype=complex)
            for i, (j, k) in enumerate(_ENTRIES):
                a[..., j, k] = half[2 * i] + 1j * half[2 * i + 1]
            arrs.append(a)
        return TangentVector(arrs[0], arrs[1], self.base)

    def epsilon_grid(self, e: np.ndarray) -> np.ndarray:
        """Matrix-valued eps on the full grid from the 3 stacked interior components."""
        N = self.spec.N
        comps = e.reshape(3, N - 2, N - 2)
        eps = np.zeros((N, N, 2, 2), dtype=complex)
        for c, s in zip(comps, ISIGMA):
            eps[1:-1, 1:-1] += c[..., None, None] * s
        return eps

    def apply(self, e: np.ndarray) -> TangentVector:
        """The pure-gauge vector L(eps)."""
        return self.unflatten(self.matvec(e))

    def adjoint_density(self, V: TangentVector) -> np.ndarray:
        """L^T W V divided by the interior cell area: the discrete gauge-orthogonality defect."""
        return self.rmatvec_weighted(self.flatten(V)) / self.spec.h**2

    def solve(self, rhs: np.ndarray, rtol: float) -> np.ndarray:
        """Least-squares gauge parameter: (L^T W L) e = rhs, group by group."""
        rhs = rhs.reshape(3, self.n_int)
        e = np.zeros_like(rhs)
        total = np.linalg.norm(rhs)
        for group in self.groups:
            b = rhs[list(group)].ravel()
            if not np.any(b):
                continue
            M, prec = self.normal_matrix(group)
            # tolerance relative to the full right-hand side keeps groups consistent
            sol = pcg(M, b, M=prec, rtol=0.0, atol=rtol * total, maxiter=5000)
            if not sol.converged:
                raise ProjectionError(
                    f"gauge projection CG stagnated after {sol.iterations} iterations",
                    sol.history[-1] / max(total, 1e-300),
                    sol.history,
                )
            e[list(group)] = sol.x.reshape(len(group), self.n_int)
        return e.ravel()


def gauge_project(V: TangentVector, op: GaugeOperator | None = None, rtol: float = 1e-12) -> TangentVector:
    """Remove the component of V along gauge orbits (orthogonal projection)."""
    op = op or GaugeOperator(V.base)
    v = op.flatten(V)
    rhs = op.rmatvec_weighted(v)
    if not np.any(rhs):
        out = op.unflatten(v)
    else:
        e = op.solve(rhs, rtol)
        out = op.unflatten(v - op.matvec(e))
    out.base = V.base
    out.projected = True
    return out


def gauge_residual(V: TangentVector, op: GaugeOperator) -> float:
    """sup |orthogonality defect| relative to sup |Phidot|."""
    scale = float(np.max(np.sqrt(np.sum(np.abs(V.phi_dot) ** 2, axis=(-1, -2)))))
    return float(np.max(np.abs(op.adjoint_density(V)))) / max(scale, 1e-300)


def tail_norm(fac, dH: complex, spec: GridSpec) -> float:
    """Singular-approximation norm outside the grid: |dH|^2 int_ext 1/(4|H|)."""
    return abs(dH) ** 2 * exterior_integral(fac.H, spec.L)


# -- conformal factor -------------------------------------------------------


def _default_spec(zeros, N=None):
    return GridSpec.for_roots(zeros, N or 513)


def omega_at(
    a: float,
    coordinate: complex,
    sheet: str = PLUS,
    delta: float = 0.02,
    spec: GridSpec | None = None,
    base: Field2D | None = None,
    branch: complex | None = None,
    directions=(1.0, 1j),
    check_holomorphy: bool = False,
) -> MetricSample:
    """Conformal factor at one chart point.

    For each displacement direction d the fields at c -+ delta d/2 are
    solved (warm-started from the base solution at c), differenced,
    gauge projected and integrated, with the exterior of the grid supplied
    by the singular approximation.  Omega is the mean over directions.
    ``base`` is a warm start for the solve at c.
    """
    coordinate = complex(coordinate)
    fac, dH = sheet_factorization(a, coordinate, sheet, branch)
    if spec is None:
        spec = base.spec if base is not None else _default_spec(fac.zeros())
    if base is not None and base.spec != spec:
        base = None
    # the neighbouring sample's multigrid hierarchy is too stale to reuse
    center = solve_psi(fac, spec, initial=base, reuse_preconditioner=False)
    op = GaugeOperator(center)
    norms, resid, holo = [], 0.0, float("nan")
    for d in directions:
        d = complex(d) * delta
        fm, _ = sheet_factorization(a, coordinate - d / 2, sheet, branch)
        fp, _ = sheet_factorization(a, coordinate + d / 2, sheet, branch)
        f_minus = solve_psi(fm, spec, initial=center)
        # linear extrapolation through the centre is accurate to O(delta^2)
        guess = replace(center, psi=2 * center.psi - f_minus.psi)
        f_plus = solve_psi(fp, spec, initial=guess)
        V = tangent_raw(f_minus, f_plus, d, base=center)
        Vp = gauge_project(V, op)
        resid = max(resid, gauge_residual(Vp, op))
        if check_holomorphy:
            holo = holomorphy_residual(Vp)
        norms.append(l2_norm_sq(Vp, spec) + tail_norm(fac, dH, spec))
    omega = float(np.mean(norms))
    spread = float((max(norms) - min(norms)) / omega) if len(norms) > 1 else 0.0
    return MetricSample(coordinate, omega, float("nan"), spread, resid, holo, tuple(norms), center)


# -- curvature ----------------------------------------------------------------


def curvature_grid(coords: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Gaussian curvature -Delta log(Omega) / (2 Omega) by the five-point stencil.

    ``coords`` is a 2D complex array laid out [row = Im, col = Re] on a
    uniform square lattice; the border is returned as NaN.
    """
    coords = np.asarray(coords, dtype=complex)
    omega = np.asarray(omega, dtype=float)
    if coords.shape != omega.shape or coords.ndim != 2 or min(coords.shape) < 3:
        raise PreconditionError("curvature_grid needs matching 2D arrays of size >= 3")
    dx = np.diff(coords.real, axis=1)
    dy = np.diff(coords.imag, axis=0)
    h = dx.flat[0]
    if (
        h <= 0
        or not np.allclose(dx, h, rtol=1e-9, atol=0)
        or not np.allclose(dy, h, rtol=1e-9, atol=0)
        or not np.allclose(np.diff(coords.imag, axis=1), 0, atol=1e-12 * h)
        or not np.allclose(np.diff(coords.real, axis=0), 0, atol=1e-12 * h)
    ):
        raise PreconditionError("curvature_grid needs a uniform square coordinate grid")
    lo = np.log(omega)
    C = np.full(omega.shape, np.nan)
    lap = (lo[2:, 1:-1] + lo[:-2, 1:-1] + lo[1:-1, 2:] + lo[1:-1, :-2] - 4 * lo[1:-1, 1:-1]) / h**2
    C[1:-1, 1:-1] = -lap / (2 * omega[1:-1, 1:-1])
    return C


def find_peaks(coords: np.ndarray, C: np.ndarray, sign: int = 1, rel: float = 0.2) -> list[tuple[complex, float]]:
    """Strict local extrema of sign*C (8-neighbourhood) exceeding rel * max(sign*C)."""
    S = sign * np.asarray(C, dtype=float)
    finite = np.isfinite(S)
    if not finite.any():
        return []
    top = np.nanmax(S)
    if top <= 0:
        return []
    peaks = []
    ny, nx = S.shape
    for i in range(ny):
        for j in range(nx):
            v = S[i, j]
            if not np.isfinite(v) or v <= 0 or v < rel * top:
                continue
            nb = S[max(i - 1, 0) : i + 2, max(j - 1, 0) : j + 2]
            others = np.delete(nb.ravel(), (i - max(i - 1, 0)) * nb.shape[1] + (j - max(j - 1, 0)))
            if np.all(~np.isfinite(others) | (others < v)):
                peaks.append((complex(coords[i, j]), float(sign * v)))
    return sorted(peaks, key=lambda p: -sign * p[1])


def landmarks(a: float, sheet: str) -> list[tuple[complex, str]]:
    """Chart points where zeros of H coincide (none for a = 0).

    S_+: the double-root loci K = +-2 i (a/3)^{3/2}.  S_-: W = +-i sqrt(a/3),
    where the odd lump meets a parallel one (3W^2 + a = 0), and
    W = +-2 i sqrt(a/3), where the two parallel lumps coincide.
    """
    if a <= 0:
        return []
    s = math.sqrt(a / 3)
    if sheet == PLUS:
        k = 2 * s**3
        return [(-1j * k, "double root"), (1j * k, "double root")]
    return [
        (-1j * s, "lump meets antilump"),
        (1j * s, "lump meets antilump"),
        (-2j * s, "parallel lumps coincide"),
        (2j * s, "parallel lumps coincide"),
    ]


@dataclass
class Landmark:
    """Curvature from a five-point stencil centred exactly on a special chart point."""

    point: complex
    kind: str
    spacing: float
    omega: float
    curvature: float


@dataclass
class SurfaceScan:
    a: float
    sheet: str
    coords: np.ndarray
    samples: list
    omega: np.ndarray
    curvature: np.ndarray
    spec: GridSpec
    failures: list = field(default_factory=list)
    landmarks: list = field(default_factory=list)

    def sample_grid(self, attr: str) -> np.ndarray:
        out = np.full(self.coords.shape, np.nan)
        for (i, j), s in self.samples:
            out[i, j] = getattr(s, attr)
        return out

    def curvature_at(self, point: complex) -> float:
        """Curvature at a landmark if one sits at ``point``, else at the nearest lattice node."""
        for lm in self.landmarks:
            if abs(lm.point - point) <= 1e-9 * max(1.0, abs(point)):
                return lm.curvature
        k = np.nanargmin(np.where(np.isfinite(self.curvature), np.abs(self.coords - point), np.nan))
        return float(self.curvature.flat[k])

    def summary(self) -> dict:
        pos = find_peaks(self.coords, self.curvature, +1)
        neg = find_peaks(self.coords, self.curvature, -1)
        C = self.curvature
        return {
            "a": self.a,
            "sheet": self.sheet,
            "grid_L": self.spec.L,
            "grid_N": self.spec.N,
            "lattice_spacing": float(self.coords[0, 1].real - self.coords[0, 0].real),
            "samples": int(np.isfinite(self.omega).sum()),
            "failures": len(self.failures),
            "C_max": float(np.nanmax(C)),
            "C_min": float(np.nanmin(C)),
            "positive_peaks": pos,
            "negative_peaks": neg,
            "landmarks": [(lm.point, lm.kind, lm.curvature) for lm in self.landmarks],
            "max_iso_spread": float(np.nanmax(self.sample_grid("iso_spread"))),
            "max_resid_gauge": float(np.nanmax(self.sample_grid("resid_gauge"))),
        }


def scan_spec(a: float, sheet: str, coords: np.ndarray, N: int = 513, L: float | None = None) -> GridSpec:
    """One grid for the whole scan, large enough for every zero met."""
    rmax = 0.0
    for c in np.ravel(coords):
        fac, _ = sheet_factorization(a, complex(c), sheet)
        rmax = max([rmax] + [abs(z) for z in fac.zeros()])
    if L is None:
        return GridSpec(max(6.0, 2 * rmax + 3.0), N)
    return GridSpec(L, N)


def _serpentine(rows: range, ncols: int):
    for k, i in enumerate(rows):
        cols = range(ncols) if k % 2 == 0 else range(ncols - 1, -1, -1)
        for j in cols:
            yield i, j


def _scan_strip(args):
    a, sheet, coords, rows, delta, spec = args
    out, failures = [], []
    prev = None
    for i, j in _serpentine(rows, coords.shape[1]):
        c = complex(coords[i, j])
        try:
            s = omega_at(a, c, sheet, delta, spec, base=prev)
        except HitchinError as exc:
            log.warning("sample %s failed: %s", c, exc)
            failures.append(((i, j), str(exc)))
            continue
        prev = s.field
        s.field = None
        out.append(((i, j), s))
        log.info("sample (%d,%d) %s: omega=%.6g spread=%.2e", i, j, c, s.omega, s.iso_spread)
    return out, failures


def _probe(args):
    """Omega on the stencil {p, p +- h, p +- ih}, centre first for warm starts."""
    a, sheet, point, kind, h, delta, spec = args
    try:
        centre = omega_at(a, point, sheet, delta, spec)
        om = [omega_at(a, point + d, sheet, delta, spec, base=centre.field).omega for d in (h, -h, 1j * h, -1j * h)]
    except HitchinError as exc:
        log.warning("landmark probe at %s failed: %s", point, exc)
        return None, ((point, kind), str(exc))
    lo = np.log(om)
    lap = (lo.sum() - 4 * math.log(centre.omega)) / h**2
    return Landmark(point, kind, h, centre.omega, -lap / (2 * centre.omega)), None


def surface_scan(
    a: float,
    sheet: str = PLUS,
    radius: float = 3.0,
    steps: int = 21,
    delta: float = 0.02,
    spec: GridSpec | None = None,
    jobs: int = 1,
    probe_landmarks: bool = True,
) -> SurfaceScan:
    """Omega and curvature on a steps x steps lattice over [-radius, radius]^2.

    Each worker owns a contiguous strip of rows and sweeps it in serpentine
    order, warm-starting every solve from the previous sample.  With
    ``probe_landmarks`` the curvature is also evaluated exactly at the
    coincidence loci inside the square (see ``landmarks``), using a stencil
    of the lattice spacing centred there, since the lattice generally
    misses them.
    """
    if steps < 9:
        raise PreconditionError("surface_scan needs steps >= 9")
    t = np.linspace(-radius, radius, steps)
    h = float(t[1] - t[0])
    coords = t[None, :] + 1j * t[:, None]
    spec = spec or scan_spec(a, sheet, coords)
    jobs = max(1, int(jobs))
    strips = np.array_split(np.arange(steps), jobs)
    tasks = [(a, sheet, coords, range(s[0], s[-1] + 1), delta, spec) for s in strips if len(s)]
    probes = []
    if probe_landmarks:
        lim = radius - h + 1e-12
        probes = [
            (a, sheet, p, kind, h, delta, spec)
            for p, kind in landmarks(a, sheet)
            if abs(p.real) <= lim and abs(p.imag) <= lim
        ]
    if jobs == 1:
        results = [_scan_strip(tk) for tk in tasks]
        probed = [_probe(pr) for pr in probes]
    else:
        with ProcessPoolExecutor(jobs) as ex:
            strip_futs = [ex.submit(_scan_strip, tk) for tk in tasks]
            probe_futs = [ex.submit(_probe, pr) for pr in probes]
            results = [f.result() for f in strip_futs]
            probed = [f.result() for f in probe_futs]
    samples, failures = [], []
    for out, fail in results:
        samples.extend(out)
        failures.extend(fail)
    samples.sort(key=lambda p: p[0])
    if len(failures) > 0.1 * steps * steps:
        raise ConvergenceError(
            f"{len(failures)} of {steps * steps} samples failed", float("nan"), context=failures
        )
    omega = np.full(coords.shape, np.nan)
    for (i, j), s in samples:
        omega[i, j] = s.omega
    C = curvature_grid(coords, omega)
    for (i, j), s in samples:
        s.curvature = float(C[i, j])
    marks = []
    for lm, fail in probed:
        if lm is not None:
            marks.append(lm)
        else:
            failures.append(fail)
    return SurfaceScan(a, sheet, coords, samples, omega, C, spec, failures, marks)
