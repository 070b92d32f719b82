"""Singular (well-separated lump) approximation Phi = sqrt(H) i sigma_1.

Contents: the cone constant c, the flat asymptotic metric on the n = 3
moduli space with its SL(2, Z) monodromy, and norms of d Phi / d p_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .core import ComplexPoly
from .errors import ConicalSingularityError, PreconditionError

UPSILON = np.array([[0, -1], [1, -1]], dtype=np.int64)
ETA_FORM = np.array([[1.0, -0.5], [-0.5, 1.0]]) / math.sqrt(3)

CONVERGES = "converges"
DIVERGES = "diverges"


def wrap_angle(x):
    """Wrap to (-pi, pi]; -pi maps to pi."""
    return math.pi - np.mod(math.pi - np.asarray(x, dtype=float), 2 * math.pi)


@dataclass(frozen=True)
class AsymptoticChart:
    K: complex
    eta1: float = 0.0
    eta2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "K", complex(self.K))
        object.__setattr__(self, "eta1", float(wrap_angle(self.eta1)))
        object.__setattr__(self, "eta2", float(wrap_angle(self.eta2)))


# -- the constant c -----------------------------------------------------------


def beta_integral() -> float:
    """int_0^1 du / sqrt(1 - u^3), via u = 1 - s^2 to remove the endpoint singularity."""
    f = lambda s: 2.0 / math.sqrt(3 - 3 * s * s + s**4)  # noqa: E731
    val, _ = quad(f, 0.0, 1.0, epsabs=1e-15, epsrel=1e-14)
    return val


def constant_c() -> float:
    """c = (3 sqrt 3 / 4) (int_0^1 du/sqrt(1-u^3))^2 ~ 2.554."""
    return 3 * math.sqrt(3) / 4 * beta_integral() ** 2


def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def _bump(s, rho):
    """Smooth cutoff equal to 1 for s <= rho/2 and 0 for s >= rho."""
    t = np.clip((rho - np.asarray(s, dtype=float)) / (0.5 * rho), 0.0, 1.0)
    f = lambda x: np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)  # noqa: E731
    a, b = f(t), f(1 - t)
    return a / (a + b)


def _masked(weight, f, z):
    out = np.zeros(z.shape)
    keep = weight > 0
    out[keep] = weight[keep] * f(z[keep])
    return out


def plane_integral(f, zeros, R: float | None = None, level: int = 0) -> float:
    """int f d^2z over |z| <= R (whole plane if R is None).

    ``f`` may have |z - z_j|^{-1} singularities at ``zeros``.  A smooth
    partition of unity isolates each zero, whose piece is integrated in
    local polar coordinates (where the Jacobian cancels the singularity);
    the smooth remainder is integrated in global polar coordinates.  When
    R is None the tail must decay faster than |z|^-2.  ``level`` doubles
    every node count.
    """
    zeros = [complex(z) for z in zeros]
    m = 2**level
    if len(zeros) > 1:
        sep = min(abs(a - b) for i, a in enumerate(zeros) for b in zeros[i + 1 :])
    else:
        sep = math.inf
    rho = min(0.5, 0.45 * sep)
    if R is not None and any(abs(z) + rho > R for z in zeros):
        raise PreconditionError("a zero lies too close to the cut-off radius")

    def cut(z):
        out = np.ones(z.shape)
        for zj in zeros:
            out -= _bump(np.abs(z - zj), rho)
        return out

    total = 0.0
    # local pieces around each zero
    xs, ws = _gauss(48 * m)
    s = 0.5 * rho * (xs + 1)
    sw = 0.5 * rho * ws
    nphi = 64 * m
    phi = 2 * math.pi * np.arange(nphi) / nphi
    for zj in zeros:
        S, P = np.meshgrid(s, phi, indexing="ij")
        z = zj + S * np.exp(1j * P)
        val = _bump(S, rho) * f(z) * S
        total += float(np.sum(sw[:, None] * val) * 2 * math.pi / nphi)

    # remainder in global polar coordinates
    rmax_zero = max((abs(z) for z in zeros), default=0.0)
    inner = rmax_zero + rho + 1.0
    if R is not None:
        inner = min(inner, R)
    breaks = {0.0, inner}
    for zj in zeros:
        for d in (-rho, -rho / 2, 0.0, rho / 2, rho):
            r = abs(zj) + d
            if 0 < r < inner:
                breaks.add(r)
    breaks = sorted(breaks)
    # finer panels across the zero region
    edges = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        k = max(1, int(math.ceil((b - a) / (rho / 4))))
        edges.extend(np.linspace(a, b, k + 1)[:-1])
    edges.append(breaks[-1])
    if R is not None and R > inner:
        extra = np.geomspace(inner, R, max(2, int(math.ceil(8 * math.log(R / inner)))) + 1)
        edges.extend(extra[1:])
    nth = 256 * m * max(1, int(math.ceil(rmax_zero / rho / 4)))
    th = 2 * math.pi * np.arange(nth) / nth
    xg, wg = _gauss(16 * m)
    for a, b in zip(edges[:-1], edges[1:]):
        r = 0.5 * (b - a) * (xg + 1) + a
        wr = 0.5 * (b - a) * wg
        Rr, T = np.meshgrid(r, th, indexing="ij")
        z = Rr * np.exp(1j * T)
        val = _masked(cut(z), f, z) * Rr
        total += float(np.sum(wr[:, None] * val) * 2 * math.pi / nth)
    if R is None:
        # r in [inner, inf) via r = inner / u, u in (0, 1]
        u = 0.5 * (xg + 1)
        wu = 0.5 * wg
        for a, b in ((0.0, 0.25), (0.25, 0.5), (0.5, 1.0)):
            uu = a + (b - a) * u
            r = inner / uu
            jac = inner / uu**2 * (b - a)
            Rr, T = np.meshgrid(r, th, indexing="ij")
            z = Rr * np.exp(1j * T)
            val = _masked(cut(z), f, z) * Rr * jac[:, None]
            total += float(np.sum(wu[:, None] * val) * 2 * math.pi / nth)
    return total


def plane_integral_converged(f, zeros, R=None, tol=1e-10, max_level=4) -> tuple[float, float]:
    """plane_integral refined until successive levels agree to ``tol`` (relative)."""
    prev = plane_integral(f, zeros, R, 0)
    for level in range(1, max_level + 1):
        cur = plane_integral(f, zeros, R, level)
        err = abs(cur - prev) / max(abs(cur), 1e-300)
        if err < tol:
            return cur, err
        prev = cur
    return cur, err


@lru_cache(maxsize=1)
def constant_c_2d() -> float:
    """Independent route: c = (1/4) int_{R^2} d^2w / |w^3 - 1|."""
    zeros = [complex(math.cos(2 * math.pi * k / 3), math.sin(2 * math.pi * k / 3)) for k in range(3)]
    val, _ = plane_integral_converged(lambda w: 0.25 / np.abs(w**3 - 1), zeros, None, tol=1e-9)
    return val


# -- the asymptotic metric ------------------------------------------------------


def singular_metric(chart: AsymptoticChart, dK: complex, deta1: float = 0.0, deta2: float = 0.0) -> float:
    """ds^2 = c|K|^{-1/3}|dK|^2 + (deta1^2 + deta2^2 - deta1 deta2)/sqrt(3)."""
    if chart.K == 0:
        raise ConicalSingularityError("the flat metric has a conical singularity at K = 0")
    d = np.array([deta1, deta2], dtype=float)
    return constant_c() * abs(chart.K) ** (-1 / 3) * abs(dK) ** 2 + float(d @ ETA_FORM @ d)


def upsilon(chart: AsymptoticChart) -> AsymptoticChart:
    """(eta1, eta2) -> (-eta2, eta1 - eta2), the monodromy of arg K -> arg K + 2 pi."""
    return AsymptoticChart(chart.K, -chart.eta2, chart.eta1 - chart.eta2)


def angle_distance(x, y) -> float:
    return float(np.abs(wrap_angle(np.asarray(x) - np.asarray(y))).max())


# -- norms of coefficient variations ------------------------------------------


def classify_pk(n: int, k: int) -> str:
    """|| dPhi/dp_k || is finite iff (n + 3)/2 <= k <= n (simple zeros)."""
    if n < 1 or not 0 <= k <= n:
        raise PreconditionError(f"need n >= 1 and 0 <= k <= n, got n={n}, k={k}")
    return CONVERGES if 2 * k >= n + 3 and k <= n else DIVERGES


@dataclass(frozen=True)
class NormPk:
    value: float
    classification: str
    growth_exponent: float | None = None


def _zeros_any_degree(H: ComplexPoly):
    from .core import roots

    if 1 <= H.degree <= 3:
        return roots(H)
    # singularity locations for the quadrature only
    return [complex(z) for z in np.roots(H.coeffs)]


def norm_pk(n: int, k: int, H: ComplexPoly, R_cut: float = 10.0) -> NormPk:
    """int_{|z| <= R_cut} |z|^{2n-2k} / (4|H|) d^2z plus the closed-form classification.

    For divergent cases the growth exponent p of the value in R (V ~ R^p,
    p = 0 meaning logarithmic growth) is fitted from three radii in
    [R_cut/2, R_cut].
    """
    if H.degree != n:
        raise PreconditionError(f"H has degree {H.degree}, expected {n}")
    if R_cut < 10:
        raise PreconditionError("R_cut must be >= 10")
    zeros = _zeros_any_degree(H)
    if len(zeros) > 1:
        sep = min(abs(a - b) for i, a in enumerate(zeros) for b in zeros[i + 1 :])
        if sep < 1e-6 * max(1.0, max(abs(z) for z in zeros)):
            raise PreconditionError("norm_pk assumes the zeros of H are simple")
    cls = classify_pk(n, k)
    f = lambda z: np.abs(z) ** (2 * n - 2 * k) / (4 * np.abs(H(z)))  # noqa: E731
    value, _ = plane_integral_converged(f, zeros, R_cut, tol=1e-9, max_level=3)
    growth = None
    if cls == DIVERGES:
        v1 = plane_integral(f, zeros, R_cut / 2, 1)
        v2 = plane_integral(f, zeros, R_cut / math.sqrt(2), 1)
        d1, d2 = v2 - v1, value - v2
        # increments over equal log-steps scale like R^p (constant when p = 0)
        growth = 2 * math.log2(d2 / d1) if d1 > 0 and d2 > 0 else float("nan")
    return NormPk(value, cls, growth)


def exterior_integral(H: ComplexPoly, L: float, n_theta: int = 48, n_s: int = 48) -> float:
    """int over the outside of [-L, L]^2 of 1 / (4|H|); zeros must lie inside the square."""
    if H.degree < 3:
        raise PreconditionError("exterior integral diverges unless deg H >= 3")
    xt, wt = _gauss(n_theta)
    xs, ws = _gauss(n_s)
    s = 0.5 * (xs + 1)
    wsv = 0.5 * ws
    total = 0.0
    for m in range(8):
        a, b = m * math.pi / 4, (m + 1) * math.pi / 4
        th = 0.5 * (b - a) * (xt + 1) + a
        wth = 0.5 * (b - a) * wt
        rb = L / np.maximum(np.abs(np.cos(th)), np.abs(np.sin(th)))
        # r = rb / s, r dr = rb^2 / s^3 ds
        S, TH = np.meshgrid(s, th, indexing="ij")
        RB = np.broadcast_to(rb, S.shape)
        r = RB / S
        z = r * np.exp(1j * TH)
        val = RB**2 / S**3 / (4 * np.abs(H(z)))
        total += float(np.sum(wsv[:, None] * wth[None, :] * val))
    return total


def singular_flux(n: int) -> float:
    """Total |F| of the limiting configuration: pi/2 per simple zero."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    return n * math.pi / 2
