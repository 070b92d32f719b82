"""Polynomial data, factorizations mu_+ mu_- = -H, and the psi-gauge fields.

In the psi-gauge an SU(2) Hitchin pair is

    Phi   = [[0, mu_+ e^{psi/2}], [mu_- e^{-psi/2}, 0]]
    A_zb  = -(1/4) d_zb(psi) sigma_3 + alpha Phi

so det Phi = -mu_+ mu_- = H and the gauge field is (i/2)[Phi, Phi^*].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidSheetError,
    SingularBoundaryError,
    UnsupportedDegreeError,
)

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA1, SIGMA2, SIGMA3)

PLUS = "plus"
MINUS = "minus"


@dataclass(frozen=True)
class ComplexPoly:
    """Polynomial in z, coefficients highest degree first."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coeffs)
        # strip leading zeros but keep the zero polynomial as (0,)
        i = 0
        while i < len(c) - 1 and c[i] == 0:
            i += 1
        object.__setattr__(self, "coeffs", c[i:] if c else (0j,))

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "ComplexPoly":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, [1.0, -complex(r)])
        return cls(tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        return self.coeffs[0]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex) if not np.isscalar(z) else complex(z)
        acc = self.coeffs[0] * (z * 0 + 1)
        for c in self.coeffs[1:]:
            acc = acc * z + c
        return acc

    def __neg__(self) -> "ComplexPoly":
        return ComplexPoly(tuple(-c for c in self.coeffs))

    def __mul__(self, other) -> "ComplexPoly":
        if isinstance(other, ComplexPoly):
            return ComplexPoly(tuple(np.convolve(self.coeffs, other.coeffs)))
        return ComplexPoly(tuple(complex(other) * c for c in self.coeffs))

    __rmul__ = __mul__

    def __add__(self, other: "ComplexPoly") -> "ComplexPoly":
        a, b = list(self.coeffs), list(other.coeffs)
        n = max(len(a), len(b))
        a = [0j] * (n - len(a)) + a
        b = [0j] * (n - len(b)) + b
        return ComplexPoly(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other: "ComplexPoly") -> "ComplexPoly":
        return self + (-other)

    def deriv(self) -> "ComplexPoly":
        n = self.degree
        if n == 0:
            return ComplexPoly((0j,))
        return ComplexPoly(tuple(c * (n - i) for i, c in enumerate(self.coeffs[:-1])))

    def divide_linear(self, w: complex) -> tuple["ComplexPoly", complex]:
        """Synthetic division by (z - w); returns (quotient, remainder)."""
        out = [self.coeffs[0]]
        for c in self.coeffs[1:]:
            out.append(c + out[-1] * w)
        rem = out.pop()
        return ComplexPoly(tuple(out) if out else (0j,)), rem

    def monic(self) -> "ComplexPoly":
        return ComplexPoly(tuple(c / self.lead for c in self.coeffs))

    def roots(self) -> list[complex]:
        return roots(self)


@dataclass(frozen=True)
class Cubic:
    """H(z) = z^3 + a z - K."""

    a: float
    K: complex

    def __post_init__(self):
        if not self.a >= 0:
            raise ValueError(f"shape parameter a must be >= 0, got {self.a}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "K", complex(self.K))

    @property
    def poly(self) -> ComplexPoly:
        return ComplexPoly((1.0, 0.0, self.a, -self.K))

    @property
    def discriminant(self) -> complex:
        return -4 * self.a**3 - 27 * self.K**2

    def roots(self) -> list[complex]:
        return roots(self.poly)

    @staticmethod
    def double_root_K(a: float) -> tuple[complex, complex]:
        """The two K with a repeated zero of H: K = +-2(-a/3)^{3/2}."""
        k = 2 * (a / 3) ** 1.5
        return (-1j * k, 1j * k) if a > 0 else (0j, 0j)


def _sort_key(z: complex):
    return (z.real, z.imag)


def _quadratic(b: complex, c: complex) -> list[complex]:
    """Roots of z^2 + b z + c without cancellation."""
    d = cmath.sqrt(b * b - 4 * c)
    s = -b - d if abs(-b - d) >= abs(-b + d) else -b + d
    if s == 0:
        return [0j, 0j]
    r1 = s / 2
    return [r1, c / r1]


def _polish(c: Sequence[complex], z: complex, steps: int = 2) -> complex:
    p = ComplexPoly(tuple(c))
    dp = p.deriv()
    for _ in range(steps):
        d = dp(z)
        if d == 0:
            break
        step = p(z) / d
        znew = z - step
        if abs(p(znew)) > abs(p(z)):
            break
        z = znew
    return z


def roots(poly: ComplexPoly) -> list[complex]:
    """Closed-form zeros of a degree 1-3 polynomial, sorted by (Re, Im)."""
    n = poly.degree
    if n < 1 or n > 3:
        raise UnsupportedDegreeError(f"roots() supports degree 1..3, got {n}")
    c = poly.monic().coeffs
    if n == 1:
        out = [-c[1]]
    elif n == 2:
        out = _quadratic(c[1], c[2])
    else:
        b, cc, d = c[1], c[2], c[3]
        # depressed cubic t^3 + p t + q, z = t - b/3
        p = cc - b * b / 3
        q = 2 * b**3 / 27 - b * cc / 3 + d
        disc = (q / 2) ** 2 + (p / 3) ** 3
        sq = cmath.sqrt(disc)
        u3 = -q / 2 + sq if abs(-q / 2 + sq) >= abs(-q / 2 - sq) else -q / 2 - sq
        if u3 == 0:
            ts = [0j, 0j, 0j]
        else:
            u = u3 ** (1 / 3)
            omega = cmath.exp(2j * math.pi / 3)
            cands = [u * omega**k - p / (3 * u * omega**k) for k in range(3)]
            t1 = max(cands, key=abs)
            # remaining pair from the deflated quadratic t^2 + t1 t + (t1^2 + p),
            # product fixed by t1 t2 t3 = -q
            if t1 != 0:
                ts = [t1] + _quadratic(t1, -q / t1)
            else:
                ts = [t1] + _quadratic(t1, t1 * t1 + p)
        out = _refine_cubic(c, [t - b / 3 for t in ts])
    return sorted((complex(z) for z in out), key=_sort_key)


def _refine_cubic(c, zs):
    """Polish the most isolated zero, deflate exactly, re-solve the pair.

    The isolated zero is simple (unless all three coincide), so Newton
    converges; the pair keeps the exact sum and product of the deflated
    quadratic, which preserves the coefficients near double roots.
    """
    gaps = [min(abs(zs[i] - zs[j]) for j in range(3) if j != i) for i in range(3)]
    i = max(range(3), key=lambda k: gaps[k])
    z1 = _polish(c, zs[i], steps=3)
    quot, _ = ComplexPoly(tuple(c)).divide_linear(z1)
    pair = _quadratic(quot.coeffs[1], quot.coeffs[2])
    scale = max(1.0, abs(z1), *(abs(z) for z in pair))
    if abs(pair[0] - pair[1]) > 1e-3 * scale:
        pair = [_polish(c, z) for z in pair]
    return [z1] + pair


@dataclass(frozen=True)
class Factorization:
    """A split mu_+ mu_- = -H selecting the S_+ or S_-(W) branch."""

    mu_plus: ComplexPoly
    mu_minus: ComplexPoly
    sheet: str = PLUS
    W: complex | None = None

    @property
    def H(self) -> ComplexPoly:
        return -(self.mu_plus * self.mu_minus)

    @property
    def degree(self) -> int:
        return self.H.degree

    def zeros(self) -> list[complex]:
        """Zeros of mu_+ and mu_- (with multiplicity)."""
        out: list[complex] = []
        for m in (self.mu_plus, self.mu_minus):
            if m.degree >= 1:
                out.extend(roots(m))
        return out

    def product_error(self, H: ComplexPoly, samples: int = 20, seed: int = 0) -> float:
        """max relative |mu_+ mu_- + H| over random points in the unit-scaled disc."""
        rng = np.random.default_rng(seed)
        z = 3 * (rng.standard_normal(samples) + 1j * rng.standard_normal(samples))
        lhs = self.mu_plus(z) * self.mu_minus(z)
        h = H(z)
        scale = np.maximum(np.abs(h), np.abs(lhs)) + 1e-300
        return float(np.max(np.abs(lhs + h) / scale))


def _as_poly(H) -> ComplexPoly:
    return H.poly if isinstance(H, Cubic) else H


def factorize(H, sheet: str = PLUS, W: complex | None = None) -> Factorization:
    """Split H into (mu_+, mu_-).

    ``plus`` gives (H, -1).  ``minus`` needs a zero ``W`` of H and gives
    (H/(z-W), -(z-W)).  Degree 1 and 2 polynomials are accepted as well.
    """
    poly = _as_poly(H)
    if poly.degree < 1 or poly.degree > 3:
        raise UnsupportedDegreeError(f"factorize supports degree 1..3, got {poly.degree}")
    if sheet == PLUS:
        return Factorization(poly, ComplexPoly((-1.0,)), PLUS, None)
    if sheet != MINUS:
        raise InvalidSheetError(f"unknown sheet {sheet!r}")
    if W is None:
        raise InvalidSheetError("the minus sheet needs the odd-lump zero W")
    W = complex(W)
    K_scale = abs(poly.coeffs[-1])
    if abs(poly(W)) > 1e-10 * (1 + K_scale):
        raise InvalidSheetError(f"W={W} is not a zero of H (|H(W)|={abs(poly(W)):.3e})")
    q, _ = poly.divide_linear(W)
    return Factorization(q, ComplexPoly((-1.0, W)), MINUS, W)


def minus_sheet_cubic(a: float, W: complex) -> Cubic:
    """The cubic on S_- at chart coordinate W, i.e. K = W^3 + a W."""
    return Cubic(a, W**3 + a * W)


def boundary_psi(fac: Factorization, z):
    """log(|mu_-|/|mu_+|): the psi at which the right-hand side vanishes."""
    mp = np.abs(fac.mu_plus(z))
    mm = np.abs(fac.mu_minus(z))
    if np.any(mp == 0) or np.any(mm == 0):
        raise SingularBoundaryError("boundary_psi evaluated at a zero of mu_+ or mu_-")
    return np.log(mm) - np.log(mp)


@dataclass(frozen=True)
class FieldPointData:
    psi: float
    alpha: complex
    z: complex


def abs_F(psi, z, fac: Factorization):
    """|F| = (1/2) | |mu_+|^2 e^psi - |mu_-|^2 e^-psi |, vectorized."""
    psi = np.asarray(psi, dtype=float)
    return 0.5 * np.abs(
        np.abs(fac.mu_plus(z)) ** 2 * np.exp(psi) - np.abs(fac.mu_minus(z)) ** 2 * np.exp(-psi)
    )


def gauge_field_magnitude(data: FieldPointData, fac: Factorization) -> float:
    # alpha drops out: F = (i/2)[Phi, Phi*] only sees the off-diagonal moduli
    return float(abs_F(data.psi, data.z, fac))


@dataclass(frozen=True)
class GaugeFields:
    """Grids of 2x2 matrices, shape (N, N, 2, 2)."""

    phi: np.ndarray
    a_zbar: np.ndarray

    @property
    def a_z(self) -> np.ndarray:
        return -np.conj(np.swapaxes(self.a_zbar, -1, -2))


def d_zbar(f: np.ndarray, h: float) -> np.ndarray:
    """Centered (one-sided second-order at the edges) d/dzbar = (d_x + i d_y)/2.

    Arrays are indexed [iy, ix].
    """
    fy, fx = np.gradient(f, h, edge_order=2)
    return 0.5 * (fx + 1j * fy)


def reconstruct_fields(fac: Factorization, spec, psi: np.ndarray, alpha=0.0) -> GaugeFields:
    """(Phi, A_zbar) on the grid of ``spec`` from psi and alpha."""
    z = spec.z
    psi = np.asarray(psi, dtype=float)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=complex), psi.shape)
    p = fac.mu_plus(z) * np.exp(psi / 2)
    q = fac.mu_minus(z) * np.exp(-psi / 2)
    phi = np.zeros(psi.shape + (2, 2), dtype=complex)
    phi[..., 0, 1] = p
    phi[..., 1, 0] = q
    dpsi = d_zbar(psi, spec.h)
    a = -0.25 * dpsi[..., None, None] * SIGMA3 + alpha[..., None, None] * phi
    return GaugeFields(phi, a)


def moduli_dimension(n: int) -> int:
    """Real dimension of the moduli space for deg H = n."""
    if n < 1:
        raise UnsupportedDegreeError(f"moduli_dimension needs n >= 1, got {n}")
    return 2 * (n - 1) if n % 2 else 2 * (n - 2)
