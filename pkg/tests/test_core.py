import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hitchin.core import (
    MINUS,
    PLUS,
    SIGMA1,
    ComplexPoly,
    Cubic,
    Factorization,
    FieldPointData,
    abs_F,
    boundary_psi,
    d_zbar,
    factorize,
    gauge_field_magnitude,
    minus_sheet_cubic,
    moduli_dimension,
    reconstruct_fields,
    roots,
)
from hitchin.elliptic import GridSpec
from hitchin.errors import (
    InvalidSheetError,
    SingularBoundaryError,
    UnsupportedDegreeError,
)

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


def _rel_poly_error(poly, zs):
    """max relative coefficient error of the monic product of (z - zs)."""
    rebuilt = np.poly(zs)
    target = np.array(poly.monic().coeffs)
    return np.max(np.abs(rebuilt - target)) / max(1.0, np.max(np.abs(target)))


class TestComplexPoly:
    def test_degree_and_lead(self):
        p = ComplexPoly((2, 0, 1))
        assert p.degree == 2 and p.lead == 2
        assert p.monic().coeffs[0] == 1 + 0j

    def test_leading_zeros_stripped(self):
        assert ComplexPoly((0, 0, 1, 2)).degree == 1

    def test_evaluation_vectorized(self):
        p = ComplexPoly((1, 0, -1))
        z = np.array([0, 1, 2j])
        np.testing.assert_allclose(p(z), z**2 - 1)

    def test_arithmetic(self):
        p = ComplexPoly.from_roots([1, 2])
        q = ComplexPoly((1, -3))
        assert (p * q).degree == 3
        assert (p - p)(1.7) == 0
        assert (p + q)(0) == p(0) + q(0)
        np.testing.assert_allclose(p.deriv().coeffs, [2, -3])

    def test_divide_linear(self):
        H = Cubic(3, 2j).poly
        quot, rem = H.divide_linear(1j)
        assert abs(rem) < 1e-14
        np.testing.assert_allclose(quot.coeffs, [1, 1j, 2], atol=1e-14)


class TestRoots:
    def test_cube_roots_of_unity(self):
        zs = roots(ComplexPoly((1, 0, 0, -1)))
        expected = sorted([cmath.exp(2j * math.pi * k / 3) for k in range(3)], key=lambda z: (z.real, z.imag))
        np.testing.assert_allclose(zs, expected, atol=1e-14)

    def test_double_root_a3(self):
        zs = roots(Cubic(3, -2j).poly)
        np.testing.assert_allclose(sorted(zs, key=lambda z: z.imag), [-1j, -1j, 2j], atol=1e-7)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_double_root_loci_have_zero_discriminant(self, sign):
        k_minus, k_plus = Cubic.double_root_K(3.0)
        K = k_plus if sign > 0 else k_minus
        assert abs(K - sign * 2j) < 1e-14
        assert abs(Cubic(3, K).discriminant) < 1e-12

    @pytest.mark.parametrize("deg", [0, 4])
    def test_unsupported_degree(self, deg):
        with pytest.raises(UnsupportedDegreeError):
            roots(ComplexPoly((1,) + (0,) * deg))

    def test_ordering_lexicographic(self):
        zs = roots(ComplexPoly.from_roots([2, -1 + 1j, -1 - 1j]))
        assert zs == sorted(zs, key=lambda z: (z.real, z.imag))

    @pytest.mark.parametrize(
        "zs", [[1j, 1.75j, 1.75j], [0, 0, 0], [2, 2, 2], [-1j, -1j, 2j], [1e-3, -1e-3, 5]]
    )
    def test_repeated_and_clustered_roots(self, zs):
        poly = ComplexPoly.from_roots(zs)
        assert _rel_poly_error(poly, roots(poly)) <= 1e-12

    @settings(max_examples=300, deadline=None)
    @given(st.lists(cplx, min_size=1, max_size=3))
    def test_roots_reproduce_polynomial(self, zs):
        poly = ComplexPoly.from_roots(zs)
        assert _rel_poly_error(poly, roots(poly)) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(finite.map(abs), cplx)
    def test_cubic_family(self, a, K):
        poly = Cubic(a, K).poly
        zs = roots(poly)
        assert len(zs) == 3
        assert _rel_poly_error(poly, zs) <= 1e-12


class TestFactorize:
    def test_plus_sheet(self):
        fac = factorize(Cubic(0, 1), PLUS)
        np.testing.assert_allclose(fac.mu_plus.coeffs, [1, 0, 0, -1])
        np.testing.assert_allclose(fac.mu_minus.coeffs, [-1])

    def test_minus_sheet_division(self):
        fac = factorize(Cubic(3, 2j), MINUS, 1j)
        np.testing.assert_allclose(fac.mu_minus.coeffs, [-1, 1j])
        np.testing.assert_allclose(fac.mu_plus.coeffs, [1, 1j, 2], atol=1e-14)
        np.testing.assert_allclose(sorted(roots(fac.mu_plus), key=lambda z: z.imag), [-2j, 1j], atol=1e-12)

    def test_minus_sheet_needs_root(self):
        with pytest.raises(InvalidSheetError):
            factorize(Cubic(3, 2j), MINUS, 0.5)
        with pytest.raises(InvalidSheetError):
            factorize(Cubic(3, 2j), MINUS)
        with pytest.raises(InvalidSheetError):
            factorize(Cubic(3, 2j), "sideways")

    def test_degree_two_degenerate_split(self):
        z = ComplexPoly((1, 0))
        fac = Factorization(z, -z)
        np.testing.assert_allclose(fac.H.coeffs, [1, 0, 0])

    @settings(max_examples=100, deadline=None)
    @given(finite.map(abs), cplx)
    def test_product_identity_minus(self, a, W):
        cubic = minus_sheet_cubic(a, W)
        fac = factorize(cubic, MINUS, W)
        assert fac.product_error(cubic.poly) <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(finite.map(abs), cplx)
    def test_product_identity_plus(self, a, K):
        cubic = Cubic(a, K)
        assert factorize(cubic, PLUS).product_error(cubic.poly) <= 1e-12

    def test_negative_a_rejected(self):
        with pytest.raises(ValueError):
            Cubic(-1, 0)


class TestBoundaryAndFlux:
    def test_boundary_psi_plus_z3(self):
        fac = factorize(ComplexPoly((1, 0, 0, 0)), PLUS)
        z = 2.5 * np.exp(1j * np.linspace(0, 6, 7))
        np.testing.assert_allclose(boundary_psi(fac, z), -3 * math.log(2.5))

    def test_boundary_psi_n1(self):
        fac = factorize(ComplexPoly((1, 0)), PLUS)
        assert boundary_psi(fac, 4.0) == pytest.approx(-math.log(4.0))

    def test_boundary_psi_n2(self):
        fac = factorize(ComplexPoly((1, 0, 0)), PLUS)
        assert boundary_psi(fac, 30j) == pytest.approx(-2 * math.log(30))

    def test_boundary_psi_at_zero(self):
        fac = factorize(Cubic(0, 1), PLUS)
        with pytest.raises(SingularBoundaryError):
            boundary_psi(fac, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(cplx.filter(lambda z: abs(z) > 0.5))
    def test_balanced_point_has_no_field(self, z):
        fac = factorize(Cubic(1.0, 0.3), PLUS)
        psi = float(boundary_psi(fac, z))
        assert gauge_field_magnitude(FieldPointData(psi, 0.7j, z), fac) <= 1e-9 * (1 + abs(fac.mu_plus(z)))

    def test_abs_F_nonnegative(self):
        fac = factorize(Cubic(0, 2), PLUS)
        z = np.linspace(-3, 3, 11)[:, None] + 1j * np.linspace(-3, 3, 11)[None, :]
        assert np.all(abs_F(np.sin(z.real), z, fac) >= 0)


class TestReconstruct:
    spec = GridSpec(4.0, 33)

    def test_degenerate_solution(self):
        z = ComplexPoly((1, 0))
        g = reconstruct_fields(Factorization(z, -z), self.spec, np.zeros((33, 33)))
        assert np.max(np.abs(g.a_zbar)) == 0
        # constant diagonal gauge transformation diag(e^{i pi/4}, e^{-i pi/4}) maps Phi to z i sigma_1
        gt = np.diag([cmath.exp(1j * math.pi / 4), cmath.exp(-1j * math.pi / 4)])
        target = self.spec.z[..., None, None] * (1j * SIGMA1)
        np.testing.assert_allclose(gt @ g.phi @ np.linalg.inv(gt), target, atol=1e-13)

    def test_det_phi_is_H(self):
        fac = factorize(Cubic(1.5, 0.5 + 1j), PLUS)
        psi = np.cos(self.spec.z.real) * np.sin(self.spec.z.imag)
        g = reconstruct_fields(fac, self.spec, psi)
        np.testing.assert_allclose(np.linalg.det(g.phi), fac.H(self.spec.z), rtol=1e-12, atol=1e-10)

    def test_plus_sheet_entries(self):
        fac = factorize(Cubic(0, 0), PLUS)
        psi = 0.1 * np.abs(self.spec.z) ** 2
        g = reconstruct_fields(fac, self.spec, psi)
        z = self.spec.z
        np.testing.assert_allclose(g.phi[..., 0, 1], z**3 * np.exp(psi / 2))
        np.testing.assert_allclose(g.phi[..., 1, 0], -np.exp(-psi / 2))
        assert np.all(g.phi[..., 0, 0] == 0) and np.all(g.phi[..., 1, 1] == 0)

    def test_a_z_anti_hermitian_partner(self):
        fac = factorize(Cubic(1.0, 1.0), PLUS)
        psi = np.exp(-np.abs(self.spec.z) ** 2)
        g = reconstruct_fields(fac, self.spec, psi, alpha=0.3j)
        np.testing.assert_allclose(g.a_z, -np.conj(np.swapaxes(g.a_zbar, -1, -2)))

    def test_d_zbar_of_zbar(self):
        z = self.spec.z
        np.testing.assert_allclose(d_zbar(np.conj(z) ** 2, self.spec.h), 2 * np.conj(z), atol=1e-12)
        np.testing.assert_allclose(d_zbar(z**2, self.spec.h), 0, atol=1e-12)


@pytest.mark.parametrize("n, dim", [(1, 0), (2, 0), (3, 4), (4, 4), (5, 8), (6, 8)])
def test_moduli_dimension(n, dim):
    assert moduli_dimension(n) == dim


def test_moduli_dimension_rejects_zero():
    with pytest.raises(UnsupportedDegreeError):
        moduli_dimension(0)
