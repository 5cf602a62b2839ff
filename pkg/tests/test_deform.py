import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mvop.deform import (DERIVED, MINUS, PLUS, DeformationError, HyperOp, apply_hyper,
                         conjugation_residual, deform_F, deform_operator, deformed_weight,
                         intertwining_residual, scalar_weight_ode_residual, solve_T,
                         tsym_residual)
from mvop.families import (family_a1, family_c1, family_scalar_jacobi, family_su2,
                           su2_deformed_F_closed)
from mvop.krawtchouk import t_su2
from mvop.linalg_poly import MatPoly, scalar_poly

YS = np.linspace(0.05, 0.95, 50)
KAPPAS = [0.0, 0.5, 1.0, 2.0]


class TestOperator:
    def test_kappa_zero_unchanged(self):
        fam = family_su2(1)
        op = deform_operator(fam, 0)
        assert np.array_equal(op.C, fam.C) and np.array_equal(op.U, fam.U)
        assert np.array_equal(op.V, fam.V)

    def test_su2_half_kappa_one(self):
        op = deform_operator(family_su2(Fraction(1, 2)), 1)
        assert np.allclose(op.U, 6 * np.eye(2))

    def test_scalar_kappa_two(self):
        op = deform_operator(family_scalar_jacobi(0, 0), 2)
        assert (op.C[0, 0], op.U[0, 0], op.V[0, 0]) == (3.0, 6.0, 6.0)

    def test_negative_kappa(self):
        with pytest.raises(DeformationError):
            deform_operator(family_su2(1), -0.5)

    def test_apply_on_identity_and_y(self):
        fam = family_c1(3)
        op = deform_operator(fam, 0)
        assert apply_hyper(MatPoly.identity(2), op).distance(MatPoly.constant(-fam.V)) == 0
        yI = scalar_poly([0, 1], 2)
        expected = MatPoly(np.array([fam.C, -fam.U - fam.V]))
        assert apply_hyper(yI, op).distance(expected) < 1e-14

    def test_scalar_legendre_eigenvalue(self):
        op = deform_operator(family_scalar_jacobi(0, 0), 0)
        Q1 = scalar_poly([-0.5, 1], 1)
        assert apply_hyper(Q1, op).distance(Q1.scale(-2)) < 1e-15

    def test_size_mismatch(self):
        op = deform_operator(family_c1(3), 0)
        with pytest.raises(ValueError):
            apply_hyper(MatPoly.identity(3), op)

    @given(arrays(np.float64, (9, 3, 3), elements=st.floats(-5, 5, allow_nan=False)),
           st.sampled_from(KAPPAS), st.integers(1, 3))
    @settings(max_examples=30, deadline=None)
    def test_intertwining(self, coeffs, kappa, steps):
        P = MatPoly(coeffs)
        assert intertwining_residual(P, family_su2(1), kappa, steps) < 1e-12

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_scalar_weight_ode(self, kappa):
        for fam in (family_su2(1), family_a1(3, 1, 1), family_c1(4), family_scalar_jacobi(1.5, 0.5)):
            assert scalar_weight_ode_residual(fam, kappa) < 1e-14


class TestPotential:
    def test_su2_center_has_no_off_diagonal(self):
        F = deform_F(family_su2(1), 0, np.array([0.5]))[0]
        assert np.allclose(F, np.diag(np.diag(F)))

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_scalar_potential_is_minus_V(self, kappa):
        fam = family_scalar_jacobi(0.5, 1.5)
        F = deform_F(fam, kappa, YS)
        expected = -(kappa * (0.5 + 1.5 + 2) + kappa * (kappa - 1))
        assert np.allclose(F, expected)

    @pytest.mark.parametrize("ell", [Fraction(1, 2), 1, Fraction(3, 2), 2])
    @pytest.mark.parametrize("nu", [1.0, 2.0, 3.5])
    def test_su2_closed_form(self, ell, nu):
        fam = family_su2(ell)
        assert np.max(np.abs(deform_F(fam, nu - 1, YS) - su2_deformed_F_closed(ell, nu, YS))) < 1e-10
        if nu > 1:
            assert np.max(np.abs(deform_F(fam, nu - 1, YS, PLUS) - su2_deformed_F_closed(ell, nu, YS))) > 1

    @pytest.mark.parametrize("fam", [family_su2(1), family_a1(4, 2, 1), family_c1(5)], ids=str)
    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_minus_equals_derived(self, fam, kappa):
        assert np.allclose(deform_F(fam, kappa, YS, MINUS), deform_F(fam, kappa, YS, DERIVED),
                           atol=1e-10)

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            deform_F(family_su2(1), 1, YS, "sideways")


class TestConjugation:
    @pytest.mark.parametrize("fam", [family_su2(1), family_su2(Fraction(3, 2)), family_a1(3, 1, 2),
                                     family_c1(3), family_scalar_jacobi(0, 0)], ids=str)
    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_round_trip_derived(self, fam, kappa):
        assert conjugation_residual(fam, kappa, DERIVED) < 1e-9

    @pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
    def test_round_trip_fails_with_plus(self, kappa):
        assert conjugation_residual(family_su2(1), kappa, PLUS) > 1e-3


class TestSolveT:
    def test_tsym_residual_of_vanishing_potential(self):
        assert tsym_residual(np.eye(1), np.zeros((3, 1, 1))) == 0.0

    @pytest.mark.parametrize("ell", [Fraction(1, 2), 1, Fraction(3, 2), 2])
    @pytest.mark.parametrize("nu", [1, 2, 3, 4, 5])
    def test_su2_matches_exact_rationals(self, ell, nu):
        T, cert = solve_T(family_su2(ell), nu - 1)
        exact = [float(v) for v in t_su2(int(2 * ell), Fraction(nu))]
        assert np.allclose(np.diag(T), exact, rtol=1e-12)
        assert cert.positive and cert.tsym_residual < 1e-9

    @pytest.mark.parametrize("n,m,i", [(3, 1, 1), (3, 1, 2), (5, 1, 3)])
    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_a1_closed_form(self, n, m, i, kappa):
        T, _ = solve_T(family_a1(n, m, i), kappa)
        assert np.allclose(np.diag(T), [1, (n - i) / (i + kappa)])

    def test_a1_half(self):
        T, _ = solve_T(family_a1(3, 1, 1), 0.5)
        assert np.allclose(np.diag(T), [1, 2 / 1.5])

    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_c1_closed_form(self, n, kappa):
        T, _ = solve_T(family_c1(n), kappa)
        assert np.allclose(np.diag(T), [1, 2 * (n - 2) / (kappa + 2)])

    def test_c1_n4_kappa2_is_identity(self):
        T, _ = solve_T(family_c1(4), 2)
        assert np.allclose(T, np.eye(2))

    def test_plus_breaks_tsym_for_a1(self):
        _, cert = solve_T(family_a1(3, 1, 1), 1.0, PLUS)
        assert cert.tsym_residual > 1e-3


class TestDeformedWeight:
    @pytest.mark.parametrize("fam", [family_su2(1), family_a1(3, 1, 1), family_c1(3)], ids=str)
    def test_kappa_zero_reproduces_base(self, fam):
        df = deformed_weight(fam, 0)
        assert np.max(np.abs(df.Wpol_kappa(YS) - fam.wpol(YS))) < 1e-11
        assert (df.alpha_kappa, df.beta_kappa) == (fam.alpha, fam.beta)

    @pytest.mark.parametrize("kappa", KAPPAS)
    def test_su2_half_degree_one(self, kappa):
        assert deformed_weight(family_su2(Fraction(1, 2)), kappa).Wpol_kappa.degree == 1

    def test_weight_is_hermitian_positive(self):
        df = deformed_weight(family_su2(Fraction(3, 2)), 1.5)
        W = df.W(YS)
        assert np.allclose(W, np.conj(np.swapaxes(W, 1, 2)))
        assert np.all(np.linalg.eigvalsh(W) > 0)

    def test_weighted_form_agrees_with_direct(self):
        df = deformed_weight(family_c1(4), 1)
        assert np.allclose(df.weight()(YS), df.W(YS), rtol=1e-10, atol=1e-14)

    def test_non_polynomial_weight_is_rejected(self):
        # a non-diagonal constant leaves half-integer powers of y in the weight
        with pytest.raises(DeformationError):
            deformed_weight(family_c1(3), 0.0, T=np.array([[1.0, 0.5], [0.5, 1.0]]))

    def test_json(self):
        out = deformed_weight(family_su2(1), 1).to_json()
        for key in ("Tkappa", "Ckappa", "Ukappa", "Vkappa", "alpha_kappa", "beta_kappa",
                    "Wpol_kappa", "certificates"):
            assert key in out
        assert set(out["certificates"]) >= {"tsym_residual", "wpol_fit_residual", "positivity"}


class TestHyperOp:
    def test_callable(self):
        op = HyperOp(np.eye(1), 2 * np.eye(1), np.zeros((1, 1)))
        assert op(MatPoly.identity(1)).max_abs() == 0
