import numpy as np
import pytest
from fractions import Fraction
from scipy.special import eval_jacobi, factorial, poch

from mvop.deform import HyperOp, deformed_weight
from mvop.engine import (INTERTWINED, PRINTED, DeformationChain, EngineError, FirstOrderOp,
                         a1_identification, bench, build_sequence, commutator,
                         commuting_E_check, eigen_check, gamma_operator, gamma_pair, lmul,
                         monic_by_recurrence, monic_mvops, raising_check, rodrigues,
                         scalar_shift_operators, scalar_shift_ops, shift_check, symmetry_check,
                         three_term)
from mvop.families import (CORRECTED, c1_gamma_closed, family_a1, family_c1,
                           family_scalar_jacobi, family_su2, su2_gamma2_closed, su2_lambda)
from mvop.linalg_poly import MatPoly, scalar_poly


@pytest.fixture(scope="module")
def legendre():
    return monic_mvops(deformed_weight(family_scalar_jacobi(0, 0), 0), 6)


@pytest.fixture(scope="module")
def su2_one():
    return DeformationChain(family_su2(1), 0.0)


class TestGramSchmidt:
    def test_first_is_identity(self, legendre):
        assert legendre.polys[0].distance(MatPoly.identity(1)) == 0

    def test_frozen_shifted_legendre(self, legendre):
        # y^2 - y + 1/6 and y^3 - 3y^2/2 + 3y/5 - 1/20
        assert legendre.polys[2].distance(scalar_poly([1 / 6, -1, 1], 1)) < 1e-13
        assert legendre.polys[3].distance(scalar_poly([-1 / 20, 3 / 5, -1.5, 1], 1)) < 1e-13

    @pytest.mark.parametrize("alpha,beta", [(1, 2), (0.5, -0.5), (3.5, 1.5)])
    def test_scalar_against_scipy_jacobi(self, alpha, beta):
        seq = monic_mvops(deformed_weight(family_scalar_jacobi(alpha, beta), 0), 6)
        ys = np.linspace(0.1, 0.9, 7)
        for d, Q in enumerate(seq.polys):
            ref = eval_jacobi(d, alpha, beta, 2 * ys - 1)
            # leading coefficient of P_d(2y - 1) as a polynomial in y
            lead = poch(d + alpha + beta + 1, d) / factorial(d)
            got = Q(ys)[:, 0, 0].real
            assert np.allclose(got * lead, ref, rtol=1e-11, atol=1e-12)

    def test_frozen_jacobi_one_two(self):
        seq = monic_mvops(deformed_weight(family_scalar_jacobi(1, 2), 0), 3)
        assert seq.polys[2].distance(scalar_poly([2 / 7, -8 / 7, 1], 1)) < 1e-13
        assert seq.polys[3].distance(scalar_poly([-5 / 42, 5 / 6, -5 / 3, 1], 1)) < 1e-13

    def test_su2_half_orthogonality(self):
        seq = monic_mvops(deformed_weight(family_su2(Fraction(1, 2)), 0), 6)
        assert seq.ortho_residual < 1e-10
        for N in seq.norms:
            assert np.all(np.linalg.eigvalsh(N) > 0)

    def test_recurrence_strategy_agrees(self):
        df = deformed_weight(family_c1(4), 1)
        a, b = monic_mvops(df, 8), monic_by_recurrence(df, 8)
        assert max(P.distance(Q) for P, Q in zip(a.polys, b.polys)) < 1e-9

    def test_negative_degree(self):
        with pytest.raises(ValueError):
            monic_mvops(deformed_weight(family_su2(1), 0), -1)

    def test_indefinite_weight_is_detected(self):
        df = deformed_weight(family_su2(1), 0, T=np.diag([1.0, -1.0, 1.0]))
        with pytest.raises(EngineError):
            monic_mvops(df, 3)


class TestRecurrence:
    def test_legendre_coefficients(self, legendre):
        rec = three_term(legendre)
        assert rec.B[0][0, 0].real == pytest.approx(0.5)
        assert rec.C[1][0, 0].real == pytest.approx(1 / 12)
        assert rec.residual < 1e-12

    def test_su2_half_asymptotics(self):
        seq = monic_mvops(deformed_weight(family_su2(Fraction(1, 2)), 0), 8)
        rec = three_term(seq)
        assert np.max(np.abs(rec.C[6] - np.eye(2) / 16)) < 0.05

    @pytest.mark.parametrize("fam", [family_su2(Fraction(3, 2)), family_a1(4, 2, 1), family_c1(5)], ids=str)
    @pytest.mark.parametrize("kappa", [0.0, 1.0])
    def test_residual(self, fam, kappa):
        assert three_term(monic_mvops(deformed_weight(fam, kappa), 8)).residual < 1e-9

    def test_needs_three_polynomials(self, legendre):
        seq = monic_mvops(legendre.family, 1)
        with pytest.raises(ValueError):
            three_term(seq)


class TestEigenAndSymmetry:
    def test_su2_closed_form_eigenvalues(self, su2_one):
        seq = monic_mvops(su2_one[0], 6)
        eig = eigen_check(seq, su2_one[0].D)
        assert eig.residual < 1e-9
        for d, lam in enumerate(eig.lambdas):
            assert np.max(np.abs(lam - su2_lambda(1, d))) < 1e-10

    def test_scalar_eigenvalue(self, legendre):
        eig = eigen_check(legendre, legendre.family.D)
        assert eig.lambdas[3][0, 0].real == pytest.approx(-12)

    def test_scalar_symmetry_tight(self, legendre):
        assert symmetry_check(legendre, legendre.family.D) < 1e-11

    def test_su2_three_halves(self):
        df = deformed_weight(family_su2(Fraction(3, 2)), 1.5)
        assert symmetry_check(monic_mvops(df, 8), df.D) < 1e-9

    def test_corrupted_potential_breaks_symmetry(self, su2_one):
        df = su2_one[0]
        seq = monic_mvops(df, 8)
        E01 = np.zeros((3, 3))
        E01[0, 1] = 1
        bad = HyperOp(df.D.C, df.D.U, df.D.V + E01)
        assert symmetry_check(seq, bad) > 1e-3

    def test_gamma_operator_symmetric(self, su2_one):
        gp = gamma_pair(su2_one[0], su2_one[1])
        seq = monic_mvops(su2_one[0], 8)
        assert symmetry_check(seq, gamma_operator(gp.gamma2, gp.gamma1)) < 1e-9

    def test_commutator_of_operator_with_itself(self, su2_one):
        D = su2_one[0].D
        P = MatPoly(np.random.default_rng(0).standard_normal((4, 3, 3)))
        assert commutator(D, D)(P).max_abs() < 1e-12


class TestGamma:
    @pytest.mark.parametrize("n,kappa", [(3, 0.0), (4, 1.0)])
    def test_c1_closed_form(self, n, kappa):
        chain = DeformationChain(family_c1(n), kappa)
        gp = gamma_pair(chain[0], chain[1])
        g2, g1 = c1_gamma_closed(n, kappa)
        assert gp.gamma2.distance(g2) < 1e-10
        assert gp.gamma1.distance(g1) < 1e-10

    def test_c1_frozen_entries(self):
        chain = DeformationChain(family_c1(3), 0.0)
        gp = gamma_pair(chain[0], chain[1])
        assert gp.gamma2.coeff(1)[1, 0].real == pytest.approx(1 / 6, abs=1e-12)
        assert gp.gamma1.coeff(1)[0, 0].real == pytest.approx(-7, abs=1e-11)

    @pytest.mark.parametrize("ell", [Fraction(1, 2), 1, Fraction(3, 2), 2])
    @pytest.mark.parametrize("kappa", [0.0, 1.0, 2.5])
    def test_su2_corrected_closed_form(self, ell, kappa):
        chain = DeformationChain(family_su2(ell), kappa)
        gp = gamma_pair(chain[0], chain[1])
        ys = np.linspace(0.05, 0.95, 19)
        closed = su2_gamma2_closed(ell, kappa + 1, ys, CORRECTED)
        assert np.max(np.abs(gp.gamma2(ys) - closed)) < 1e-9

    def test_requires_consecutive_kappa(self, su2_one):
        with pytest.raises(ValueError):
            gamma_pair(su2_one[0], su2_one[2])

    def test_perturbed_constant_breaks_degree_one_fit(self):
        fam = family_su2(1)
        T = DeformationChain(fam, 0.0)[1].Tkappa.copy()
        T[1, 1] *= 1.05
        bad = DeformationChain(fam, 0.0, T_override={1: T})
        gp = gamma_pair(bad[0], bad[1])
        assert max(gp.residual2, gp.residual1, gp.w_derivative_residual) > 1e-4


class TestShift:
    def test_scalar(self):
        chain = DeformationChain(family_scalar_jacobi(0, 0), 0.0)
        assert shift_check(chain[0], chain[1], 8) < 1e-10

    def test_su2(self, su2_one):
        assert shift_check(su2_one[0], su2_one[1], 8) < 1e-9

    def test_a1(self):
        chain = DeformationChain(family_a1(3, 1, 1), 0.0)
        assert shift_check(chain[0], chain[1], 8) < 1e-9

    @pytest.mark.parametrize("kappa", [1, 2])
    def test_a1_identification_up_to_congruence(self, kappa):
        rep = a1_identification(3, 1, 1, kappa)
        assert rep.weight_gauged < 1e-12 and rep.polys_gauged < 1e-9
        assert rep.weight_literal > 1e-2 and rep.polys_literal > 1e-2

    def test_a1_identification_needs_integer(self):
        with pytest.raises(ValueError):
            a1_identification(3, 1, 1, 0.5)


class TestRodrigues:
    def test_degree_zero(self, su2_one):
        r = rodrigues(su2_one, 0)
        assert r.Q.distance(MatPoly.identity(3)) < 1e-12

    def test_scalar_legendre(self):
        chain = DeformationChain(family_scalar_jacobi(0, 0), 0.0)
        r = rodrigues(chain, 2)
        assert r.Q.distance(scalar_poly([1 / 6, -1, 1], 1)) < 1e-10
        # (y^2 (1-y)^2)'' = 12 y^2 - 12 y + 2, so G_2 = 1/12
        assert r.G[0, 0].real == pytest.approx(1 / 12)

    @pytest.mark.parametrize("d", range(5))
    def test_su2_half(self, d):
        chain = DeformationChain(family_su2(Fraction(1, 2)), 0.0)
        assert rodrigues(chain, d).residual < 1e-8

    def test_without_comparison(self, su2_one):
        assert np.isnan(rodrigues(su2_one, 2, compare=False).residual)


class TestRaising:
    def test_scalar(self):
        rr = raising_check(DeformationChain(family_scalar_jacobi(0, 0), 0.0), 5)
        assert max(rr.adjoint_residual, rr.relation_residual, rr.gamma1_residual) < 1e-10

    def test_su2(self, su2_one):
        rr = raising_check(su2_one, 5)
        assert max(rr.adjoint_residual, rr.relation_residual, rr.gamma1_residual) < 1e-8
        # the same relation with the normalising constants of the lower chain fails
        assert rr.relation_residual_alt > 1e-3

    def test_c1_degree_one_from_monic(self):
        chain = DeformationChain(family_c1(3), 0.0)
        gp = gamma_pair(chain[0], chain[1])
        seq = monic_mvops(chain[0], 1)
        G0, G1 = rodrigues(chain, 0, seq=seq).G, rodrigues(chain, 1, seq=seq).G
        from_monic = lmul(G0 @ np.linalg.inv(G1), seq.polys[1])
        assert from_monic.distance(gp.gamma1.adjoint()) < 1e-8


class TestCommutingOperator:
    def test_first_order_application(self):
        E = FirstOrderOp(np.eye(2), np.zeros((2, 2)), 2 * np.eye(2))
        P = scalar_poly([1, 1], 2)
        # P' (y) + 2 P = y + 2 + 2y
        assert E(P).distance(scalar_poly([2, 3], 2)) < 1e-15

    @pytest.mark.parametrize("ell", [Fraction(1, 2), 1])
    @pytest.mark.parametrize("nu", [1.0, 2.0, 3.5])
    def test_intertwined_variant(self, ell, nu):
        rep = commuting_E_check(ell, nu, 6, variant=INTERTWINED)
        assert rep.commutator_residual < 1e-10
        assert rep.eigen_residual < 1e-9 and rep.eigenvalue_residual < 1e-9
        assert rep.symmetry_same < 1e-9

    def test_undeformed_operator_commutes(self):
        rep = commuting_E_check(1, 0.0, 6, variant=PRINTED)
        assert rep.commutator_residual < 1e-10 and rep.eigenvalue_residual < 1e-9

    def test_printed_variant_does_not_commute(self):
        rep = commuting_E_check(1, 2.0, 6, variant=PRINTED)
        assert rep.commutator_residual > 1e-3

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError):
            commuting_E_check(0, 1.0)


class TestScalarShifts:
    @pytest.mark.parametrize("alpha,beta", [(1, 1), (2, 3), (0.5, 1.5)])
    def test_all_four(self, alpha, beta):
        res = scalar_shift_ops(alpha, beta, 8)
        assert set(res) == {"G+", "G-", "E+", "E-"}
        assert max(res.values()) < 1e-10

    def test_pointwise_values_match_coefficient_form(self):
        seq = monic_mvops(deformed_weight(family_scalar_jacobi(1, 2), 0), 5)
        ys = np.linspace(0.1, 0.9, 9)
        for op, _ in scalar_shift_operators(1, 2).values():
            for Q in seq.polys:
                assert np.allclose(op.values(Q, ys), op(Q)(ys), rtol=1e-12, atol=1e-14)

    def test_non_integrable_shift_is_nan(self):
        res = scalar_shift_ops(0, 0, 4)
        assert res["G+"] < 1e-10
        assert np.isnan(res["G-"]) and np.isnan(res["E+"]) and np.isnan(res["E-"])


class TestBench:
    def test_strategies_agree(self):
        df = deformed_weight(family_su2(1), 0)
        rows = bench(df, 5)
        assert {r["strategy"] for r in rows} == {"gs", "recurrence", "rodrigues"}
        assert max(r["max_residual"] for r in rows) < 1e-8

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            build_sequence(deformed_weight(family_su2(1), 0), 2, "magic")
