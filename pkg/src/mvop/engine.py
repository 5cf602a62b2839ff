"""Monic matrix-valued orthogonal polynomials and the verification battery.

Conventions used throughout:

* ``<P, Q> = sum_i w_i P(y_i) Wpol(y_i) Q(y_i)^*`` with the Gauss-Jacobi rule of
  the scalar factor ``y^beta (1-y)^alpha``;
* differential operators act on the right of row polynomials;
* constant coefficients in Gram-Schmidt and in the three-term recurrence
  multiply the polynomials from the left, since ``<A P, Q> = A <P, Q>``.

Every residual returned here is relative, and the docstring of each check
states its normalisation.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .deform import DeformedFamily, deformed_weight
from .families import FamilyDescriptor, a1_gauge, family_a1, family_scalar_jacobi, family_su2
from .linalg_poly import (MatPoly, WeightedMatPoly, fit_function, weighted_derivative,
                          scalar_poly)
from .quadrature import QuadRule, default_order, gauss_jacobi_rule, matrix_inner_product

RightOp = Callable[[MatPoly], MatPoly]


class EngineError(RuntimeError):
    """A computation hit a condition the theory excludes (e.g. an indefinite norm)."""


def lmul(A: np.ndarray, P: MatPoly) -> MatPoly:
    """Constant matrix times polynomial from the left."""
    return MatPoly(np.asarray(A, dtype=complex) @ P.coeffs)


def _rel(num: float, den: float) -> float:
    return 0.0 if num == 0 else num / max(den, 1e-300)


def _mnorm(A: np.ndarray) -> float:
    return float(np.max(np.abs(A))) if np.size(A) else 0.0


# ---------------------------------------------------------------------------
# Gram-Schmidt


@dataclass
class MonicSequence:
    family: DeformedFamily
    polys: list[MatPoly]
    norms: list[np.ndarray]
    rule: QuadRule
    wnodes: np.ndarray
    ortho_residual: float = 0.0

    @property
    def d_max(self) -> int:
        return len(self.polys) - 1

    def inner(self, P: MatPoly, Q: MatPoly) -> np.ndarray:
        return matrix_inner_product(P, Q, self.wnodes, self.rule)

    def to_json(self) -> dict:
        def mat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]
        return {"polys": [Q.to_json() for Q in self.polys], "norms": [mat(n) for n in self.norms],
                "ortho_residual": self.ortho_residual}


def weight_rule(df: DeformedFamily, d_max: int, order: int | None = None) -> tuple[QuadRule, np.ndarray]:
    """Quadrature rule for ``df`` exact for products of degree ``<= d_max + 2`` polynomials."""
    if order is None:
        order = default_order(d_max + 2, df.Wpol_kappa.degree)
    rule = gauss_jacobi_rule(df.alpha_kappa, df.beta_kappa, order)
    return rule, df.Wpol_kappa(rule.nodes)


def _hermitian(A: np.ndarray) -> np.ndarray:
    return (A + A.conj().T) / 2


def _check_pd(A: np.ndarray, d: int):
    ev = np.linalg.eigvalsh(A)
    if ev[0] <= 0:
        raise EngineError(f"norm matrix of degree {d} is not positive definite (min eigenvalue {ev[0]:.3e})")


def cross_gram_residual(seq: MonicSequence) -> float:
    """``max_{d != e} |<Q_d, Q_e>|_max / sqrt(|N_d|_max |N_e|_max)``."""
    worst = 0.0
    for d, Qd in enumerate(seq.polys):
        for e in range(d):
            g = seq.inner(Qd, seq.polys[e])
            scale = np.sqrt(_mnorm(seq.norms[d]) * _mnorm(seq.norms[e]))
            worst = max(worst, _rel(_mnorm(g), scale))
    return worst


def monic_mvops(df: DeformedFamily, d_max: int, order: int | None = None) -> MonicSequence:
    """Monic orthogonal sequence ``Q_0 = I, ..., Q_{d_max}`` by Gram-Schmidt.

    Each new polynomial starts from ``y Q_{d-1}`` (same span as ``y^d I`` modulo
    lower degrees, much better conditioned) and is orthogonalised twice.
    """
    if d_max < 0:
        raise ValueError("d_max must be nonnegative")
    rule, Wn = weight_rule(df, d_max, order)
    seq = MonicSequence(df, [], [], rule, Wn)
    n = df.N
    I = MatPoly.identity(n)
    seq.polys.append(I)
    N0 = _hermitian(seq.inner(I, I))
    _check_pd(N0, 0)
    seq.norms.append(N0)
    for d in range(1, d_max + 1):
        P = seq.polys[-1].times_y()
        for _ in range(2):
            for Qj, Nj in zip(seq.polys, seq.norms):
                c = seq.inner(P, Qj) @ np.linalg.inv(Nj)
                P = P - lmul(c, Qj)
        coeffs = np.array(P.padded(d + 1)[: d + 1])
        coeffs[d] = np.eye(n)
        P = MatPoly(coeffs)
        Nd = _hermitian(seq.inner(P, P))
        _check_pd(Nd, d)
        seq.polys.append(P)
        seq.norms.append(Nd)
    seq.ortho_residual = cross_gram_residual(seq)
    return seq


# ---------------------------------------------------------------------------
# three-term recurrence


@dataclass
class RecurrenceData:
    B: list[np.ndarray]
    C: list[np.ndarray]
    residual: float


def three_term(seq: MonicSequence) -> RecurrenceData:
    """``y Q_d = Q_{d+1} + B_d Q_d + C_d Q_{d-1}`` with left coefficients.

    The residual is the largest coefficient deviation divided by the largest
    coefficient of ``y Q_d``.
    """
    if len(seq.polys) < 3:
        raise ValueError("need at least three polynomials")
    B, C = [], []
    worst = 0.0
    for d in range(len(seq.polys) - 1):
        Qd = seq.polys[d]
        yQ = Qd.times_y()
        Bd = seq.inner(yQ, Qd) @ np.linalg.inv(seq.norms[d])
        B.append(Bd)
        rhs = seq.polys[d + 1] + lmul(Bd, Qd)
        if d >= 1:
            Cd = seq.inner(yQ, seq.polys[d - 1]) @ np.linalg.inv(seq.norms[d - 1])
            C.append(Cd)
            rhs = rhs + lmul(Cd, seq.polys[d - 1])
        else:
            C.append(np.zeros_like(Bd))
        worst = max(worst, _rel(yQ.distance(rhs), yQ.max_abs()))
    return RecurrenceData(B, C, worst)


def monic_by_recurrence(df: DeformedFamily, d_max: int, order: int | None = None) -> MonicSequence:
    """Same sequence as :func:`monic_mvops` through the Stieltjes recursion only."""
    rule, Wn = weight_rule(df, d_max, order)
    seq = MonicSequence(df, [], [], rule, Wn)
    n = df.N
    Q = [MatPoly.identity(n)]
    Ns = [_hermitian(seq.inner(Q[0], Q[0]))]
    seq.polys, seq.norms = Q, Ns
    for d in range(d_max):
        yQ = Q[d].times_y()
        Ninv = np.linalg.inv(Ns[d])
        nxt = yQ - lmul(seq.inner(yQ, Q[d]) @ Ninv, Q[d])
        if d >= 1:
            # <y Q_d, Q_{d-1}> N_{d-1}^{-1} = N_d N_{d-1}^{-1}
            nxt = nxt - lmul(Ns[d] @ np.linalg.inv(Ns[d - 1]), Q[d - 1])
        Q.append(nxt)
        Ns.append(_hermitian(seq.inner(nxt, nxt)))
    seq.ortho_residual = cross_gram_residual(seq)
    return seq


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True, eq=False)
class FirstOrderOp:
    """Right-acting ``P E = P'(y B1 + B0) + P A0``."""

    B1: np.ndarray
    B0: np.ndarray
    A0: np.ndarray

    def __call__(self, P: MatPoly) -> MatPoly:
        return apply_first_order(P, self)

    def shifted(self, nu: float) -> "FirstOrderOp":
        """``E + nu (A0 + B1)``."""
        return FirstOrderOp(self.B1, self.B0, self.A0 + nu * (self.A0 + self.B1))

    def intertwined(self, nu: float) -> "FirstOrderOp":
        """``E + nu B1``: since ``(P E)' = P' (E + B1)``, this is ``E`` carried ``nu`` steps along ``d/dy``."""
        return FirstOrderOp(self.B1, self.B0, self.A0 + nu * self.B1)


def apply_first_order(P: MatPoly, op: FirstOrderOp) -> MatPoly:
    lin = MatPoly(np.array([op.B0, op.B1], dtype=complex))
    return P.derivative() * lin + P * op.A0


def gamma_operator(gamma2: MatPoly, gamma1: MatPoly) -> RightOp:
    """``P -> P'' Gamma2^* + P' Gamma1^*``."""
    g2, g1 = gamma2.adjoint(), gamma1.adjoint()
    return lambda P: P.derivative(2) * g2 + P.derivative() * g1


def commutator(A: RightOp, B: RightOp) -> RightOp:
    """``P -> (P A) B - (P B) A``."""
    return lambda P: B(A(P)) - A(B(P))


# ---------------------------------------------------------------------------
# eigenvalues and symmetry


@dataclass
class EigenReport:
    lambdas: list[np.ndarray]
    residuals: list[float]

    @property
    def residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


def eigen_check(seq: MonicSequence, op: RightOp) -> EigenReport:
    """``Q_d . op = Lambda_d Q_d`` with ``Lambda_d`` the degree-``d`` coefficient of ``Q_d . op``.

    Since ``Q_d`` is monic the top coefficient determines ``Lambda_d``; the
    full coefficient residual (relative to the largest coefficient of
    ``Q_d . op`` or ``Lambda_d Q_d``) certifies the eigen-equation.
    """
    lams, res = [], []
    for d, Q in enumerate(seq.polys):
        R = op(Q)
        lam = R.coeff(d)
        L = lmul(lam, Q)
        lams.append(lam)
        res.append(_rel(R.distance(L), max(R.max_abs(), L.max_abs(), 1.0)))
    return EigenReport(lams, res)


def symmetry_check(seq: MonicSequence, op: RightOp) -> float:
    """``max |<Q_d op, Q_e> - <Q_d, Q_e op>|_max`` over ``d, e``.

    Normalised by ``sqrt(|N_d| |N_e|)`` times the operator scale
    ``max(1, max_d |Q_d op| / |Q_d|)`` (coefficient max-norms).
    """
    images = [op(Q) for Q in seq.polys]
    scale = max([1.0] + [_rel(Im.max_abs(), Q.max_abs()) for Im, Q in zip(images, seq.polys)])
    worst = 0.0
    for d, (Qd, Id) in enumerate(zip(seq.polys, images)):
        for e in range(d, len(seq.polys)):
            Qe, Ie = seq.polys[e], images[e]
            diff = seq.inner(Id, Qe) - seq.inner(Qd, Ie)
            den = np.sqrt(_mnorm(seq.norms[d]) * _mnorm(seq.norms[e])) * scale
            worst = max(worst, _rel(_mnorm(diff), den))
    return worst


# ---------------------------------------------------------------------------
# deformation chain and Gamma matrices


class DeformationChain:
    """Cached deformed families at ``kappa0 + j`` for ``j = 0, 1, ...``."""

    def __init__(self, base: FamilyDescriptor, kappa0: float, convention: str = "derived",
                 T_override: dict | None = None):
        self.base = base
        self.kappa0 = float(kappa0)
        self.convention = convention
        self.T_override = T_override or {}
        self._cache: dict[int, DeformedFamily] = {}

    def __getitem__(self, j: int) -> DeformedFamily:
        if j not in self._cache:
            T = self.T_override.get(j)
            self._cache[j] = deformed_weight(self.base, self.kappa0 + j, self.convention, T=T)
        return self._cache[j]


@dataclass
class GammaPair:
    gamma2: MatPoly
    gamma1: MatPoly
    residual2: float
    residual1: float
    w_shift_residual: float
    w_derivative_residual: float

    def to_json(self) -> dict:
        return {"Gamma2": self.gamma2.to_json(), "Gamma1": self.gamma1.to_json(),
                "residual2": self.residual2, "residual1": self.residual1,
                "w_shift_residual": self.w_shift_residual,
                "w_derivative_residual": self.w_derivative_residual}


def _wpol_direct(df: DeformedFamily, y, order: int = 0) -> np.ndarray:
    """``psi0 T psi0^*`` or its first derivative, straight from ``psi0``."""
    fam = df.base
    P = fam.psi0(y)
    Ph = np.conj(np.swapaxes(P, -1, -2))
    if order == 0:
        return P @ df.Tkappa @ Ph
    D = fam.psi0(y, 1)
    Dh = np.conj(np.swapaxes(D, -1, -2))
    return D @ df.Tkappa @ Ph + P @ df.Tkappa @ Dh


def gamma_pair(df: DeformedFamily, dfn: DeformedFamily) -> GammaPair:
    """Fit ``Gamma2`` (degree 2) and ``Gamma1`` (degree 1) and certify the weight relations.

    ``Gamma2 = y(1-y) (psi0^*)^{-1} T_k^{-1} T_{k+1} psi0^*`` and
    ``Gamma1 = W_k^{-1} (W_{k+1})'`` are sampled from ``psi0`` directly; the
    fit residuals are holdout deviations relative to the sample scale. The
    certificates compare ``Wpol_k Gamma2`` with ``y(1-y) Wpol_{k+1}`` and the
    exact derivative of ``W_k Gamma2`` with ``W_k Gamma1`` coefficient-wise.
    """
    if abs(dfn.kappa - df.kappa - 1) > 1e-12:
        raise ValueError("dfn must be the deformation at kappa + 1")
    fam = df.base
    ratio = np.linalg.inv(df.Tkappa) @ dfn.Tkappa
    bk, ak = df.beta_kappa, df.alpha_kappa

    def g2(y):
        Ph = np.conj(fam.psi0(np.asarray(y)).T)
        return y * (1 - y) * np.linalg.inv(Ph) @ ratio @ Ph

    def g1(y):
        y = np.asarray(y)
        Wn = _wpol_direct(dfn, y)
        dWn = _wpol_direct(dfn, y, 1)
        # (y^(b+1) (1-y)^(a+1) Wn)' / (y^b (1-y)^a)
        num = ((bk + 1) * (1 - y) - (ak + 1) * y) * Wn + y * (1 - y) * dWn
        return np.linalg.solve(_wpol_direct(df, y), num)

    G2, r2 = fit_function(g2, 2)
    G1, r1 = fit_function(g1, 1)
    n = df.N
    quad = scalar_poly([0.0, 1.0, -1.0], n)
    lhs = df.Wpol_kappa * G2
    rhs = quad * dfn.Wpol_kappa
    shift_res = _rel(lhs.distance(rhs), max(lhs.max_abs(), rhs.max_abs()))
    dW = weighted_derivative(WeightedMatPoly(bk, ak, lhs)).P
    target = quad * (df.Wpol_kappa * G1)
    deriv_res = _rel(dW.distance(target), max(dW.max_abs(), target.max_abs()))
    return GammaPair(G2, G1, r2, r1, shift_res, deriv_res)


def shift_check(df: DeformedFamily, dfn: DeformedFamily, d_max: int,
                seq: MonicSequence | None = None, seqn: MonicSequence | None = None) -> float:
    """``max_d |Q_d' - d Q_{d-1}^{next}| / |Q_d'|`` (coefficient max-norms), ``1 <= d <= d_max``."""
    seq = seq or monic_mvops(df, d_max)
    seqn = seqn or monic_mvops(dfn, max(d_max - 1, 0))
    worst = 0.0
    for d in range(1, d_max + 1):
        dQ = seq.polys[d].derivative()
        other = seqn.polys[d - 1].scale(d)
        worst = max(worst, _rel(dQ.distance(other), dQ.max_abs()))
    return worst


# ---------------------------------------------------------------------------
# Rodrigues formula


@dataclass
class RodriguesResult:
    Q: MatPoly
    G: np.ndarray
    fit_residual: float
    residual: float  # deviation from Gram-Schmidt, relative to max coefficient


def rodrigues(chain: DeformationChain, d: int, start: int = 0,
              seq: MonicSequence | None = None, compare: bool = True) -> RodriguesResult:
    """``Q_d = G_d (d/dy)^d W^{(k+d)} (W^{(k)})^{-1}`` for ``k = chain.kappa0 + start``.

    The derivative is exact on the weighted polynomial; the division happens at
    Chebyshev nodes followed by a degree-``d`` fit whose holdout residual
    certifies polynomiality. ``G_d`` is the inverse of the fitted leading
    coefficient. With ``compare=False`` no Gram-Schmidt reference is built and
    the residual is nan.
    """
    df = chain[start]
    top = chain[start + d]
    W = top.weight()
    for _ in range(d):
        W = weighted_derivative(W)
    if abs(W.a - df.beta_kappa) > 1e-12 or abs(W.b - df.alpha_kappa) > 1e-12:
        raise EngineError("exponent bookkeeping mismatch in Rodrigues quotient")
    P = W.P

    def quotient(y):
        return np.linalg.solve(df.Wpol_kappa(y).T, P(y).T).T

    fit, fres = fit_function(quotient, d)
    G = np.linalg.inv(fit.leading())
    Q = lmul(G, fit)
    if not compare:
        return RodriguesResult(Q, G, fres, float("nan"))
    if seq is None:
        seq = monic_mvops(df, d)
    ref = seq.polys[d]
    return RodriguesResult(Q, G, fres, _rel(Q.distance(ref), ref.max_abs()))


# ---------------------------------------------------------------------------
# raising operator and the derivative relation


@dataclass
class RaisingReport:
    adjoint_residual: float
    relation_residual: float          # with G_n at kappa + 1
    relation_residual_alt: float      # with G_n at kappa
    gamma1_residual: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _random_poly(rng: np.random.Generator, n: int, degree: int) -> MatPoly:
    c = rng.standard_normal((degree + 1, n, n)) + 1j * rng.standard_normal((degree + 1, n, n))
    return MatPoly(c)


def raising_check(chain: DeformationChain, d_max: int, seed: int = 0, pairs: int = 5,
                  start: int = 0) -> RaisingReport:
    """Adjoint identity, derivative relation for the monic sequence, and its ``n = 0`` case.

    (i) ``<P', Q>_{k+1} = -<P, Q' Gamma2^* + Q Gamma1^*>_k`` for random ``P, Q``;
    (ii) ``G_n^{(k+1)} (G_{n+1}^{(k)})^{-1} Q_{n+1}^{(k)} = Q_n^{(k+1)'} Gamma2^* + Q_n^{(k+1)} Gamma1^*``;
    (iii) ``Gamma1^* = (G_1^{(k)})^{-1} Q_1^{(k)}``.
    The variant of (ii) with ``G_n^{(k)}`` is reported alongside.
    """
    df, dfn = chain[start], chain[start + 1]
    gp = gamma_pair(df, dfn)
    g2s, g1s = gp.gamma2.adjoint(), gp.gamma1.adjoint()
    raise_op = lambda Q: Q.derivative() * g2s + Q * g1s

    rng = np.random.default_rng(seed)
    rule_k, W_k = weight_rule(df, d_max + 2)
    rule_n, W_n = weight_rule(dfn, d_max + 2)
    adj = 0.0
    for _ in range(pairs):
        P = _random_poly(rng, df.N, d_max)
        Q = _random_poly(rng, df.N, d_max)
        lhs = matrix_inner_product(P.derivative(), Q, W_n, rule_n)
        rhs = -matrix_inner_product(P, raise_op(Q), W_k, rule_k)
        adj = max(adj, _rel(_mnorm(lhs - rhs), max(_mnorm(lhs), _mnorm(rhs))))

    seq = monic_mvops(df, d_max)
    seqn = monic_mvops(dfn, d_max)
    G_k = [rodrigues(chain, j, start, seq).G for j in range(d_max + 1)]
    G_n = [rodrigues(chain, j, start + 1, seqn).G for j in range(d_max)]
    rel, rel_alt = 0.0, 0.0
    for n in range(d_max):
        rhs = raise_op(seqn.polys[n])
        base = lmul(np.linalg.inv(G_k[n + 1]), seq.polys[n + 1])
        lhs = lmul(G_n[n], base)
        alt = lmul(G_k[n], base)
        rel = max(rel, _rel(lhs.distance(rhs), rhs.max_abs()))
        rel_alt = max(rel_alt, _rel(alt.distance(rhs), rhs.max_abs()))
    g1_from_monic = lmul(G_k[0] @ np.linalg.inv(G_k[1]), seq.polys[1])
    g1res = _rel(g1_from_monic.distance(g1s), g1s.max_abs())
    return RaisingReport(adj, rel, rel_alt, g1res)


# ---------------------------------------------------------------------------
# su2 commuting first-order operator


def basis_polys(n: int, degree: int) -> list[MatPoly]:
    """``y^k E_rs`` for ``k <= degree`` and all matrix units."""
    out = []
    for k in range(degree + 1):
        for r in range(n):
            for s in range(n):
                m = np.zeros((n, n))
                m[r, s] = 1.0
                out.append(MatPoly.monomial(k, m))
    return out


PRINTED = "printed"
INTERTWINED = "intertwined"


@dataclass
class CommutantReport:
    ell: Fraction
    nu: float
    kappa: float
    variant: str
    commutator_residual: float
    eigen_residual: float
    eigenvalue_residual: float
    symmetry_same: float    # against the weight whose polynomials are tested as eigenfunctions
    symmetry_next: float    # against the weight one step further along the chain
    symmetry_prev: float    # against the weight one step back (nan when kappa < 1)

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["ell"] = str(self.ell)
        return out


def commuting_E_check(ell, nu: float, d_max: int = 6, kappa: float | None = None,
                      variant: str = PRINTED) -> CommutantReport:
    """First-order operator deformed by ``nu`` against the hypergeometric operator at ``kappa``.

    ``variant="printed"`` uses ``E + nu (A0 + B1)`` with predicted eigenvalue
    ``n B1 + A0 + nu (B1 + A0)``; ``variant="intertwined"`` uses
    ``E + nu B1`` with predicted eigenvalue ``n B1 + A0 + nu B1``. Both are
    intertwined ``nu`` times with ``d/dy`` in their construction, so ``kappa``
    defaults to ``nu``.

    The commutator residual is the largest coefficient of ``[E, D] P`` over the
    basis ``y^k E_rs``, relative to the largest coefficient of ``(P E) D``.
    The eigen residual certifies ``Q_n E = Lambda_n Q_n`` for the monic
    sequence at ``kappa``; the eigenvalue residual compares the extracted
    ``Lambda_n`` with the prediction.
    """
    fam = family_su2(ell)
    if fam.E is None:
        raise ValueError("the first-order operator needs ell >= 1/2")
    kappa = float(nu if kappa is None else kappa)
    E0 = FirstOrderOp(fam.E["B1"], fam.E["B0"], fam.E["A0"])
    A0, B1 = fam.E["A0"], fam.E["B1"]
    if variant == PRINTED:
        E = E0.shifted(nu)
        predict = lambda d: d * B1 + A0 + nu * (B1 + A0)
    elif variant == INTERTWINED:
        E = E0.intertwined(nu)
        predict = lambda d: d * B1 + A0 + nu * B1
    else:
        raise ValueError(f"unknown variant {variant!r}")
    chain = DeformationChain(fam, kappa)
    df = chain[0]
    D: RightOp = df.D
    comm = commutator(E, D)
    worst = 0.0
    for P in basis_polys(fam.N, d_max):
        worst = max(worst, _rel(comm(P).max_abs(), max(D(E(P)).max_abs(), 1.0)))
    seq = monic_mvops(df, d_max)
    eig = eigen_check(seq, E)
    lam_err = 0.0
    for d, lam in enumerate(eig.lambdas):
        pred = predict(d)
        lam_err = max(lam_err, _rel(_mnorm(lam - pred), max(_mnorm(pred), 1.0)))
    sym_same = symmetry_check(seq, E)
    sym_next = symmetry_check(monic_mvops(chain[1], d_max), E)
    if kappa >= 1:
        prev = DeformationChain(fam, kappa - 1)[0]
        sym_prev = symmetry_check(monic_mvops(prev, d_max), E)
    else:
        sym_prev = float("nan")
    return CommutantReport(Fraction(ell), nu, kappa, variant, worst, eig.residual, lam_err,
                           sym_same, sym_next, sym_prev)


# ---------------------------------------------------------------------------
# a1 parameter identification


@dataclass
class IdentificationReport:
    weight_literal: float   # W^{(n,m,i)}_k against W^{(n+k,m+k,i+k)}_0 entrywise
    weight_gauged: float    # the same after congruence by the constant gauge matrix
    polys_literal: float    # monic polynomials compared directly
    polys_gauged: float     # Q = A Q' A^{-1}

    def to_json(self) -> dict:
        return dict(self.__dict__)


def a1_identification(n: int, m: int, i: int, kappa: int, d_max: int = 6) -> IdentificationReport:
    """Compare the a1 family deformed by integer ``kappa`` with the family at shifted parameters.

    Weight residuals are entrywise maxima over interior nodes relative to the
    largest entry; polynomial residuals are coefficient max-norms relative to
    the largest coefficient.
    """
    if int(kappa) != kappa or kappa < 0:
        raise ValueError("the identification needs a nonnegative integer kappa")
    kappa = int(kappa)
    df = deformed_weight(family_a1(n, m, i), kappa)
    ref = deformed_weight(family_a1(n + kappa, m + kappa, i + kappa), 0)
    A = a1_gauge(n, m, i, kappa)
    ys = np.linspace(0.05, 0.95, 19)
    W1, W2 = df.W(ys), ref.W(ys)
    W2g = A @ W2 @ A.T
    scale = float(np.max(np.abs(W1)))
    s1, s2 = monic_mvops(df, d_max), monic_mvops(ref, d_max)
    Ainv = np.linalg.inv(A)
    lit = max(_rel(P.distance(Q), P.max_abs()) for P, Q in zip(s1.polys, s2.polys))
    gau = max(_rel(P.distance(lmul(A, Q * Ainv)), P.max_abs()) for P, Q in zip(s1.polys, s2.polys))
    return IdentificationReport(float(np.max(np.abs(W1 - W2))) / scale,
                                float(np.max(np.abs(W1 - W2g))) / scale, lit, gau)


# ---------------------------------------------------------------------------
# scalar Jacobi shift operators


@dataclass(frozen=True)
class ScalarShift:
    """``P -> lead(y) P' + mult(y) P`` with polynomial coefficients given low to high."""
    lead: tuple[float, ...]
    mult: tuple[float, ...]

    def __call__(self, P: MatPoly) -> MatPoly:
        lead = MatPoly.from_scalar_coeffs(self.lead, P.size)
        mult = MatPoly.from_scalar_coeffs(self.mult, P.size)
        return P.derivative() * lead + P * mult

    def values(self, P: MatPoly, y: np.ndarray) -> np.ndarray:
        """The image evaluated at ``y`` without forming its coefficients.

        Forming the image in the monomial basis rounds coefficients that
        cancel heavily on [0, 1]; applying the operator pointwise avoids it.
        """
        lead = np.polynomial.polynomial.polyval(y, self.lead)[:, None, None]
        mult = np.polynomial.polynomial.polyval(y, self.mult)[:, None, None]
        return lead * P.derivative()(y) + mult * P(y)


def scalar_shift_operators(alpha: float, beta: float) -> dict[str, tuple[ScalarShift, tuple[int, int]]]:
    """The four first-order shifts of the scalar family with their exponent shifts.

    Shifts are ``(d alpha, d beta)`` with ``alpha`` the exponent of ``1 - y``.
    """
    return {
        "G+": (ScalarShift((1.0,), (0.0,)), (1, 1)),
        "G-": (ScalarShift((0.0, -2.0, 2.0), (-2 * beta, 2 * (alpha + beta))), (-1, -1)),
        "E+": (ScalarShift((0.0, 1.0), (beta,)), (1, -1)),
        "E-": (ScalarShift((-1.0, 1.0), (alpha,)), (-1, 1)),
    }


def scalar_shift_ops(alpha: float, beta: float, d_max: int = 8) -> dict[str, float]:
    """Pairwise orthogonality of the images of the monic family under each shift.

    Residual: ``max |<I_d, I_e>| / sqrt(<I_d, I_d> <I_e, I_e>)`` in the shifted
    weight, with the images applied pointwise at the quadrature nodes; shifts
    that would make an exponent ``<= -1`` are reported as nan.
    """
    fam = family_scalar_jacobi(alpha, beta)
    seq = monic_mvops(deformed_weight(fam, 0.0), d_max)
    out = {}
    for name, (op, (da, db)) in scalar_shift_operators(alpha, beta).items():
        a2, b2 = alpha + da, beta + db
        if a2 <= -1 or b2 <= -1:
            out[name] = float("nan")
            continue
        rule = gauss_jacobi_rule(a2, b2, default_order(d_max + 2, 0))
        images = [op.values(Q, rule.nodes)[:, 0, 0] for Q in seq.polys]
        images = [v for v, Q in zip(images, seq.polys) if op(Q).max_abs() > 1e-14]
        gram = np.einsum("i,di,ei->de", rule.weights, np.array(images), np.conj(np.array(images)))
        scale = np.sqrt(np.real(np.diag(gram)))
        off = np.abs(gram) / np.outer(scale, scale) - np.eye(len(images))
        out[name] = float(np.max(np.abs(off))) if len(images) > 1 else 0.0
    return out


# ---------------------------------------------------------------------------
# benchmarking strategies


def build_sequence(df: DeformedFamily, d_max: int, strategy: str,
                   chain: DeformationChain | None = None) -> list[MatPoly]:
    if strategy == "gs":
        return monic_mvops(df, d_max).polys
    if strategy == "recurrence":
        return monic_by_recurrence(df, d_max).polys
    if strategy == "rodrigues":
        chain = chain or DeformationChain(df.base, df.kappa, df.convention)
        return [rodrigues(chain, d, 0, compare=False).Q for d in range(d_max + 1)]
    raise ValueError(f"unknown strategy {strategy!r}")


STRATEGIES = ("gs", "recurrence", "rodrigues")


def bench(df: DeformedFamily, d_max: int, strategies: Sequence[str] = STRATEGIES) -> list[dict]:
    """Wall time per strategy and degree, with the deviation from the Gram-Schmidt reference."""
    ref = monic_mvops(df, d_max).polys
    rows = []
    for strat in strategies:
        for d in range(d_max + 1):
            t0 = time.perf_counter()
            polys = build_sequence(df, d, strat)
            ms = (time.perf_counter() - t0) * 1e3
            dev = max(_rel(P.distance(R), R.max_abs()) for P, R in zip(polys, ref))
            rows.append({"degree": d, "strategy": strat, "wall_time_ms": ms, "max_residual": dev})
    return rows
