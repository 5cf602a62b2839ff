"""Deformation of a matrix-valued classical pair along the shift ``d/dy``.

Given a :class:`~mvop.families.FamilyDescriptor` and ``kappa >= 0`` this
module produces the shifted hypergeometric operator, the deformed radial
potential ``F_kappa``, a diagonal ``T_kappa`` with ``T F^* = F T`` and the
deformed weight ``y^(beta+kappa) (1-y)^(alpha+kappa) psi0 T_kappa psi0^*``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
import numpy as np

from .families import FamilyDescriptor
from .linalg_poly import MatPoly, WeightedMatPoly, chebyshev_nodes, fit_function_auto

log = logging.getLogger(__name__)

TSYM_TOL = 1e-9
FIT_TOL = 1e-10

# conventions for the kappa-dependent middle term of F_kappa
DERIVED = "derived"      # from the conjugation identity with V_kappa = V + kU + k(k-1)
MINUS = "minus"          # F - k psi0^-1 (U + k - 1) psi0 - k (1-2y) psi0^-1 psi0'
PLUS = "plus"            # F + k psi0^-1 (U + k - 1) psi0 - k (1-2y) psi0^-1 psi0'
CONVENTIONS = (DERIVED, MINUS, PLUS)


class DeformationError(ValueError):
    """The requested deformation does not exist or could not be certified."""


@dataclass(frozen=True, eq=False)
class HyperOp:
    """Right-acting ``P D = y(1-y) P'' + P'(C - yU) - P V``."""

    C: np.ndarray
    U: np.ndarray
    V: np.ndarray

    def apply(self, P: MatPoly) -> MatPoly:
        return apply_hyper(P, self)

    def __call__(self, P: MatPoly) -> MatPoly:
        return apply_hyper(P, self)


def apply_hyper(P: MatPoly, op: HyperOp) -> MatPoly:
    """Exact coefficient-level ``y(1-y) P'' + P'(C - yU) - P V``."""
    n = P.size
    if op.C.shape != (n, n):
        raise ValueError(f"size mismatch: operator {op.C.shape} vs polynomial {n}")
    d1, d2 = P.derivative(), P.derivative(2)
    quad = MatPoly.from_scalar_coeffs([0, 1, -1], n)
    lin = MatPoly(np.array([op.C, -op.U], dtype=complex))
    return quad * d2 + d1 * lin - P * op.V


def deform_operator(fam: FamilyDescriptor, kappa: float) -> HyperOp:
    """``(C + k, U + 2k, V + kU + k(k-1))``."""
    if kappa < 0:
        raise DeformationError("kappa must be nonnegative")
    I = np.eye(fam.N)
    return HyperOp(fam.C + kappa * I, fam.U + 2 * kappa * I,
                   fam.V + kappa * fam.U + kappa * (kappa - 1) * I)


def a_kappa(fam: FamilyDescriptor, kappa: float) -> tuple[float, float]:
    """``(a0, a1)`` with ``a_kappa(y) = a0 + a1 y = beta + k + 1 - y(alpha + beta + 2k + 2)``."""
    a0, a1 = fam.a_coeffs()
    return a0 + kappa, a1 - 2 * kappa


def deform_F(fam: FamilyDescriptor, kappa: float, y, convention: str = DERIVED) -> np.ndarray:
    """Deformed radial potential at interior points ``y`` (vectorised)."""
    y = np.asarray(y, dtype=float)
    P = fam.psi0(y)
    Pinv = np.linalg.inv(P)
    d1 = Pinv @ fam.psi0(y, 1)
    if convention == DERIVED:
        Vk = deform_operator(fam, kappa).V
        a0, a1 = a_kappa(fam, kappa)
        d2 = Pinv @ fam.psi0(y, 2)
        q = (y * (1 - y))[..., None, None]
        a = (a0 + a1 * y)[..., None, None]
        return -Pinv @ Vk @ P - q * d2 - a * d1
    if convention not in (MINUS, PLUS):
        raise ValueError(f"unknown convention {convention!r}")
    sign = -1.0 if convention == MINUS else 1.0
    F0 = deform_F(fam, 0.0, y, DERIVED)
    I = np.eye(fam.N)
    mid = Pinv @ (fam.U + (kappa - 1) * I) @ P
    return F0 + sign * kappa * mid - kappa * (1 - 2 * y)[..., None, None] * d1


@dataclass
class TCertificate:
    tsym_residual: float
    positive: bool
    method: str
    nullity: int = 1
    ratio_spread: float = 0.0

    def to_json(self) -> dict:
        return {"tsym_residual": self.tsym_residual, "positivity": self.positive,
                "method": self.method, "nullity": self.nullity}


def tsym_residual(T: np.ndarray, F: np.ndarray) -> float:
    """max over nodes of ``|T F^* - F T|_max / |F|_max``."""
    F = np.asarray(F)
    Fh = np.conj(np.swapaxes(F, -1, -2))
    diff = T @ Fh - F @ T
    num = np.max(np.abs(diff), axis=(-1, -2))
    den = np.max(np.abs(F), axis=(-1, -2))
    # a vanishing F is trivially T-symmetric
    return float(np.max(np.where(num == 0, 0.0, num / np.maximum(den, 1e-300))))


def solve_T(fam: FamilyDescriptor, kappa: float, convention: str = DERIVED,
            nodes=None, tol: float = TSYM_TOL) -> tuple[np.ndarray, TCertificate]:
    """Diagonal ``T`` with ``T[0,0] = 1`` and ``T F_kappa^* = F_kappa T`` at every node."""
    if nodes is None:
        nodes = chebyshev_nodes(7)
    Fs = deform_F(fam, kappa, nodes, convention)
    n = fam.N
    if n == 1:
        T = np.eye(1)
        return T, TCertificate(tsym_residual(T, Fs), True, "scalar")

    # tridiagonal shortcut: T[i+1,i+1] = F[i+1,i] / F[i,i+1] T[i,i]
    scale = np.max(np.abs(Fs))
    band = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) > 1
    tridiag = not band.any() or np.max(np.abs(Fs[:, band])) <= 1e-12 * scale
    if tridiag and scale > 0:
        upper = Fs[:, :-1, 1:].diagonal(axis1=1, axis2=2)
        lower = Fs[:, 1:, :-1].diagonal(axis1=1, axis2=2)
        ratios, spread = [], 0.0
        for k in range(n - 1):
            # nodes where the off-diagonal pair vanishes carry no information
            ok = np.abs(upper[:, k]) > 1e-12 * scale
            if not ok.any():
                ratios = None
                break
            r = lower[ok, k] / upper[ok, k]
            spread = max(spread, float(np.max(np.abs(r - r[0])) / max(abs(r[0]), 1e-300)))
            ratios.append(r[0])
        if ratios is not None and spread < tol:
            t = np.concatenate([[1.0], np.cumprod(ratios)])
            if np.max(np.abs(t.imag)) < 1e-12:
                t = t.real
            T = np.diag(t)
            res = tsym_residual(T, Fs)
            return T, TCertificate(res, bool(np.isrealobj(t) and np.all(t > 0)),
                                   "tridiagonal", 1, spread)

    # general case: T_ii conj(F_ji) - F_ij T_jj = 0 stacked over nodes and (i, j)
    rows = []
    for F in Fs:
        for i in range(n):
            for j in range(n):
                r = np.zeros(n, dtype=complex)
                r[i] += np.conj(F[j, i])
                r[j] -= F[i, j]
                if np.any(r):
                    rows.append(r / max(np.max(np.abs(F)), 1e-300))
    A = np.array(rows)
    _, s, vh = np.linalg.svd(A)
    s_full = np.concatenate([s, np.zeros(n - len(s))]) if len(s) < n else s
    nullity = int(np.sum(s_full < 1e-9 * max(s_full[0], 1.0)))
    if nullity > 1:
        log.warning("T_kappa not unique: nullspace dimension %d", nullity)
    t = vh[-1]
    if abs(t[0]) < 1e-14:
        raise DeformationError("T_kappa normalisation T[0,0] = 1 impossible")
    t = t / t[0]
    if np.max(np.abs(t.imag)) < 1e-10:
        t = t.real
    T = np.diag(t)
    res = tsym_residual(T, Fs)
    return T, TCertificate(res, bool(np.all(np.real(t) > 0)), "least-squares", nullity)


@dataclass(frozen=True, eq=False)
class DeformedFamily:
    base: FamilyDescriptor
    kappa: float
    Tkappa: np.ndarray
    D: HyperOp
    Wpol_kappa: MatPoly
    alpha_kappa: float  # exponent of (1 - y)
    beta_kappa: float   # exponent of y
    convention: str = DERIVED
    certificates: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.base.N

    def a_coeffs(self) -> tuple[float, float]:
        return a_kappa(self.base, self.kappa)

    def F(self, y) -> np.ndarray:
        return deform_F(self.base, self.kappa, y, self.convention)

    def weight(self) -> WeightedMatPoly:
        """Full weight ``y^beta_k (1-y)^alpha_k Wpol_kappa`` as a weighted polynomial."""
        return WeightedMatPoly(self.beta_kappa, self.alpha_kappa, self.Wpol_kappa)

    def W(self, y) -> np.ndarray:
        """Weight evaluated through psi0 directly (no fitted polynomial)."""
        y = np.asarray(y, dtype=float)
        w = y ** self.beta_kappa * (1 - y) ** self.alpha_kappa
        return w[..., None, None] * self.base.wpol(y, self.Tkappa)

    def to_json(self) -> dict:
        def mat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]
        return {
            "family": self.base.label(), "kappa": self.kappa,
            "Tkappa": mat(self.Tkappa), "Ckappa": mat(self.D.C), "Ukappa": mat(self.D.U),
            "Vkappa": mat(self.D.V), "alpha_kappa": self.alpha_kappa,
            "beta_kappa": self.beta_kappa, "Wpol_kappa": self.Wpol_kappa.to_json(),
            "certificates": self.certificates,
        }


def deformed_weight(fam: FamilyDescriptor, kappa: float, convention: str = DERIVED,
                    T: np.ndarray | None = None, require_positive: bool = True) -> DeformedFamily:
    """Assemble the deformed pair; ``T`` overrides the solved ``T_kappa`` (for controls)."""
    Tk, cert = solve_T(fam, kappa, convention)
    if T is not None:
        Tk = np.asarray(T)
    if require_positive and T is None and not cert.positive:
        raise DeformationError(f"T_kappa not positive for {fam.label()} at kappa={kappa}: {np.diag(Tk)}")
    Wpol, fit_res = fit_function_auto(lambda y: fam.wpol(y, Tk), tol=FIT_TOL)
    Wpol = MatPoly((Wpol.coeffs + np.conj(np.transpose(Wpol.coeffs, (0, 2, 1)))) / 2)
    if fit_res > FIT_TOL:
        raise DeformationError(f"weight polynomial part not polynomial (residual {fit_res:.2e})")
    certs = {"tsym_residual": cert.tsym_residual, "wpol_fit_residual": fit_res,
             "positivity": cert.positive, "T_method": cert.method}
    return DeformedFamily(fam, float(kappa), Tk, deform_operator(fam, kappa), Wpol,
                          fam.alpha + kappa, fam.beta + kappa, convention, certs)


# ---------------------------------------------------------------------------
# structural checks


def conjugation_residual(fam: FamilyDescriptor, kappa: float, convention: str = DERIVED,
                         nodes=None, degree: int = 2) -> float:
    """Round trip between the polynomial operator and the radial operator.

    For ``P`` in the basis ``y^k E_rs`` (``k <= degree``) compares
    ``y(1-y) (P psi0)'' + a_k (P psi0)' + (P psi0) F_k`` with ``(P D_k) psi0`` at
    interior nodes; the residual is relative to the largest entry of either side.
    For ``P = I`` this says that ``psi0`` diagonalises the radial operator with
    left eigenvalue ``-V_k``.
    """
    if nodes is None:
        nodes = np.linspace(0.05, 0.95, 19)
    y = np.asarray(nodes, dtype=float)
    P0, P1, P2 = fam.psi0(y), fam.psi0(y, 1), fam.psi0(y, 2)
    Fk = deform_F(fam, kappa, y, convention)
    op = deform_operator(fam, kappa)
    a0, a1 = a_kappa(fam, kappa)
    q = (y * (1 - y))[:, None, None]
    a = (a0 + a1 * y)[:, None, None]
    n = fam.N
    worst = 0.0
    for k in range(degree + 1):
        for r in range(n):
            for s in range(n):
                m = np.zeros((n, n))
                m[r, s] = 1.0
                P = MatPoly.monomial(k, m)
                p, dp, ddp = P(y), P.derivative()(y), P.derivative(2)(y)
                phi, dphi = p @ P0, dp @ P0 + p @ P1
                ddphi = ddp @ P0 + 2 * dp @ P1 + p @ P2
                lhs = q * ddphi + a * dphi + phi @ Fk
                rhs = apply_hyper(P, op)(y) @ P0
                scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1.0)
                worst = max(worst, float(np.max(np.abs(lhs - rhs)) / scale))
    return worst


def intertwining_residual(P: MatPoly, fam: FamilyDescriptor, kappa: float, steps: int = 1) -> float:
    """``d^s/dy^s (P D_k) - (d^s P / dy^s) D_{k+s}``, coefficient max-norm relative to ``P D_k``."""
    lhs = apply_hyper(P, deform_operator(fam, kappa)).derivative(steps)
    rhs = apply_hyper(P.derivative(steps), deform_operator(fam, kappa + steps))
    den = max(apply_hyper(P, deform_operator(fam, kappa)).max_abs(), 1.0)
    return lhs.distance(rhs) / den


def scalar_weight_ode_residual(fam: FamilyDescriptor, kappa: float) -> float:
    """``(y(1-y) w_k)' = a_k w_k`` after dividing by ``w_k = y^(b+k) (1-y)^(a+k)``.

    The left side becomes ``(b+k+1)(1-y) - (a+k+1) y``; the coefficients of this
    degree-one polynomial are compared with those of ``a_k``.
    """
    b, a = fam.beta + kappa, fam.alpha + kappa
    lhs = np.array([b + 1, -(b + 1) - (a + 1)])
    rhs = np.array(a_kappa(fam, kappa))
    return float(np.max(np.abs(lhs - rhs)))
