"""Family descriptors for the su2, a1 and c1 matrix families and the scalar Jacobi family.

Each constructor returns a :class:`FamilyDescriptor` holding the degree-zero
full spherical function ``psi0`` (with derivatives), the diagonal weight
constant ``T``, the hypergeometric operator data ``(C, U, V)``, the radial
potential ``F`` and the first-order data ``(S, R)`` with
``y(1-y) psi0' = (S + y R) psi0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Optional

import numpy as np

from .krawtchouk import build_kernel
from .linalg_poly import MatPoly, fit_matpoly, fit_nodes

MatrixFunction = Callable[..., np.ndarray]

SR_TOL = 1e-10


class FamilyError(ValueError):
    """Invalid family parameters."""


@dataclass(frozen=True, eq=False)
class FamilyDescriptor:
    name: str
    params: dict
    N: int
    alpha: float  # exponent of (1 - y)
    beta: float   # exponent of y
    psi0: MatrixFunction  # psi0(y, order=0)
    T: np.ndarray
    S: np.ndarray
    R: np.ndarray
    C: np.ndarray
    U: np.ndarray
    V: np.ndarray
    F: MatrixFunction
    sr_residual: float = 0.0
    E: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def a_coeffs(self) -> tuple[float, float]:
        """Scalar drift ``a(y) = a0 + a1 y`` of the radial operator."""
        return 1 + self.beta, -(self.alpha + self.beta + 2)

    def drift_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """``C - 2S`` and ``-(U + 2R)``; both must be scalar multiples of I."""
        return self.C - 2 * self.S, -(self.U + 2 * self.R)

    def wpol(self, y, T: np.ndarray | None = None) -> np.ndarray:
        """``psi0(y) T psi0(y)^*`` (vectorised over ``y``)."""
        T = self.T if T is None else T
        P = self.psi0(y)
        return P @ T @ np.conj(np.swapaxes(P, -1, -2))

    def label(self) -> str:
        inner = ",".join(f"{k}={_fmt_param(v)}" for k, v in self.params.items())
        return f"{self.name}({inner})"

    def to_json(self) -> dict:
        def mat(m):
            m = np.asarray(m)
            return [[[float(z.real), float(z.imag)] for z in row] for row in m.astype(complex)]
        out = {"name": self.name, "params": {k: _fmt_param(v) for k, v in self.params.items()},
               "N": self.N, "alpha": self.alpha, "beta": self.beta,
               "T": mat(self.T), "S": mat(self.S), "R": mat(self.R),
               "C": mat(self.C), "U": mat(self.U), "V": mat(self.V),
               "sr_residual": self.sr_residual}
        if self.E:
            out["E"] = {k: mat(v) for k, v in self.E.items()}
        return out


def _fmt_param(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


# ---------------------------------------------------------------------------
# helpers


def _check_interior(y):
    y = np.asarray(y, dtype=float)
    if np.any((y <= 0) | (y >= 1)):
        raise ValueError("evaluation point must lie in (0, 1)")
    return y


def _power_deriv(c: float, p: float, order: int, y: np.ndarray) -> np.ndarray:
    """``d^order/dy^order (c y**p)``."""
    f = c
    for t in range(order):
        f *= p - t
    return f * y ** (p - order)


def power_sum_matrix(entries: list[list[list[tuple[float, float]]]]) -> MatrixFunction:
    """Matrix function whose entries are sums of terms ``c * y**p``."""
    n = len(entries)

    def psi(y, order: int = 0):
        y = _check_interior(y)
        out = np.zeros(y.shape + (n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                for c, p in entries[i][j]:
                    out[..., i, j] += _power_deriv(c, p, order, y)
        return out

    return psi


def infer_SR(psi0: MatrixFunction, holdout: int = 10) -> tuple[np.ndarray, np.ndarray, float]:
    """Fit ``y(1-y) psi0'(y) psi0(y)^{-1} = S + y R``; residual on holdout nodes.

    The residual is relative to the largest sampled entry.
    """
    def G(y):
        P = psi0(y)
        if abs(np.linalg.det(P)) < 1e-300:
            raise FamilyError(f"psi0 singular at y={y}")
        return y * (1 - y) * psi0(y, 1) @ np.linalg.inv(P)

    nodes, hold = fit_nodes(2, holdout=holdout)
    samples = [(y, G(y)) for y in nodes]
    held = [(y, G(y)) for y in hold]
    P, resid = fit_matpoly(samples, 1, held)
    scale = max(np.max(np.abs(v)) for _, v in samples + held)
    return P.coeff(0), P.coeff(1), resid / max(scale, 1.0)


def first_order_residual(fam: FamilyDescriptor, ys) -> float:
    """max | y(1-y) psi0' - (S + yR) psi0 | over ``ys``."""
    ys = np.asarray(ys, dtype=float)
    lhs = (ys * (1 - ys))[:, None, None] * fam.psi0(ys, 1)
    rhs = (fam.S + ys[:, None, None] * fam.R) @ fam.psi0(ys)
    return float(np.max(np.abs(lhs - rhs)))


def _E(i, j, n):
    m = np.zeros((n, n))
    m[i, j] = 1
    return m


# ---------------------------------------------------------------------------
# SU(2) x SU(2): matrix-valued Chebyshev polynomials


def _as_half_integer(ell) -> Fraction:
    ell = Fraction(ell)
    if ell < 0 or (2 * ell).denominator != 1:
        raise FamilyError(f"ell must be a nonnegative half-integer, got {ell}")
    return ell


def _upsilon(two_ell: int, y: np.ndarray, order: int) -> np.ndarray:
    """Diagonal entries of Upsilon and their derivatives, shape ``y.shape + (N+1,)``."""
    N = two_ell
    j = np.arange(N + 1)
    phase = np.exp(1j * 1.5 * np.pi * j)
    phase = np.round(phase.real) + 1j * np.round(phase.imag)
    a = j / 2
    b = (N - j) / 2
    c = np.array([comb(N, int(t)) for t in j], dtype=float) * phase
    y = y[..., None]
    f = y ** a * (1 - y) ** b
    if order == 0:
        return c * f
    g = a / y - b / (1 - y)
    if order == 1:
        return c * f * g
    if order == 2:
        return c * f * (g * g - a / y ** 2 - b / (1 - y) ** 2)
    raise ValueError("only derivatives up to order 2 are available")


def psi0_su2_krawtchouk(ell, y, order: int = 0) -> np.ndarray:
    """``K Upsilon(y) K`` and its derivatives in ``y``."""
    ell = _as_half_integer(ell)
    N = int(2 * ell)
    y = _check_interior(y)
    K = build_kernel(N).as_float()
    ups = _upsilon(N, y, order)
    return (K * ups[..., None, :]) @ K


def phi0_su2_direct(ell, t) -> np.ndarray:
    """Degree-zero full spherical function as the explicit double sum in ``t``.

    Independent of the Krawtchouk factorisation; used to cross-check it.
    """
    ell = _as_half_integer(ell)
    N = int(2 * ell)
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (N + 1, N + 1), dtype=complex)
    for n in range(N + 1):
        for m in range(N + 1):
            # a = j1 + n/2 in 0..n, b = j2 + (2l-n)/2 in 0..2l-n, a + b = m
            for a in range(max(0, m - (N - n)), min(n, m) + 1):
                b = m - a
                coef = comb(n, a) * comb(N - n, b) / comb(N, N - m)
                freq = b - a + n - float(ell)
                out[..., n, m] += coef * np.exp(1j * freq * t)
    return out


def family_su2(ell) -> FamilyDescriptor:
    ell = _as_half_integer(ell)
    N = int(2 * ell)
    n = N + 1
    L = float(ell)
    I = np.eye(n)
    Smat = sum((i / 2 * _E(i, i - 1, n) for i in range(1, n)), np.zeros((n, n)))
    Smat = Smat + sum(((N - i) / 2 * _E(i, i + 1, n) for i in range(N)), np.zeros((n, n)))
    C = (N + 3) / 2 * I
    for i in range(n):
        if i + 1 < n:
            C[i, i + 1] = -(N - i) / 2
        if i >= 1:
            C[i, i - 1] = -i / 2
    U = (N + 3) * I
    V = -np.diag([i * (N - i) for i in range(n)]).astype(float)
    E = None
    if N > 0:
        A0 = np.diag([(N + 2) * (i - N) / N for i in range(n)])
        B1 = -np.diag([(L - i) / L for i in range(n)])
        B0 = np.diag([(L - i) / (2 * L) for i in range(n)])
        for i in range(n):
            if i + 1 < n:
                B0[i, i + 1] = -(N - i) / (4 * L)
            if i >= 1:
                B0[i, i - 1] = i / (4 * L)
        E = {"A0": A0, "B0": B0, "B1": B1}

    def F(y):
        y = _check_interior(y)
        q = y * (1 - y)
        out = np.zeros(y.shape + (n, n))
        for i in range(n):
            out[..., i, i] = (2 * q * (L * (L + 2) - i * i + 2 * L * i) - L * (2 * i + 1) + i * i) / (2 * q)
            if i >= 1:
                out[..., i, i - 1] = i * (N - i + 1) * (1 - 2 * y) / (4 * q)
            if i + 1 < n:
                out[..., i, i + 1] = (i + 1) * (N - i) * (1 - 2 * y) / (4 * q)
        return out

    psi = lambda y, order=0: psi0_su2_krawtchouk(ell, y, order)
    S_fit, R_fit, res = infer_SR(psi)
    return FamilyDescriptor(
        name="su2", params={"ell": ell}, N=n, alpha=0.5, beta=0.5, psi0=psi,
        T=I.copy(), S=S_fit, R=R_fit, C=C, U=U, V=V, F=F, sr_residual=res, E=E,
        extra={"S_closed": (L * I - Smat) / 2, "R_closed": -L * I, "S_tridiag": Smat},
    )


def su2_lambda(ell, d: int) -> np.ndarray:
    """Closed-form eigenvalue ``-d(2l+2+d) + i(2l-i)`` on the diagonal."""
    N = int(2 * Fraction(ell))
    return np.diag([-d * (N + 2 + d) + i * (N - i) for i in range(N + 1)]).astype(float)


# ---------------------------------------------------------------------------
# case a1: (SU(n+1), U(n))


def family_a1(n: int, m: int, i: int) -> FamilyDescriptor:
    if n < 2:
        raise FamilyError(f"case a1 needs n >= 2, got n={n}")
    if not 1 <= i <= n - 1:
        raise FamilyError(f"case a1 needs 1 <= i <= n-1, got i={i}, n={n}")
    if m < 1:
        raise FamilyError(f"case a1 needs m >= 1, got m={m}")
    h = m / 2
    q0 = (m + 1) / (i - n)
    q1 = -(m + n - i + 1) / (i - n)
    psi = power_sum_matrix([
        [[(1.0, h + 0.5)], [(1.0, h)]],
        [[(1.0, h + 0.5)], [(q0, h), (q1, h + 1)]],
    ])
    T = np.diag([1.0, (n - i) / i])
    den = -n - m - 1 + i
    C = np.array([
        [(m + 1) * (-m - n - 2 + i) / den, (-n + i) / den],
        [-(m + 1) / den, (-m * m + 2 * i - 2 * n + m * i - 2 * m - m * n - 1) / den],
    ])
    U = np.array([[n + m + 2, 0], [-1, n + m + 3]], dtype=float)
    V = np.array([[0, 0], [0, n + m + 1 - i]], dtype=float)

    def F(y):
        y = _check_interior(y)
        out = np.zeros(y.shape + (2, 2))
        out[..., 0, 0] = (1 + m) * (1 + m + 2 * n) + (i - n) / (1 - y) - (1 + m) ** 2 / (4 * y)
        out[..., 0, 1] = i * np.sqrt(y) / (1 - y)
        out[..., 1, 0] = (i - n) * np.sqrt(y) / (1 - y)
        out[..., 1, 1] = m * (y * (m + 2 * n) - m) / (4 * y) - 4 * i * y / (1 - y)
        return out

    def F_corrected(y):
        # the displayed potential with the three entries that break T-symmetry repaired
        out = F(y)
        y = np.asarray(y, dtype=float)
        out[..., 0, 0] += -(1 + m) * (1 + m + 2 * n) * 3 / 4
        out[..., 1, 0] = (n - i) * np.sqrt(y) / (1 - y)
        out[..., 1, 1] += 3 * i * y / (1 - y)
        return out

    S, R, res = infer_SR(psi)
    return FamilyDescriptor(
        name="a1", params={"n": n, "m": m, "i": i}, N=2, alpha=float(n - 1), beta=0.0,
        psi0=psi, T=T, S=S, R=R, C=C, U=U, V=V, F=F, sr_residual=res,
        extra={"F_corrected": F_corrected},
    )


def a1_gauge(n: int, m: int, i: int, kappa: int) -> np.ndarray:
    """Constant ``A`` with ``W^{(n,m,i)}_kappa = A W^{(n+k,m+k,i+k)}_0 A^*``.

    ``A = [[1, 0], [c, 1 - c]]`` with ``c = k / (m + n - i + k + 1)``: the second
    row of ``psi0`` for the shifted parameters is this combination of the rows
    of ``y^(k/2) psi0`` for the original ones.
    """
    c = kappa / (m + n - i + kappa + 1)
    return np.array([[1.0, 0.0], [c, 1.0 - c]])


# ---------------------------------------------------------------------------
# case c1: (Sp(2n), Sp(2n-2) x Sp(2))


def family_c1(n: int) -> FamilyDescriptor:
    if n < 3:
        raise FamilyError(f"case c1 needs n >= 3, got n={n}")
    psi = power_sum_matrix([
        [[(1.0, 0.5)], [(1.0, 0.0)]],
        [[(1.0, 0.5)], [(-1 / (n - 2), 0.0), ((n - 1) / (n - 2), 1.0)]],
    ])
    T = np.diag([1.0, n - 2.0])
    C = np.array([[(2 * n - 1) / (n - 1), (n - 2) / (n - 1)],
                  [1 / (n - 1), (3 * n - 4) / (n - 1)]])
    U = np.array([[2 * n + 1, 0], [-1, 2 * n + 2]], dtype=float)
    V = np.array([[0, 0], [0, 2 * n - 2]], dtype=float)

    def F(y):
        y = _check_interior(y)
        out = np.zeros(y.shape + (2, 2))
        out[..., 0, 0] = (4 * y * y * n + 4 * y * n - y * y - 18 * y + 3) / (4 * y * (y - 1))
        out[..., 0, 1] = -2 * np.sqrt(y) / (y - 1)
        out[..., 1, 0] = -2 * np.sqrt(y) * (n - 2) / (y - 1)
        out[..., 1, 1] = 2 * y / (y - 1)
        return out

    S, R, res = infer_SR(psi)
    return FamilyDescriptor(
        name="c1", params={"n": n}, N=2, alpha=float(2 * n - 3), beta=1.0,
        psi0=psi, T=T, S=S, R=R, C=C, U=U, V=V, F=F, sr_residual=res,
    )


def c1_gamma_closed(n: int, kappa: float) -> tuple[MatPoly, MatPoly]:
    """Closed forms of the degree-two and degree-one shift polynomials for case c1."""
    k = kappa
    den = (3 + k) * (n - 1)
    g2 = [np.zeros((2, 2)),
          np.array([[(k * n - 1 + 2 * n - k) / den, 1 / den],
                    [(n - 2) / den, (k * n + 3 * n - 4 - k) / den]]),
          np.array([[-1.0, -1 / (3 + k)], [0.0, -(2 + k) / (3 + k)]])]
    g1 = [np.array([[(-3 - k * k + 6 * n - 2 * k + 4 * k * n + k * k * n) / den, (3 + 2 * k) / den],
                    [(n - 2) * (2 * n + 1 + 2 * k) / den,
                     (k * k * n + 7 * n + 6 * k * n - 8 * k - 10 - k * k) / den]]),
          np.array([[-2 * n - 1 - 2 * k, -(1 + k) / (3 + k)],
                    [0.0, -2 * (2 + k) * (k + n + 1) / (3 + k)]])]
    return MatPoly(np.array(g2, dtype=complex)), MatPoly(np.array(g1, dtype=complex))


def c1_wpol_closed(n: int, kappa: float, y) -> np.ndarray:
    """Closed form of the polynomial part of the deformed c1 weight (``T_00 = 2`` scaling)."""
    y = np.asarray(y, dtype=float)
    k = kappa
    out = np.zeros(y.shape + (2, 2))
    out[..., 0, 0] = 2 * (2 * y + y * k + 2 * n - 4) / (2 + k)
    out[..., 0, 1] = out[..., 1, 0] = 2 * (2 * y * n - 2 + y * k) / (2 + k)
    out[..., 1, 1] = 2 * (2 * y * y * n * n - 4 * y * y * n - 2 * y * n + k * y * n + 2 * y * y
                          - 2 * y * k + 2) / ((2 + k) * (n - 2))
    return out


PRINTED = "printed"
CORRECTED = "corrected"


def su2_gamma2_closed(ell, nu: float, y, variant: str = PRINTED) -> np.ndarray:
    """Closed form of the su2 degree-two shift polynomial between ``T(nu)`` and ``T(nu + 1)``.

    The banded matrix polynomial in ``1 - 2y`` is divided by its prefactor.
    ``variant="printed"`` uses the prefactor ``4 k (k + 2l) / l^2`` with
    ``k = nu - 1`` and the term ``-4y(1-y)(l+nu)^2/l^2``;
    ``variant="corrected"`` uses ``4 nu (nu + 2l) / l^2`` and ``+4y(1-y)(l+nu)^2/l^2``,
    which is what the fitted polynomial satisfies.
    """
    ell = _as_half_integer(ell)
    N = int(2 * ell)
    L = float(ell)
    y = np.asarray(y, dtype=float)
    x = 1 - 2 * y
    n = N + 1
    out = np.zeros(y.shape + (n, n))
    sign = -1.0 if variant == PRINTED else 1.0
    for i in range(n):
        out[..., i, i] = (x * x * (L - i) ** 2 / L ** 2 + sign * 4 * y * (1 - y) * (L + nu) ** 2 / L ** 2
                          + (-i * (N - i + 1) - (N - i) * (i + 1)) / (4 * L ** 2))
        if i >= 1:
            out[..., i, i - 1] = x * (i - 1 - N) * (N - 2 * i + 1) / (2 * L ** 2)
        if i + 1 < n:
            out[..., i, i + 1] = x * (i + 1) * (N - 2 * i - 1) / (2 * L ** 2)
        if i >= 2:
            out[..., i, i - 2] = (N - i + 2) * (N - i + 1) / (4 * L ** 2)
        if i + 2 < n:
            out[..., i, i + 2] = (i + 2) * (i + 1) / (4 * L ** 2)
    if variant == PRINTED:
        k = nu - 1
        scale = 4 * k * (k + 2 * L) / L ** 2
    elif variant == CORRECTED:
        scale = 4 * nu * (nu + 2 * L) / L ** 2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if scale == 0:
        # the prefactor vanishes: no finite polynomial satisfies the display
        return np.full(out.shape, np.nan)
    return out / scale


def su2_deformed_F_closed(ell, nu: float, y) -> np.ndarray:
    """Closed form of the su2 potential at deformation ``nu - 1`` built from the Krawtchouk ``S``."""
    fam = family_su2(ell)
    L = float(_as_half_integer(ell))
    y = _check_interior(y)
    I = np.eye(fam.N)
    Sh = fam.extra["S_tridiag"].T
    k = nu - 1
    lin = Sh - L * I + 2 * L * y[..., None, None] * I
    return fam.F(y) - k * (2 * L + nu + 1) * I + (k * (1 - 2 * y) / (2 * y * (1 - y)))[..., None, None] * lin


# ---------------------------------------------------------------------------
# scalar Jacobi reference family


def family_scalar_jacobi(alpha: float, beta: float) -> FamilyDescriptor:
    if alpha <= -1 or beta <= -1:
        raise FamilyError(f"non-integrable exponents alpha={alpha}, beta={beta}")

    def psi(y, order: int = 0):
        y = np.asarray(y, dtype=float)
        val = 1.0 if order == 0 else 0.0
        return np.full(y.shape + (1, 1), val, dtype=complex)

    def F(y):
        y = np.asarray(y, dtype=float)
        return np.zeros(y.shape + (1, 1))

    S, R, res = infer_SR(psi)
    return FamilyDescriptor(
        name="jacobi", params={"alpha": alpha, "beta": beta}, N=1,
        alpha=float(alpha), beta=float(beta), psi0=psi, T=np.eye(1),
        S=S, R=R, C=np.array([[beta + 1.0]]), U=np.array([[alpha + beta + 2.0]]),
        V=np.zeros((1, 1)), F=F, sr_residual=res,
    )


def make_family(name: str, **params) -> FamilyDescriptor:
    """Dispatch by family name (``su2``, ``a1``, ``c1``, ``jacobi``)."""
    if name == "su2":
        return family_su2(params["ell"])
    if name == "a1":
        return family_a1(int(params["n"]), int(params["m"]), int(params["i"]))
    if name == "c1":
        return family_c1(int(params["n"]))
    if name == "jacobi":
        return family_scalar_jacobi(float(params["alpha"]), float(params["beta"]))
    raise FamilyError(f"unknown family {name!r}")
