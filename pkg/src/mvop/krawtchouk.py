"""Exact Krawtchouk polynomials at p = 1/2 and the identities built on them.

Everything here is rational arithmetic on :class:`fractions.Fraction`; no
check carries a tolerance. ``two_ell`` is the integer ``N = 2*ell``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

Rational = Fraction
RMatrix = list[list[Fraction]]


def fmt(q: Fraction) -> str:
    """``p/q`` string form used in reports."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@lru_cache(maxsize=None)
def krawtchouk(n: int, x: int, N: int) -> Fraction:
    """``K_n(x; 1/2, N) = 2F1(-n, -x; -N; 2)``, terminating at ``min(n, x)``."""
    if n < 0 or n > N:
        raise ValueError(f"degree n={n} outside 0..{N}")
    total = Fraction(0)
    term = Fraction(1)
    top = n if x < 0 else min(n, x)
    for k in range(top + 1):
        if k:
            # ratio of consecutive terms of the hypergeometric sum
            term *= Fraction((-n + k - 1) * (-x + k - 1) * 2, (-N + k - 1) * k)
        total += term
    return total


def _zeros(n: int) -> RMatrix:
    return [[Fraction(0)] * n for _ in range(n)]


def _eye(n: int) -> RMatrix:
    m = _zeros(n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def matmul(A: RMatrix, B: RMatrix) -> RMatrix:
    n, k, m = len(A), len(B), len(B[0])
    return [[sum((A[i][t] * B[t][j] for t in range(k)), Fraction(0)) for j in range(m)]
            for i in range(n)]


def diag(values) -> RMatrix:
    m = _zeros(len(values))
    for i, v in enumerate(values):
        m[i][i] = Fraction(v)
    return m


@dataclass(frozen=True)
class KrawtchoukKernel:
    two_ell: int
    K: RMatrix
    M: RMatrix
    Kinv: RMatrix

    @property
    def ell(self) -> Fraction:
        return Fraction(self.two_ell, 2)

    def as_float(self):
        import numpy as np
        return np.array([[float(v) for v in row] for row in self.K])


def build_kernel(two_ell: int) -> KrawtchoukKernel:
    """``K[i][j] = K_j(i)``, ``M = diag(binom(N, j))``, ``K^{-1} = 2^{-N} M K M``."""
    if two_ell < 0:
        raise ValueError("two_ell must be nonnegative")
    N = two_ell
    K = [[krawtchouk(j, i, N) for j in range(N + 1)] for i in range(N + 1)]
    M = diag([comb(N, j) for j in range(N + 1)])
    MKM = matmul(matmul(M, K), M)
    Kinv = [[v / 2 ** N for v in row] for row in MKM]
    if matmul(K, Kinv) != _eye(N + 1):
        raise ArithmeticError(f"closed-form inverse failed for 2l={N}")
    return KrawtchoukKernel(N, K, M, Kinv)


def s_matrix(two_ell: int) -> RMatrix:
    """Tridiagonal ``S`` with ``S[i][i-1] = i/2`` and ``S[i][i+1] = (2l - i)/2``."""
    N = two_ell
    S = _zeros(N + 1)
    for i in range(N + 1):
        if i >= 1:
            S[i][i - 1] = Fraction(i, 2)
        if i < N:
            S[i][i + 1] = Fraction(N - i, 2)
    return S


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    """Outcome of an exhaustive exact check."""

    name: str
    two_ell: int
    checked: int = 0
    failures: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, identity: str, indices: tuple, lhs: Fraction, rhs: Fraction):
        self.checked += 1
        if lhs != rhs:
            self.failures.append({"identity": identity, "indices": list(indices),
                                  "status": "fail", "lhs": fmt(lhs), "rhs": fmt(rhs)})

    def to_json(self) -> dict:
        return {"identity": self.name, "two_ell": self.two_ell, "checked": self.checked,
                "status": "pass" if self.ok else "fail", "failures": self.failures,
                **({"notes": self.notes} if self.notes else {})}


def _band_i(k: int, j: int, N: int) -> Fraction:
    ell = Fraction(N, 2)
    if j == k + 1:
        return Fraction(-(k + 1), 2)
    if j == k:
        return ell
    if j == k - 1:
        return Fraction(-(N - k + 1), 2)
    return Fraction(0)


def _band_i2(k: int, j: int, N: int) -> Fraction:
    ell = Fraction(N, 2)
    if j == k + 2:
        return Fraction((k + 1) * (k + 2), 4)
    if j == k + 1:
        return -ell * (k + 1)
    if j == k:
        return ell * (ell + Fraction(1, 2)) + k * (ell - Fraction(k, 2))
    if j == k - 1:
        return -ell * (N - k + 1)
    if j == k - 2:
        return Fraction((N - k + 1) * (N - k + 2), 4)
    return Fraction(0)


def verify_orthogonality_identities(two_ell: int) -> Report:
    """Orthogonality and the sums weighted by ``i`` and ``i**2``."""
    N = two_ell
    rep = Report("orthogonality", N)
    K = lambda n, x: krawtchouk(n, x, N)
    for n in range(N + 1):
        for m in range(N + 1):
            pref = Fraction(2 ** N, comb(N, n))
            s0 = sum((comb(N, i) * K(n, i) * K(m, i) for i in range(N + 1)), Fraction(0))
            rep.record("ortho_K", (n, m), s0, pref if n == m else Fraction(0))
            s1 = sum((comb(N, i) * i * K(n, i) * K(m, i) for i in range(N + 1)), Fraction(0))
            rep.record("ortho_K_i", (n, m), s1, pref * _band_i(n, m, N))
            s2 = sum((comb(N, i) * i * i * K(n, i) * K(m, i) for i in range(N + 1)), Fraction(0))
            rep.record("ortho_K_i2", (n, m), s2, pref * _band_i2(n, m, N))
    return rep


def _term(coef: Fraction, n: int, x: int, N: int) -> Fraction:
    # out-of-range degrees only ever appear with a vanishing prefactor
    if coef == 0:
        return Fraction(0)
    return coef * krawtchouk(n, x, N)


def verify_recurrences(two_ell: int) -> Report:
    """Both contiguous relations, the three-term recurrence, and their sum."""
    N = two_ell
    ell = Fraction(N, 2)
    rep = Report("recurrences", N)
    half = Fraction(1, 2)
    for i in range(N + 1):
        for k in range(N + 1):
            up = _term(Fraction(N - k) * half, k + 1, i, N)
            mid = _term(ell - k, k, i, N)
            down = _term(Fraction(k) * half, k - 1, i, N)
            lhs1 = _term(Fraction(N - i), k, i + 1, N) if i < N else Fraction(0)
            rep.record("diff_Krawt1", (i, k), lhs1, up + mid - down)
            lhs2 = _term(Fraction(i), k, i - 1, N) if i > 0 else Fraction(0)
            rep.record("diff_Krawt2", (i, k), lhs2, -up + mid + down)
            lhs3 = -i * krawtchouk(k, i, N)
            rhs3 = up - Fraction(N, 2) * krawtchouk(k, i, N) + down
            rep.record("three-term_K", (i, k), lhs3, rhs3)
            # the two contiguous relations add up to the difference equation
            rep.record("sum_diff_equals_difference_eq", (i, k), lhs1 + lhs2,
                       2 * mid)
    return rep


def verify_inverse(two_ell: int) -> Report:
    rep = Report("inverse", two_ell)
    ker = build_kernel(two_ell)
    prod = matmul(ker.K, ker.Kinv)
    eye = _eye(two_ell + 1)
    for i in range(two_ell + 1):
        for j in range(two_ell + 1):
            rep.record("K_Kinv", (i, j), prod[i][j], eye[i][j])
    return rep


def verify_duality(two_ell: int) -> Report:
    """Self-duality ``K_j(i) = K_i(j)`` of the p = 1/2 hypergeometric form."""
    N = two_ell
    rep = Report("duality", N)
    for i in range(N + 1):
        for j in range(N + 1):
            rep.record("self_dual", (i, j), krawtchouk(j, i, N), krawtchouk(i, j, N))
    return rep


def check_S_diagonalization(two_ell: int) -> Report:
    """Column ``j`` of ``K`` is an eigenvector of ``S`` with eigenvalue ``l - j``.

    Equivalently ``S K = K diag(l, l-1, ..., -l)`` (the diagonal acts on the
    columns). The report notes also record whether the row-scaling form
    ``S K = diag(-l, ..., l) K`` holds, which it does not for ``2l >= 1``.
    """
    N = two_ell
    ell = Fraction(N, 2)
    rep = Report("S_diagonalization", N)
    ker = build_kernel(N)
    S = s_matrix(N)
    SK = matmul(S, ker.K)
    cols = matmul(ker.K, diag([ell - j for j in range(N + 1)]))
    for i in range(N + 1):
        for j in range(N + 1):
            rep.record("S_K_column_eigen", (i, j), SK[i][j], cols[i][j])
    rows = matmul(diag([-ell + j for j in range(N + 1)]), ker.K)
    rep.notes["row_scaling_form_holds"] = rows == SK
    rep.notes["eigenvalues"] = [fmt(ell - j) for j in range(N + 1)]
    return rep


def t_su2(two_ell: int, nu: Fraction) -> list[Fraction]:
    """Diagonal of the deformed su2 weight constant, ``binom(2l,i) (nu)_i / (nu+2l-i)_i``.

    The formula is applied for ``i <= floor(l)`` and mirrored.
    """
    N = two_ell
    nu = Fraction(nu)

    def poch(a, k):
        out = Fraction(1)
        for t in range(k):
            out *= a + t
        return out

    out = []
    for i in range(N + 1):
        j = min(i, N - i)
        out.append(comb(N, j) * poch(nu, j) / poch(nu + N - j, j))
    return out


def verify_delta(two_ell: int, nu: Fraction) -> Report:
    """Banded form of ``2^{-2l} M K M T(nu)^{-1} T(nu+1) K`` used for the su2 shift."""
    N = two_ell
    ell = Fraction(N, 2)
    nu = Fraction(nu)
    rep = Report("delta", N)
    ker = build_kernel(N)
    t0, t1 = t_su2(N, nu), t_su2(N, nu + 1)
    ratio = diag([b / a for a, b in zip(t0, t1)])
    delta = matmul(matmul(ker.Kinv, ratio), ker.K)
    scale = nu * (nu + 2 * ell)
    for k in range(N + 1):
        for j in range(N + 1):
            if j == k + 2:
                rhs = -Fraction((k + 1) * (k + 2), 4)
            elif j == k:
                rhs = ell * (ell - Fraction(1, 2)) + k * (Fraction(k, 2) - ell) + scale
            elif j == k - 2:
                rhs = -Fraction((N - k + 1) * (N - k + 2), 4)
            else:
                rhs = Fraction(0)
            rep.record("delta_band", (k, j), scale * delta[k][j], rhs)
    return rep


def run_all(two_ell: int) -> list[Report]:
    return [verify_orthogonality_identities(two_ell), verify_recurrences(two_ell),
            verify_inverse(two_ell), verify_duality(two_ell),
            check_S_diagonalization(two_ell)]
