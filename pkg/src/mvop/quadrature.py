"""Gauss-Jacobi quadrature on [0, 1] for the weight ``y**beta (1-y)**alpha``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln

from .linalg_poly import MatPoly


@dataclass(frozen=True)
class QuadRule:
    alpha: float
    beta: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """``sum_i w_i f(y_i)`` for a vectorised integrand."""
        vals = np.asarray(f(self.nodes))
        return np.tensordot(self.weights, vals, axes=(0, 0))

    def to_csv(self) -> str:
        lines = ["node,weight"]
        lines += [f"{float(y)!r},{float(w)!r}" for y, w in zip(self.nodes, self.weights)]
        return "\n".join(lines) + "\n"


def jacobi_recurrence(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Monic recurrence coefficients for the weight ``(1-x)**a (1+x)**b`` on [-1, 1].

    Returns the diagonal (length ``n``) and off-diagonal (length ``n - 1``) of
    the symmetric Jacobi matrix.
    """
    return _jacobi_recurrence(a, b, n, float)


def _jacobi_recurrence(a, b, n: int, dtype) -> tuple[np.ndarray, np.ndarray]:
    a, b = dtype(a), dtype(b)
    k = np.arange(n, dtype=dtype)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    if n:
        diag[0] = (b - a) / (a + b + 2)
    k = np.arange(1, n, dtype=dtype)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1) * (s - 1))
    if n > 1:
        # k = 1 with a + b = -1 makes (s - 1) vanish together with (k + a + b)
        s1 = 2 + a + b
        off2[0] = 4 * (1 + a) * (1 + b) / (s1 * s1 * (s1 + 1))
    return diag, np.sqrt(off2)


def gauss_jacobi_rule(alpha: float, beta: float, order: int) -> QuadRule:
    """Golub-Welsch nodes and weights for ``y**beta (1-y)**alpha`` on [0, 1]."""
    if alpha <= -1 or beta <= -1:
        raise ValueError(f"non-integrable exponents alpha={alpha}, beta={beta}")
    if order < 1:
        raise ValueError("order must be positive")
    # y = (1 + x)/2 maps (1-x)^alpha (1+x)^beta onto (1-y)^alpha y^beta
    diag, off = jacobi_recurrence(alpha, beta, order)
    if order == 1:
        x, vecs = diag.copy(), np.ones((1, 1))
    else:
        x, vecs = eigh_tridiagonal(diag, off)
    mass = math.exp(betaln(beta + 1, alpha + 1))
    if order == 1:
        w = mass * vecs[0] ** 2
    else:
        x, w = _refine(alpha, beta, order, x, mass)
    y = (1 + x) / 2
    order_idx = np.argsort(y)
    return QuadRule(float(alpha), float(beta), y[order_idx], w[order_idx])


def _refine(alpha: float, beta: float, order: int, x: np.ndarray, mass: float):
    """Newton step on the nodes and Christoffel-sum weights, in extended precision.

    Eigenvector weights lose a few digits to the eigensolver; evaluating the
    orthonormal polynomials by their recurrence at the refined node and using
    ``w = 1 / sum_k p_k(x)^2`` restores them to near rounding level.
    """
    ld = np.longdouble
    diag, off = _jacobi_recurrence(alpha, beta, order, ld)

    def orthonormal(x):
        p_prev, p = np.zeros_like(x), np.full_like(x, 1 / np.sqrt(ld(mass)))
        dp_prev, dp = np.zeros_like(x), np.zeros_like(x)
        total = p * p
        for k in range(order):
            b_next = off[k] if k + 1 < order else ld(1)
            b_k = off[k - 1] if k else ld(0)
            p_next = ((x - diag[k]) * p - b_k * p_prev) / b_next
            dp_next = (p + (x - diag[k]) * dp - b_k * dp_prev) / b_next
            p_prev, p, dp_prev, dp = p, p_next, dp, dp_next
            if k + 1 < order:
                total = total + p * p
        return p, dp, total

    xl = x.astype(ld)
    p, dp, _ = orthonormal(xl)
    xl = xl - p / dp
    _, _, total = orthonormal(xl)
    return xl.astype(float), (1 / total).astype(float)


def default_order(d_max: int, wpol_degree: int) -> int:
    """Order policy for engine computations (exact with margin)."""
    return max(20, d_max + math.ceil(wpol_degree / 2) + 5)


def matrix_inner_product(P: MatPoly, Q: MatPoly, wpol, rule: QuadRule) -> np.ndarray:
    """``sum_i w_i P(y_i) Wpol(y_i) Q(y_i)^*``.

    ``wpol`` is a :class:`MatPoly`, a callable returning the stack of matrices
    at an array of nodes, or a precomputed stack of shape ``(order, n, n)``.
    """
    if P.size != Q.size:
        raise ValueError(f"size mismatch: {P.size} vs {Q.size}")
    if isinstance(wpol, np.ndarray):
        Wn = wpol
    else:
        Wn = wpol(rule.nodes)
    if Wn.shape[-1] != P.size:
        raise ValueError("weight size does not match polynomial size")
    Pn = P(rule.nodes)
    Qn = Q(rule.nodes)
    terms = Pn @ Wn @ np.conj(np.transpose(Qn, (0, 2, 1)))
    return np.tensordot(rule.weights, terms, axes=(0, 0))
