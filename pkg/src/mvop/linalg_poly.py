"""Matrix-coefficient polynomials in one real variable.

A :class:`MatPoly` stores ``coeffs[k]`` as the coefficient of ``y**k``; all
coefficients are square complex matrices of one size. :class:`WeightedMatPoly`
represents ``y**a * (1-y)**b * P(y)`` on (0, 1) and is closed under
differentiation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

Matrix = np.ndarray

# relative threshold used to trim trailing coefficients and detect factors
TRIM_TOL = 1e-13


def _as_coeffs(coeffs) -> np.ndarray:
    arr = np.array(coeffs, dtype=complex)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"coefficients must be a stack of square matrices, got shape {arr.shape}")
    return arr


def _trim(arr: np.ndarray) -> np.ndarray:
    # exact zeros only; numerical noise is left to the caller
    k = arr.shape[0]
    while k > 0 and not np.any(arr[k - 1]):
        k -= 1
    return arr[:k]


@dataclass(frozen=True, eq=False)
class MatPoly:
    """Polynomial ``sum_k coeffs[k] y**k`` with ``n x n`` complex coefficients."""

    coeffs: np.ndarray

    # make ``ndarray * MatPoly`` reach __rmul__ instead of broadcasting
    __array_ufunc__ = None

    def __post_init__(self):
        arr = _trim(_as_coeffs(self.coeffs)).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "MatPoly":
        return cls(np.zeros((0, n, n), dtype=complex))

    @classmethod
    def constant(cls, m) -> "MatPoly":
        m = np.atleast_2d(np.asarray(m, dtype=complex))
        return cls(m[None])

    @classmethod
    def identity(cls, n: int) -> "MatPoly":
        return cls.constant(np.eye(n))

    @classmethod
    def monomial(cls, k: int, m) -> "MatPoly":
        """``m * y**k``."""
        m = np.atleast_2d(np.asarray(m, dtype=complex))
        arr = np.zeros((k + 1,) + m.shape, dtype=complex)
        arr[k] = m
        return cls(arr)

    @classmethod
    def from_scalar_coeffs(cls, c: Sequence[complex], n: int = 1) -> "MatPoly":
        """Scalar polynomial times the ``n x n`` identity."""
        c = np.asarray(c, dtype=complex)
        return cls(c[:, None, None] * np.eye(n)[None])

    # -- basic properties ---------------------------------------------------
    @property
    def size(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def leading(self) -> Matrix:
        if self.degree < 0:
            return np.zeros((self.size, self.size), dtype=complex)
        return self.coeffs[-1].copy()

    def coeff(self, k: int) -> Matrix:
        if 0 <= k <= self.degree:
            return self.coeffs[k].copy()
        return np.zeros((self.size, self.size), dtype=complex)

    def padded(self, length: int) -> np.ndarray:
        """Coefficient stack zero-padded to ``length`` entries."""
        out = np.zeros((max(length, self.degree + 1), self.size, self.size), dtype=complex)
        out[: self.degree + 1] = self.coeffs
        return out

    def trimmed(self, tol: float = TRIM_TOL) -> "MatPoly":
        """Drop trailing coefficients below ``tol`` relative to the largest one."""
        if self.degree < 0:
            return self
        scale = np.max(np.abs(self.coeffs))
        arr = self.coeffs
        k = arr.shape[0]
        while k > 0 and np.max(np.abs(arr[k - 1])) <= tol * scale:
            k -= 1
        return MatPoly(arr[:k].copy() if k else np.zeros((0, self.size, self.size)))

    # -- evaluation ---------------------------------------------------------
    def __call__(self, y) -> Matrix:
        return matpoly_eval(self, y)

    # -- algebra ------------------------------------------------------------
    def _check(self, other: "MatPoly"):
        if self.size != other.size:
            raise ValueError(f"size mismatch: {self.size} vs {other.size}")

    def __add__(self, other: "MatPoly") -> "MatPoly":
        self._check(other)
        n = max(self.degree, other.degree) + 1
        return MatPoly(self.padded(n) + other.padded(n))

    def __neg__(self) -> "MatPoly":
        return MatPoly(-self.coeffs)

    def __sub__(self, other: "MatPoly") -> "MatPoly":
        return self + (-other)

    def __mul__(self, other) -> "MatPoly":
        if isinstance(other, MatPoly):
            self._check(other)
            if self.degree < 0 or other.degree < 0:
                return MatPoly.zero(self.size)
            out = np.zeros((self.degree + other.degree + 1, self.size, self.size), dtype=complex)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a @ b
            return MatPoly(out)
        other = np.asarray(other, dtype=complex)
        if other.ndim == 0:
            return MatPoly(self.coeffs * other)
        return MatPoly(self.coeffs @ other)

    def __rmul__(self, other) -> "MatPoly":
        other = np.asarray(other, dtype=complex)
        if other.ndim == 0:
            return MatPoly(self.coeffs * other)
        return MatPoly(other @ self.coeffs)

    def scale(self, c: complex) -> "MatPoly":
        return MatPoly(self.coeffs * c)

    def times_y(self) -> "MatPoly":
        n = self.size
        return MatPoly(np.concatenate([np.zeros((1, n, n)), self.coeffs]))

    def adjoint(self) -> "MatPoly":
        """Entrywise conjugate transpose of every coefficient (``y`` is real)."""
        return MatPoly(np.conj(np.transpose(self.coeffs, (0, 2, 1))))

    def derivative(self, order: int = 1) -> "MatPoly":
        return matpoly_derivative(self, order)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.degree >= 0 else 0.0

    def distance(self, other: "MatPoly") -> float:
        """Largest coefficient-wise deviation."""
        return (self - other).max_abs()

    def __repr__(self) -> str:
        return f"MatPoly(size={self.size}, degree={self.degree})"

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "size": self.size,
            "coeffs": [
                [[[float(z.real), float(z.imag)] for z in row] for row in c]
                for c in self.coeffs
            ],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "MatPoly":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["size"])
        raw = data["coeffs"]
        arr = np.zeros((len(raw), n, n), dtype=complex)
        for k, c in enumerate(raw):
            for i, row in enumerate(c):
                for j, (re, im) in enumerate(row):
                    arr[k, i, j] = complex(re, im)
        return cls(arr)


def matpoly_eval(P: MatPoly, y) -> Matrix:
    """Horner evaluation at a real point (or an array of points).

    The recursion runs in extended precision and is rounded once at the end,
    so values near a cancellation of large monomial terms keep full double
    accuracy.
    """
    y = np.asarray(y, dtype=float)
    n = P.size
    if P.degree < 0:
        return np.zeros(y.shape + (n, n), dtype=complex)
    yl = y.astype(np.longdouble)[..., None, None]
    coeffs = P.coeffs.astype(np.clongdouble)
    out = np.broadcast_to(coeffs[-1], y.shape + (n, n)).copy()
    for c in coeffs[-2::-1]:
        out = out * yl + c
    return out.astype(complex)


def matpoly_derivative(P: MatPoly, order: int = 1) -> MatPoly:
    arr = P.coeffs
    for _ in range(order):
        if arr.shape[0] <= 1:
            return MatPoly.zero(P.size)
        k = np.arange(1, arr.shape[0])
        arr = arr[1:] * k[:, None, None]
    return MatPoly(arr)


def scalar_poly(c: Sequence[float], n: int) -> MatPoly:
    """Shorthand for ``(c0 + c1 y + ...) * I_n``."""
    return MatPoly.from_scalar_coeffs(c, n)


# ---------------------------------------------------------------------------
# weighted polynomials


@dataclass(frozen=True, eq=False)
class WeightedMatPoly:
    """``y**a (1-y)**b P(y)`` on (0, 1)."""

    a: float
    b: float
    P: MatPoly

    def __call__(self, y) -> Matrix:
        y = np.asarray(y, dtype=float)
        w = y ** self.a * (1.0 - y) ** self.b
        return w[..., None, None] * self.P(y)

    def derivative(self) -> "WeightedMatPoly":
        return weighted_derivative(self)

    def simplify(self, tol: float = TRIM_TOL) -> "WeightedMatPoly":
        return simplify_weighted(self, tol)


def weighted_derivative(W: WeightedMatPoly) -> WeightedMatPoly:
    """Exact derivative: ``(a-1, b-1, (a(1-y) - b y) P + y(1-y) P')``."""
    n = W.P.size
    lin = scalar_poly([W.a, -(W.a + W.b)], n)
    quad = scalar_poly([0.0, 1.0, -1.0], n)
    Q = lin * W.P + quad * W.P.derivative()
    return WeightedMatPoly(W.a - 1, W.b - 1, Q)


def _divide_linear(P: MatPoly, root: float, lead: float, tol: float):
    """Divide ``P`` by ``lead*(y - root)``; ``None`` unless the remainder vanishes."""
    if P.degree < 1:
        return None
    scale = max(P.max_abs(), 1e-300)
    rem = P(root)
    if np.max(np.abs(rem)) > tol * scale:
        return None
    # synthetic division
    d = P.degree
    q = np.zeros((d, P.size, P.size), dtype=complex)
    acc = P.coeffs[d].copy()
    for k in range(d - 1, -1, -1):
        q[k] = acc
        acc = P.coeffs[k] + root * acc
    return MatPoly(q / lead)


def simplify_weighted(W: WeightedMatPoly, tol: float = TRIM_TOL) -> WeightedMatPoly:
    """Move factors ``y`` and ``1-y`` of the polynomial part into the exponents."""
    a, b, P = W.a, W.b, W.P
    while True:
        q = _divide_linear(P, 0.0, 1.0, tol)
        if q is None:
            break
        P, a = q, a + 1
    while True:
        q = _divide_linear(P, 1.0, -1.0, tol)
        if q is None:
            break
        P, b = q, b + 1
    return WeightedMatPoly(a, b, P)


# ---------------------------------------------------------------------------
# fitting


def chebyshev_nodes(count: int, lo: float = 0.1, hi: float = 0.9) -> np.ndarray:
    """Chebyshev points of the first kind mapped to ``[lo, hi]``, increasing."""
    k = np.arange(count)
    x = np.cos((2 * k + 1) * np.pi / (2 * count))[::-1]
    return lo + (hi - lo) * (x + 1) / 2


def fit_nodes(degree: int, lo: float = 0.1, hi: float = 0.9, holdout: int = 10):
    """Interpolation nodes and interleaved holdout nodes for a degree-``degree`` fit.

    The fit uses ``degree + 1`` Chebyshev points; the holdout points are the
    Chebyshev points of a different count, so they never coincide with them.
    """
    nodes = chebyshev_nodes(degree + 1, lo, hi)
    hold = chebyshev_nodes(holdout + (1 if holdout == degree + 1 else 0), lo, hi)
    hold = hold[np.min(np.abs(hold[:, None] - nodes[None, :]), axis=1) > 1e-9]
    return nodes, hold


def fit_matpoly(samples: Sequence[tuple[float, Matrix]], degree: int,
                holdout: Sequence[tuple[float, Matrix]] = ()) -> tuple[MatPoly, float]:
    """Entrywise interpolation through ``samples`` plus holdout deviation.

    With more than ``degree + 1`` samples this is a least-squares fit. Returns
    the polynomial and the maximum entrywise deviation on ``holdout`` (0.0 if
    there is no holdout).
    """
    ys = np.array([s[0] for s in samples], dtype=float)
    if len(np.unique(ys)) != len(ys):
        raise ValueError("duplicate interpolation nodes")
    if len(ys) < degree + 1:
        raise ValueError(f"need at least {degree + 1} samples for degree {degree}")
    vals = np.array([np.atleast_2d(s[1]) for s in samples], dtype=complex)
    n = vals.shape[1]
    # shift/scale the variable for conditioning, then convert back exactly
    c, h = (ys.max() + ys.min()) / 2, (ys.max() - ys.min()) / 2 or 1.0
    t = (ys - c) / h
    V = np.vander(t, degree + 1, increasing=True)
    sol, *_ = np.linalg.lstsq(V, vals.reshape(len(ys), -1), rcond=None)
    tc = sol.reshape(degree + 1, n, n)
    # expand sum_k tc[k] ((y-c)/h)^k in powers of y
    coeffs = np.zeros_like(tc)
    basis = np.array([1.0])
    for k in range(degree + 1):
        if k:
            basis = np.convolve(basis, [-c / h, 1.0 / h])
        coeffs[: k + 1] += basis[:, None, None] * tc[k]
    P = MatPoly(coeffs)
    resid = 0.0
    if len(holdout):
        hy = np.array([s[0] for s in holdout], dtype=float)
        hv = np.array([np.atleast_2d(s[1]) for s in holdout], dtype=complex)
        resid = float(np.max(np.abs(P(hy) - hv)))
    return P, resid


def fit_function(func: Callable[[float], Matrix], degree: int, lo: float = 0.1,
                 hi: float = 0.9, holdout: int = 10, relative: bool = True) -> tuple[MatPoly, float]:
    """Fit ``func`` on Chebyshev nodes; residual is relative to the sample scale by default."""
    nodes, hold = fit_nodes(degree, lo, hi, holdout)
    samples = [(y, func(y)) for y in nodes]
    held = [(y, func(y)) for y in hold]
    P, resid = fit_matpoly(samples, degree, held)
    if relative:
        scale = max(np.max(np.abs(s[1])) for s in samples + held)
        resid /= max(scale, 1e-300)
    return P, resid


def fit_function_auto(func: Callable[[float], Matrix], max_degree: int = 14,
                      tol: float = 1e-10, **kw) -> tuple[MatPoly, float]:
    """Smallest degree whose holdout residual is below ``tol``.

    Returns the best attempt (highest degree tried) when nothing passes.
    """
    best = None
    for d in range(max_degree + 1):
        P, r = fit_function(func, d, **kw)
        if r < tol:
            return P.trimmed(1e-12), r
        best = (P, r)
    return best
