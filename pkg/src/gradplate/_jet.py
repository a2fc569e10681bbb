"""Truncated multivariate Taylor arithmetic in the variables (Y1, Y2, t).

A :class:`Jet` stores the normalized Taylor coefficients
``c[i, j, k] = d^(i+j+k) f / (dY1^i dY2^j dt^k) / (i! j! k!)`` of an
array-valued function about a base point, truncated at a total degree.
Products, quotients and square roots of jets are exact up to the truncation
degree, so derivatives of composite kinematic quantities are obtained without
finite differences.

Coefficient arrays have shape ``(n_monomials, *value_shape)``.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

NVARS = 3
Y1, Y2, T = 0, 1, 2


@lru_cache(maxsize=None)
def monomials(degree: int) -> tuple[tuple[int, int, int], ...]:
    out = []
    for total in range(degree + 1):
        for i in range(total, -1, -1):
            for j in range(total - i, -1, -1):
                out.append((i, j, total - i - j))
    return tuple(out)


@lru_cache(maxsize=None)
def _index(degree: int) -> dict[tuple[int, int, int], int]:
    return {m: n for n, m in enumerate(monomials(degree))}


@lru_cache(maxsize=None)
def _product_plan(degree: int):
    """Pairs (p, q) contributing to each output monomial, sorted by output."""
    mons = monomials(degree)
    idx = _index(degree)
    triples = []
    for p, mp in enumerate(mons):
        for q, mq in enumerate(mons):
            r = (mp[0] + mq[0], mp[1] + mq[1], mp[2] + mq[2])
            if sum(r) <= degree:
                triples.append((idx[r], p, q))
    triples.sort()
    r_idx = np.array([t[0] for t in triples])
    p_idx = np.array([t[1] for t in triples])
    q_idx = np.array([t[2] for t in triples])
    starts = np.searchsorted(r_idx, np.arange(len(mons)))
    return p_idx, q_idx, starts


@lru_cache(maxsize=None)
def _diff_plan(degree: int, var: int):
    src = _index(degree)
    target = monomials(degree - 1)
    take = []
    scale = []
    for m in target:
        up = list(m)
        up[var] += 1
        take.append(src[tuple(up)])
        scale.append(up[var])
    return np.array(take), np.array(scale, dtype=float)


@lru_cache(maxsize=None)
def _truncate_plan(degree: int, new_degree: int):
    src = _index(degree)
    return np.array([src[m] for m in monomials(new_degree)])


def _bcast(scale, ndim):
    return scale.reshape((-1,) + (1,) * ndim)


def _pad(a: np.ndarray, b: np.ndarray):
    """Pad value axes so numpy broadcasting aligns the value shapes."""
    nd = max(a.ndim, b.ndim)
    a = a.reshape(a.shape[:1] + (1,) * (nd - a.ndim) + a.shape[1:])
    b = b.reshape(b.shape[:1] + (1,) * (nd - b.ndim) + b.shape[1:])
    return a, b


class Jet:
    __array_priority__ = 1000

    def __init__(self, coeffs, degree: int):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[0] != len(monomials(degree)):
            raise ValueError("coefficient count does not match degree")
        self.c = coeffs
        self.degree = degree

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, degree: int) -> Jet:
        value = np.asarray(value, dtype=float)
        c = np.zeros((len(monomials(degree)),) + value.shape)
        c[0] = value
        return cls(c, degree)

    @classmethod
    def from_derivatives(cls, deriv, degree: int, shape) -> Jet:
        """Build from a callable ``deriv(i, j, k)`` returning the raw partial."""
        mons = monomials(degree)
        c = np.empty((len(mons),) + tuple(shape))
        for n, (i, j, k) in enumerate(mons):
            c[n] = deriv(i, j, k) / (factorial(i) * factorial(j) * factorial(k))
        return cls(c, degree)

    # -- access -------------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[1:]

    def partial(self, i: int = 0, j: int = 0, k: int = 0) -> np.ndarray:
        """Raw partial derivative d^(i+j+k)/dY1^i dY2^j dt^k at the base point."""
        n = _index(self.degree)[(i, j, k)]
        return self.c[n] * (factorial(i) * factorial(j) * factorial(k))

    def diff(self, var: int) -> Jet:
        if self.degree == 0:
            raise ValueError("cannot differentiate a degree-0 jet")
        take, scale = _diff_plan(self.degree, var)
        return Jet(self.c[take] * _bcast(scale, self.c.ndim - 1), self.degree - 1)

    def truncate(self, degree: int) -> Jet:
        if degree == self.degree:
            return self
        if degree > self.degree:
            raise ValueError("cannot raise jet degree")
        return Jet(self.c[_truncate_plan(self.degree, degree)], degree)

    def __getitem__(self, item) -> Jet:
        if not isinstance(item, tuple):
            item = (item,)
        return Jet(self.c[(slice(None),) + item], self.degree)

    def sum(self, axis) -> Jet:
        axis = axis if axis < 0 else axis + 1
        return Jet(self.c.sum(axis=axis), self.degree)

    def __repr__(self) -> str:
        return f"Jet(degree={self.degree}, shape={self.shape})"

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            d = min(self.degree, other.degree)
            return self.truncate(d), other.truncate(d)
        return self, None

    def __neg__(self) -> Jet:
        return Jet(-self.c, self.degree)

    def __add__(self, other) -> Jet:
        a, b = self._coerce(other)
        if b is not None:
            ac, bc = _pad(a.c, b.c)
            return Jet(ac + bc, a.degree)
        other = np.asarray(other, dtype=float)
        c = np.broadcast_to(a.c, (a.c.shape[0],) + np.broadcast_shapes(a.shape, other.shape)).copy()
        c[0] = c[0] + other
        return Jet(c, a.degree)

    __radd__ = __add__

    def __sub__(self, other) -> Jet:
        return self + (-other)

    def __rsub__(self, other) -> Jet:
        return (-self) + other

    def __mul__(self, other) -> Jet:
        a, b = self._coerce(other)
        if b is None:
            return Jet(a.c * np.asarray(other, dtype=float), a.degree)
        p, q, starts = _product_plan(a.degree)
        ac, bc = _pad(a.c, b.c)
        prod = ac[p] * bc[q]
        return Jet(np.add.reduceat(prod, starts, axis=0), a.degree)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Jet:
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return Jet(self.c / np.asarray(other, dtype=float), self.degree)

    def __rtruediv__(self, other) -> Jet:
        return reciprocal(self) * other

    def __pow__(self, n: int) -> Jet:
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = Jet.constant(np.ones(self.shape), self.degree)
        for _ in range(n):
            out = out * self
        return out


def _compose(a: Jet, taylor) -> Jet:
    """Evaluate sum_k taylor[k] * (a - a0)**k, where taylor[k] are arrays."""
    delta = Jet(a.c.copy(), a.degree)
    delta.c[0] = 0.0
    out = Jet.constant(taylor[a.degree], a.degree)
    for k in range(a.degree - 1, -1, -1):
        out = out * delta + taylor[k]
    return out


def reciprocal(a: Jet) -> Jet:
    a0 = a.value
    taylor = [(-1.0) ** k / a0 ** (k + 1) for k in range(a.degree + 1)]
    return _compose(a, taylor)


def sqrt(a: Jet) -> Jet:
    a0 = a.value
    taylor = []
    coef = 1.0
    for k in range(a.degree + 1):
        taylor.append(coef * a0 ** (0.5 - k))
        coef *= (0.5 - k) / (k + 1)
    return _compose(a, taylor)


def stack(jets, axis: int = 0) -> Jet:
    d = min(j.degree for j in jets)
    axis = axis if axis < 0 else axis + 1
    return Jet(np.stack([j.truncate(d).c for j in jets], axis=axis), d)


def einsum(subscripts: str, a, b) -> Jet:
    """Two-operand einsum where either operand may be a Jet or an array."""
    lhs, out = subscripts.split("->")
    sa, sb = lhs.split(",")
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = a._coerce(b)
        p, q, starts = _product_plan(a.degree)
        prod = np.einsum(f"Z{sa},Z{sb}->Z{out}", a.c[p], b.c[q])
        return Jet(np.add.reduceat(prod, starts, axis=0), a.degree)
    if isinstance(a, Jet):
        return Jet(np.einsum(f"Z{sa},{sb}->Z{out}", a.c, b), a.degree)
    if isinstance(b, Jet):
        return Jet(np.einsum(f"{sa},Z{sb}->Z{out}", a, b.c), b.degree)
    raise TypeError("at least one operand must be a Jet")


def dot(a: Jet, b: Jet) -> Jet:
    """Contract the last axis."""
    return (a * b).sum(-1)


def cross(a: Jet, b: Jet) -> Jet:
    return stack(
        [
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ],
        axis=-1,
    )


def inv3(m: Jet) -> Jet:
    """Inverse of a (..., 3, 3) matrix jet via the adjugate."""
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            r = [k for k in range(3) if k != j]
            c = [k for k in range(3) if k != i]
            minor = m[..., r[0], c[0]] * m[..., r[1], c[1]] - m[..., r[0], c[1]] * m[..., r[1], c[0]]
            row.append(minor if (i + j) % 2 == 0 else -minor)
        rows.append(stack(row, axis=-1))
    adj = stack(rows, axis=-2)
    det = (m[..., 0, :] * adj[..., :, 0]).sum(-1)
    return adj * reciprocal(det)[..., None, None]
