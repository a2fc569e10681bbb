"""Anti-plane crack in a half-plane with a strain-gradient crack face.

Solves ``beta f'''' - alpha f'' + H f' = gamma`` on (-1, 1) with
``f(+-1) = f'(+-1) = 0``, where ``H g(x) = (1/pi) p.v. int g(s)/(x - s) ds``
is the finite Hilbert transform, then reconstructs the harmonic half-plane
field ``v(x, z)`` from its boundary values with the Poisson kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from ._parallel import pmap

ENDPOINT_GUARD = 1e-12
_BUMP = np.array([3 / 8, 0.0, -1 / 2, 0.0, 1 / 8])  # (1 - x^2)^2 in Chebyshev form


class SingularSystem(RuntimeError):
    pass


class NonConvergence(RuntimeError):
    pass


# -- finite Hilbert transform -------------------------------------------------


@lru_cache(maxsize=None)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panel_nodes(a: float, b: float, panels: int, order: int):
    x, w = _gauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def finite_hilbert(g: Callable, x, panels: int = 8, order: int = 24) -> np.ndarray:
    """``(1/pi) p.v. int_{-1}^{1} g(s)/(x - s) ds`` at interior points ``x``.

    Singularity subtraction leaves ``g(x) ln((1+x)/(1-x))`` in closed form
    plus a regular integral, computed in the variable ``s = cos(theta)``
    (which also absorbs inverse-square-root endpoint behaviour of ``g``)
    with composite Gauss–Legendre panels split at ``theta = arccos(x)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) >= 1 - ENDPOINT_GUARD):
        raise ValueError("finite Hilbert transform evaluated at or beyond an endpoint")
    out = np.empty_like(x)
    for n, xi in enumerate(x):
        gx = g(xi)
        tx = np.arccos(xi)
        total = 0.0
        for a, b in ((0.0, tx), (tx, np.pi)):
            th, w = _panel_nodes(a, b, panels, order)
            s = np.cos(th)
            integrand = (g(s) - gx) / (xi - s) * np.sin(th)
            total += integrand @ w
        out[n] = (total + gx * (np.log1p(xi) - np.log1p(-xi))) / np.pi
    return out


def hilbert_chebyshev(x, nmax: int) -> np.ndarray:
    """``H[T_n](x)`` for n = 0..nmax via the three-term recurrence.

    ``H T_{n+1} = 2 x H T_n - H T_{n-1} - (2/pi) int T_n``, with
    ``int T_n = 2/(1 - n^2)`` for even n and 0 for odd n.  Shape (len(x), nmax+1).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) >= 1 - ENDPOINT_GUARD):
        raise ValueError("finite Hilbert transform evaluated at or beyond an endpoint")
    H = np.empty((x.size, nmax + 1))
    H[:, 0] = (np.log1p(x) - np.log1p(-x)) / np.pi
    if nmax >= 1:
        H[:, 1] = x * H[:, 0] - 2 / np.pi
    for n in range(1, nmax):
        In = 2.0 / (1 - n * n) if n % 2 == 0 else 0.0
        H[:, n + 1] = 2 * x * H[:, n] - H[:, n - 1] - 2 / np.pi * In
    return H


def classical_reference(gamma: float) -> Callable:
    """Opening ``gamma sqrt(1 - x^2)`` of the crack without surface terms."""

    def f_cl(x, order: int = 0):
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.clip(1 - x * x, 0.0, None))
        if order == 0:
            return gamma * r
        if order == 1:
            return -gamma * x / r
        if order == 2:
            return -gamma / r**3
        raise ValueError("orders 0..2 available")

    return f_cl


# -- collocation solver ---------------------------------------------------------


@dataclass(frozen=True)
class CrackConfig:
    alpha: float
    beta: float
    gamma: float
    N: int = 128

    def __post_init__(self):
        if not self.alpha > 0 or not self.beta > 0:
            raise ValueError("alpha and beta must be positive")
        if self.N < 16:
            raise ValueError("collocation size N must be at least 16")

    @staticmethod
    def from_physical(h: float, ell: float, ell_s: float, sigma: float, mu: float, N: int = 128) -> CrackConfig:
        """Dimensionless groups alpha = h/ell, beta = h ell_s^2/ell^3, gamma = sigma/mu."""
        return CrackConfig(h / ell, h * ell_s**2 / ell**3, sigma / mu, N)


@lru_cache(maxsize=16)
def _basis(N: int) -> np.ndarray:
    """Chebyshev coefficients of (1 - x^2)^2 T_k, columns k = 0..N-1."""
    B = np.zeros((N + 4, N))
    for k in range(N):
        e = np.zeros(k + 1)
        e[k] = 1.0
        col = C.chebmul(_BUMP, e)
        B[: col.size, k] = col
    return B


def _deriv(coef: np.ndarray, m: int) -> np.ndarray:
    if m == 0:
        return coef
    d = C.chebder(coef, m, axis=0)
    return np.concatenate([d, np.zeros((m,) + coef.shape[1:])], axis=0)


def collocation_points(N: int) -> np.ndarray:
    j = np.arange(N)
    return np.cos((2 * j + 1) * np.pi / (2 * N))


@dataclass
class CrackSolution:
    config: CrackConfig
    coeffs: np.ndarray  # c_k of f = (1 - x^2)^2 sum c_k T_k
    cheb: np.ndarray  # Chebyshev coefficients of f itself
    cond: float
    residual: float
    nodes: np.ndarray = field(repr=False)
    nodal: np.ndarray = field(repr=False)  # rows: f, f', f'', f''', f''''

    def derivative_coeffs(self, order: int) -> np.ndarray:
        return _deriv(self.cheb, order)

    def evaluate(self, x, order: int = 0) -> np.ndarray:
        """f^(order)(x) on [-1, 1]; f and f' are exactly zero for |x| >= 1."""
        x = np.asarray(x, dtype=float)
        val = C.chebval(x, self.derivative_coeffs(order))
        if order <= 1:
            val = np.where(np.abs(x) >= 1, 0.0, val)
        return val

    def hilbert_fprime(self, x) -> np.ndarray:
        d1 = self.derivative_coeffs(1)
        return hilbert_chebyshev(x, d1.size - 1) @ d1

    def residual_at(self, x) -> np.ndarray:
        cfg = self.config
        return (
            cfg.beta * self.evaluate(x, 4)
            - cfg.alpha * self.evaluate(x, 2)
            + self.hilbert_fprime(x)
            - cfg.gamma
        )

    def sup_norms(self, samples: int = 2001) -> np.ndarray:
        """Max |f^(m)| on a fine Chebyshev–Lobatto grid for m = 0..4."""
        x = np.cos(np.linspace(0, np.pi, samples))
        return np.array([np.max(np.abs(self.evaluate(x, m))) for m in range(5)])


def check_points(N: int) -> np.ndarray:
    """2N interior checkpoints interleaved between collocation nodes."""
    j = np.arange(2 * N)
    return np.cos((j + 0.5) * np.pi / (2 * N) + np.pi / (8 * N))[: 2 * N]


def solve_crack(config: CrackConfig) -> CrackSolution:
    """Dense collocation in the basis (1 - x^2)^2 T_k at N Gauss–Chebyshev points."""
    N = config.N
    B = _basis(N)
    x = collocation_points(N)
    D1 = _deriv(B, 1)
    V = C.chebvander(x, N + 3)
    L = config.beta * (V @ _deriv(B, 4)) - config.alpha * (V @ _deriv(B, 2))
    L = L + hilbert_chebyshev(x, N + 3) @ D1
    rhs = np.full(N, float(config.gamma))
    try:
        c = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    cond = float(np.linalg.cond(L))
    cheb = B @ c
    nodes = np.cos(np.linspace(0, np.pi, N + 1))
    sol = CrackSolution(config, c, cheb, cond, 0.0, nodes, np.empty(0))
    sol.nodal = np.array([sol.evaluate(nodes, m) for m in range(5)])
    sol.residual = float(np.max(np.abs(sol.residual_at(check_points(N)))))
    return sol


def solve_converged(config: CrackConfig, tol: float = 1e-8) -> tuple[CrackSolution, CrackSolution]:
    """Solve at N and 2N; raise if the residual contract fails at both."""
    a = solve_crack(config)
    b = solve_crack(CrackConfig(config.alpha, config.beta, config.gamma, 2 * config.N))
    scale = max(abs(config.gamma), np.finfo(float).tiny)
    if a.residual > tol * scale and b.residual > tol * scale:
        raise NonConvergence(f"residual {a.residual:.3g} at N={config.N} and {b.residual:.3g} at N={2 * config.N}")
    return a, b


# -- field reconstruction -----------------------------------------------------------


@dataclass
class FieldReconstruction:
    x: np.ndarray
    z: np.ndarray
    v: np.ndarray
    vx: np.ndarray
    vz: np.ndarray

    @property
    def sup_norms(self) -> dict:
        return {
            "v": float(np.max(np.abs(self.v))),
            "vx": float(np.max(np.abs(self.vx))),
            "vz": float(np.max(np.abs(self.vz))),
        }

    @property
    def c1_norm(self) -> float:
        s = self.sup_norms
        return max(s["v"], s["vx"], s["vz"])


def _graded_nodes(x: float, z: float, order: int = 16):
    """Panels on [-1, 1] refined geometrically towards x at scale z and towards both ends."""
    pts = {-1.0, 1.0}
    for j in range(1, 40):
        pts.update((1 - 2.0**-j, -1 + 2.0**-j))
    r = z
    while r < 4:
        for p in (x - r, x + r):
            if -1 < p < 1:
                pts.add(p)
        r *= 2
    if -1 < x < 1:
        pts.add(x)
    edges = np.array(sorted(pts))
    t, w = _gauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def _field_point(f: Callable, fp: Callable, x: float, z: float):
    s, w = _graded_nodes(x, z)
    inside = abs(x) < 1
    fx = float(f(x)) if inside else 0.0
    fpx = float(fp(x)) if inside else 0.0
    u = x - s
    den = u * u + z * z
    P = z / (np.pi * den)
    Q = u / (np.pi * den)
    intP = (np.arctan((1 - x) / z) + np.arctan((1 + x) / z)) / np.pi
    intQ = np.log(((1 + x) ** 2 + z * z) / ((1 - x) ** 2 + z * z)) / (2 * np.pi)
    fs, fps = f(s), fp(s)
    v = (P * (fs - fx)) @ w + fx * intP
    vx = (P * (fps - fpx)) @ w + fpx * intP
    vz = -((Q * (fps - fpx)) @ w + fpx * intQ)
    return v, vx, vz


def reconstruct_field(solution, x_grid: Sequence[float], z_grid: Sequence[float]) -> FieldReconstruction:
    """Poisson-kernel extension of the crack-face values into z > 0.

    ``solution`` is a :class:`CrackSolution` or a pair of callables
    ``(f, f')`` vanishing outside [-1, 1].
    """
    x_grid = np.asarray(x_grid, dtype=float)
    z_grid = np.asarray(z_grid, dtype=float)
    if np.any(z_grid <= 0):
        raise ValueError("field reconstruction requires z > 0")
    if isinstance(solution, CrackSolution):
        f = lambda s: solution.evaluate(s, 0)
        fp = lambda s: solution.evaluate(s, 1)
    else:
        f, fp = solution

    def row(zz):
        return [_field_point(f, fp, xx, zz) for xx in x_grid]

    rows = pmap(row, z_grid)
    arr = np.array(rows)  # (nz, nx, 3)
    X, Z = np.meshgrid(x_grid, z_grid)
    return FieldReconstruction(X, Z, arr[..., 0], arr[..., 1], arr[..., 2])


# -- tip diagnostics --------------------------------------------------------------


@dataclass
class TipReport:
    betas: np.ndarray
    max_f2: np.ndarray
    increasing: bool


def tip_curvature(solution: CrackSolution, band: float = 0.1, samples: int = 801) -> float:
    """max |f''| over the bands 1 - band <= |x| <= 1."""
    t = np.linspace(1 - band, 1.0, samples)
    x = np.concatenate([t, -t])
    return float(np.max(np.abs(solution.evaluate(x, 2))))


def tip_diagnostics(alpha: float, betas: Sequence[float], gamma: float = 1.0, N: int = 128) -> TipReport:
    betas = np.asarray(betas, dtype=float)
    sols = pmap(lambda b: solve_crack(CrackConfig(alpha, b, gamma, N)), betas)
    vals = np.array([tip_curvature(s) for s in sols])
    order = np.argsort(-betas)
    inc = bool(np.all(np.diff(vals[order]) > 0))
    return TipReport(betas, vals, inc)
