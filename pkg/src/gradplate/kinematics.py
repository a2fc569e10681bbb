"""Strain measures, surface energy densities and stress vectors of a midsurface.

All quantities are evaluated in closed form from a :class:`SurfaceMotion`
through truncated Taylor jets.  Points ``Y`` may be a single pair of shape
``(2,)`` or any batch of shape ``(..., 2)``; results carry the batch shape in
front.  Index conventions: ``E[..., a, b]``, ``dE[..., g, a, b] = d_g E_ab``,
``T[..., a, i]``, ``M[..., a, b, i]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _jet as J
from ._jet import Jet
from .material import DerivedCoeffs
from .motion import SurfaceMotion

IMMERSION_TOL = 1e-10


class DegenerateImmersion(ValueError):
    """Raised where the tangent vectors y,1 and y,2 are (nearly) parallel."""


@dataclass(frozen=True)
class SurfaceGeometry:
    metric: np.ndarray
    metric_inv: np.ndarray
    christoffel: np.ndarray  # [..., nu, a, b] = gamma^nu_ab
    normal: np.ndarray
    tangents: np.ndarray  # [..., a, i] = y,a
    dual: np.ndarray  # [..., a, i] = y^{,a}


@dataclass(frozen=True)
class StrainState:
    E: np.ndarray
    dE: np.ndarray
    K: np.ndarray
    Edot: np.ndarray
    n: np.ndarray
    ndot: np.ndarray
    velocity: np.ndarray
    grad_velocity: np.ndarray  # [..., a, i] = d_t y,a

    @staticmethod
    def from_arrays(E, K, dE=None, Edot=None, n=None, ndot=None, velocity=None, grad_velocity=None):
        """Assemble a state directly, defaulting unspecified fields to rest values."""
        E = np.asarray(E, dtype=float)
        batch = E.shape[:-2]
        z = lambda *s: np.zeros(batch + s)
        return StrainState(
            E=E,
            dE=z(2, 2, 2) if dE is None else np.asarray(dE, dtype=float),
            K=np.asarray(K, dtype=float),
            Edot=z(2, 2) if Edot is None else np.asarray(Edot, dtype=float),
            n=np.broadcast_to([0.0, 0.0, 1.0], batch + (3,)) if n is None else np.asarray(n, dtype=float),
            ndot=z(3) if ndot is None else np.asarray(ndot, dtype=float),
            velocity=z(3) if velocity is None else np.asarray(velocity, dtype=float),
            grad_velocity=z(2, 3) if grad_velocity is None else np.asarray(grad_velocity, dtype=float),
        )


@dataclass(frozen=True)
class StressVectors:
    T: np.ndarray
    M: np.ndarray
    Pi: np.ndarray
    P: np.ndarray | None = None


# -- jet-level building blocks ------------------------------------------------


class _Fields:
    """Jets of the kinematic quantities derived from a motion jet ``y``."""

    def __init__(self, y: Jet):
        self.y = y
        self.y1 = [y.diff(a) for a in (0, 1)]
        self.F = J.stack(self.y1, axis=-2)  # [..., a, i]
        self.g = J.einsum("...ai,...bi->...ab", self.F, self.F)
        self.E = 0.5 * (self.g - np.eye(2))
        normal = J.cross(self.y1[0], self.y1[1])
        area2 = J.dot(normal, normal)
        if np.any(np.sqrt(area2.value) < IMMERSION_TOL):
            raise DegenerateImmersion("|y,1 x y,2| below tolerance: not an immersion")
        self.n = normal * J.reciprocal(J.sqrt(area2))[..., None]
        self.y2 = J.stack([J.stack([self.y1[a].diff(b) for b in (0, 1)], -2) for a in (0, 1)], -3)
        self.K = J.einsum("...abi,...i->...ab", self.y2, self.n)

    def dE(self) -> Jet:
        return J.stack([self.E.diff(g) for g in (0, 1)], axis=-3)

    def ginv(self) -> Jet:
        g = self.g
        det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
        adj = J.stack(
            [J.stack([g[..., 1, 1], -g[..., 0, 1]], -1), J.stack([-g[..., 1, 0], g[..., 0, 0]], -1)], -2
        )
        return adj * J.reciprocal(det)[..., None, None]

    def christoffel(self) -> Jet:
        ginv = self.ginv()
        proj = J.einsum("...mi,...abi->...mab", self.F, self.y2)
        return J.einsum("...nm,...mab->...nab", ginv, proj)


def _fields(motion: SurfaceMotion, Y, t: float, degree: int) -> _Fields:
    return _Fields(motion.jet(np.asarray(Y, dtype=float), t, degree))


def _trace(A):
    return A[..., 0, 0] + A[..., 1, 1]


# -- public evaluation ----------------------------------------------------------


def geometry(motion: SurfaceMotion, Y, t: float = 0.0) -> SurfaceGeometry:
    f = _fields(motion, Y, t, 2)
    ginv = f.ginv().value
    tangents = f.F.value
    return SurfaceGeometry(
        metric=f.g.value,
        metric_inv=ginv,
        christoffel=f.christoffel().value,
        normal=f.n.value,
        tangents=tangents,
        dual=np.einsum("...ab,...bi->...ai", ginv, tangents),
    )


def strain_state(motion: SurfaceMotion, Y, t: float = 0.0) -> StrainState:
    f = _fields(motion, Y, t, 2)
    return StrainState(
        E=f.E.value,
        dE=f.dE().value,
        K=f.K.value,
        Edot=f.E.diff(J.T).value,
        n=f.n.value,
        ndot=f.n.diff(J.T).value,
        velocity=f.y.diff(J.T).value,
        grad_velocity=f.F.diff(J.T).value,
    )


def _quad(coef_tr, coef_dev, A):
    """nu (tr A)^2 + (1 - nu) |A|^2 style sum over the last two axes."""
    tr = A[..., 0, 0] + A[..., 1, 1]
    return coef_tr * tr**2 + coef_dev * np.sum(A * A, axis=(-2, -1))


def stored_energy(state: StrainState, coeffs: DerivedCoeffs) -> np.ndarray:
    nu = coeffs.nu
    membrane = _quad(nu, 1 - nu, state.E)
    gradient = sum(_quad(nu, 1 - nu, state.dE[..., g, :, :]) for g in (0, 1))
    bending = _quad(nu, 1 - nu, state.K)
    return 0.5 * coeffs.a * (membrane + coeffs.ell_s2 * gradient) + 0.5 * coeffs.b_coef * bending


def kinetic_energy(state: StrainState, coeffs: DerivedCoeffs) -> np.ndarray:
    tr_rate = _trace(state.Edot)
    return 0.5 * coeffs.rho_s * (
        np.sum(state.velocity**2, axis=-1)
        + coeffs.q * coeffs.c * tr_rate**2
        + coeffs.c * np.sum(state.ndot**2, axis=-1)
        + coeffs.ell_k2 * np.sum(state.grad_velocity**2, axis=(-2, -1))
    )


def energy_densities(state: StrainState, coeffs: DerivedCoeffs):
    """Surface stored and kinetic energy densities (U, K)."""
    return stored_energy(state, coeffs), kinetic_energy(state, coeffs)


def koiter_energy(state: StrainState, coeffs: DerivedCoeffs) -> np.ndarray:
    """Classical plate energy written with the Lamé moduli."""
    lam, mu, h = coeffs.lam, coeffs.mu, coeffs.h
    k = lam * mu / (lam + 2 * mu)
    return h * _quad(k, mu, state.E) + h**3 / 24 * _quad(k, mu, state.K)


def classical_kinetic(state: StrainState, coeffs: DerivedCoeffs) -> np.ndarray:
    """Kinetic energy density of the plate without velocity-gradient inertia."""
    lam, mu, h = coeffs.lam, coeffs.mu, coeffs.h
    tr_rate = _trace(state.Edot)
    return 0.5 * h * coeffs.rho_R * (
        np.sum(state.velocity**2, axis=-1)
        + h**2 / 12 * (lam / (lam + 2 * mu)) ** 2 * tr_rate**2
        + h**2 / 12 * np.sum(state.ndot**2, axis=-1)
    )


# -- stress vectors -----------------------------------------------------------


def _stress_jets(f: _Fields, coeffs: DerivedCoeffs):
    a, b, nu = coeffs.a, coeffs.b_coef, coeffs.nu
    I2 = np.eye(2)
    E, K, n, F = f.E, f.K, f.n, f.F
    dE = f.dE()  # [g, a, b]
    gam = f.christoffel()  # [nu, a, b]

    S_mem = a * (nu * _trace(E)[..., None, None] * I2 + (1 - nu) * E)
    tr_dE = _trace(dE)  # [g]
    S_grad = a * coeffs.ell_s2 * (nu * tr_dE[..., None, None] * I2 + (1 - nu) * dE)  # [r, a, b]
    B = b * (nu * _trace(K)[..., None, None] * I2 + (1 - nu) * K)

    T = J.einsum("...ab,...bi->...ai", S_mem, F)
    T = T + J.einsum("...rab,...bri->...ai", S_grad, f.y2)
    T = T - J.einsum("...br,...abr->...a", B, gam)[..., None] * n[..., None, :]

    # grad part of M^{ab}: (a/2) ell_s^2 [nu(tr d^b E delta^{ar} + tr d^a E delta^{br})
    #                                      + (1-nu)(d^a E^{br} + d^b E^{ar})] y,r
    G = nu * tr_dE  # [g]
    half = 0.5 * a * coeffs.ell_s2
    Mt = J.einsum("...b,...ai->...abi", G, F) + (1 - nu) * J.einsum("...abr,...ri->...abi", dE, F)
    Mt_T = J.stack([J.stack([Mt[..., bb, aa, :] for bb in (0, 1)], -2) for aa in (0, 1)], -3)
    M = half * (Mt + Mt_T) + B[..., None] * n[..., None, None, :]

    Edot = f.E.diff(J.T)
    Fdot = f.F.diff(J.T)
    ginv = f.ginv()
    rho_s, c = coeffs.rho_s, coeffs.c
    Pi = coeffs.q * c * _trace(Edot)[..., None, None] * F
    nFdot = J.einsum("...bi,...i->...b", Fdot, n)
    Pi = Pi + c * J.einsum("...ab,...b->...a", ginv, nFdot)[..., None] * n[..., None, :]
    Pi = rho_s * Pi + rho_s * coeffs.ell_k2 * Fdot
    return T, M, Pi


def stress_vectors(
    motion: SurfaceMotion,
    geometry_or_none,
    coeffs: DerivedCoeffs,
    Y,
    t: float = 0.0,
    full: bool = False,
) -> StressVectors:
    """Nonlinear stress vectors T^a, M^ab and momentum flux Pi^a.

    With ``full=True`` the combination ``P^a = T^a - d_b M^ab + d_t Pi^a`` is
    included; otherwise ``P`` is ``None``.  ``geometry_or_none`` is accepted
    for interface symmetry; geometry is always recomputed from ``motion``.
    """
    f = _fields(motion, Y, t, 3 if full else 2)
    T, M, Pi = _stress_jets(f, coeffs)
    P = None
    if full:
        P = (T - (M[..., :, 0, :].diff(0) + M[..., :, 1, :].diff(1)) + Pi.diff(J.T)).value
    return StressVectors(T.value, M.value, Pi.value, P)


def momentum_flux_divergence(motion: SurfaceMotion, coeffs: DerivedCoeffs, Y, t: float = 0.0) -> np.ndarray:
    """``d_a P^a``: the surface force per unit area balancing ``rho_s * y_tt``."""
    f = _fields(motion, Y, t, 4)
    T, M, Pi = _stress_jets(f, coeffs)
    divT = T[..., 0, :].diff(0) + T[..., 1, :].diff(1)
    divdivM = sum(M[..., al, be, :].diff(al).diff(be) for al in (0, 1) for be in (0, 1))
    divPi_t = (Pi[..., 0, :].diff(0) + Pi[..., 1, :].diff(1)).diff(J.T)
    return divT.value - divdivM.value + divPi_t.value


def linearized_operator(direction: SurfaceMotion, coeffs: DerivedCoeffs, Y, t: float = 0.0) -> np.ndarray:
    """Right side of the linearized field equations applied to the displacement.

    The displacement ``u + w e3`` is ``direction``'s displacement jet (identity
    removed, ``eps`` applied).  Returns the vector
    ``(1 - ell_s^2 Lap) a (nu grad tr eps + (1-nu) div eps) - b Lap^2 w e3
    + rho_s (q c grad tr eps_tt + ell_k^2 Lap u_tt) + rho_s (c + ell_k^2) Lap w_tt e3``.
    """
    U = direction.eps * direction.displacement_jet(np.asarray(Y, dtype=float), t, 4)
    a, b, nu, c = coeffs.a, coeffs.b_coef, coeffs.nu, coeffs.c
    ls2, lk2, rho_s, q = coeffs.ell_s2, coeffs.ell_k2, coeffs.rho_s, coeffs.q

    def d(jet, *vars_):
        for v in vars_:
            jet = jet.diff(v)
        return jet.value

    def lap(*extra):
        return lambda jet: d(jet, 0, 0, *extra) + d(jet, 1, 1, *extra)

    u = [U[..., 0], U[..., 1]]
    w = U[..., 2]
    out = np.zeros(np.shape(U.value))
    for r in (0, 1):
        # nu d_r tr eps + (1-nu) d_b eps_{rb}, eps_{ab} = (u_a,b + u_b,a)/2
        def elastic(*extra):
            tr_part = sum(d(u[g], g, r, *extra) for g in (0, 1))
            div_part = sum(0.5 * (d(u[r], bb, bb, *extra) + d(u[bb], r, bb, *extra)) for bb in (0, 1))
            return nu * tr_part + (1 - nu) * div_part

        lap_elastic = elastic(0, 0) + elastic(1, 1)
        out[..., r] = a * (elastic() - ls2 * lap_elastic)
        tr_tt = sum(d(u[g], g, r, J.T, J.T) for g in (0, 1))
        out[..., r] += rho_s * (q * c * tr_tt + lk2 * lap(J.T, J.T)(u[r]))
    bilap = d(w, 0, 0, 0, 0) + 2 * d(w, 0, 0, 1, 1) + d(w, 1, 1, 1, 1)
    out[..., 2] = -b * bilap + rho_s * (c + lk2) * lap(J.T, J.T)(w)
    return out


@dataclass(frozen=True)
class LinearizationReport:
    deltas: np.ndarray
    differences: np.ndarray
    slope: float


def linearization_consistency(
    coeffs: DerivedCoeffs,
    direction_field: SurfaceMotion,
    delta_list: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
    points=None,
    t: float = 0.7,
) -> LinearizationReport:
    """Compare the nonlinear divergence at ``id + delta u`` with ``delta L[u]``.

    ``u`` is the sum of ``direction_field``'s terms (its ``eps`` is ignored).
    The max-norm difference over ``points`` is recorded per delta; ``slope``
    is the least-squares log-log slope (2 for a consistent linearization).
    Returns slope ``nan`` when the difference vanishes identically.
    """
    if points is None:
        g = np.linspace(0.0, 2 * np.pi, 5, endpoint=False) + 0.3
        points = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    lin = linearized_operator(direction_field.scaled(1.0), coeffs, points, t)
    diffs = []
    for delta in delta_list:
        nonlinear = momentum_flux_divergence(direction_field.scaled(delta), coeffs, points, t)
        diffs.append(np.max(np.abs(nonlinear - delta * lin)))
    diffs = np.array(diffs)
    deltas = np.asarray(delta_list, dtype=float)
    if np.all(diffs == 0):
        slope = float("nan")
    else:
        slope = float(np.polyfit(np.log(deltas), np.log(diffs), 1)[0])
    return LinearizationReport(deltas, diffs, slope)
