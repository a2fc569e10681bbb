"""Through-thickness verification of the reduced plate energies.

A midsurface motion ``y`` is lifted to the three-dimensional motion
``chi = y + Z d + Z^2 g / 2`` on ``|Z| <= h/2``, with the director
``d = phi n`` and corrector ``g`` chosen so that the transverse tractions
vanish to first order in ``Z``.  The bulk strain-gradient energy ``W`` and
kinetic energy ``kappa`` are integrated over the thickness by Gauss–Legendre
quadrature and compared with the surface densities ``U`` and ``K``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _jet as J
from ._parallel import pmap
from .kinematics import _Fields, energy_densities, strain_state
from .material import DerivedCoeffs, MaterialSpec, derive_coefficients
from .motion import FourierMode, SurfaceMotion, TimeLaw


class CompressionCollapse(ValueError):
    """The director length would be imaginary: 1 - 2 lam tr E/(lam + 2 mu) <= 0."""


class SingularCorrector(ValueError):
    """The transverse acoustic matrix A is singular."""


class QuadratureWarning(UserWarning):
    pass


class NonMonotoneErrorWarning(UserWarning):
    pass


def _director_jets(f: _Fields, coeffs: DerivedCoeffs):
    ratio = 2 * coeffs.lam / (coeffs.lam + 2 * coeffs.mu)
    radicand = 1.0 - ratio * (f.E[..., 0, 0] + f.E[..., 1, 1])
    if np.any(radicand.value <= 0):
        raise CompressionCollapse("director length undefined: membrane compression too large")
    phi = J.sqrt(radicand)
    return phi, phi[..., None] * f.n


def _corrector_jet(F: J.Jet, dd: Sequence[J.Jet], coeffs: DerivedCoeffs):
    """g = -A^{-1} B with A_ij = M_i3j3 and B_j = M_j3ka d^k_{,a}.

    ``F`` is the 3x3 gradient jet ``[y,1 | y,2 | d]`` (rows i, columns a).
    """
    lam, mu = coeffs.lam, coeffs.mu
    H = F - np.eye(3)
    Ecol = 0.5 * (H + _transpose(H) + J.einsum("...ka,...kb->...ab", H, H))
    trE = Ecol[..., 0, 0] + Ecol[..., 1, 1] + Ecol[..., 2, 2]
    S = 2 * mu * Ecol + lam * trE[..., None, None] * np.eye(3)
    FFt = J.einsum("...ia,...ja->...ij", F, F)
    F3 = F[..., :, 2]
    outer33 = F3[..., :, None] * F3[..., None, :]
    A = S[..., 2, 2][..., None, None] * np.eye(3) + (lam + mu) * outer33 + mu * FFt
    B = 0
    for al in (0, 1):
        B = B + S[..., 2, al][..., None] * dd[al]
        B = B + lam * F3 * J.dot(F[..., :, al], dd[al])[..., None]
        B = B + mu * F[..., :, al] * J.dot(F3, dd[al])[..., None]
    g = -J.einsum("...ij,...j->...i", J.inv3(A), B)
    return g, A


def _transpose(m: J.Jet) -> J.Jet:
    return J.Jet(np.swapaxes(m.c, -1, -2), m.degree)


@dataclass(frozen=True)
class AnsatzMotion3D:
    """Director, corrector and their derivatives at a set of midsurface points.

    Array layouts: vectors ``[..., i]``, first derivatives ``[..., a, i]``,
    second derivatives ``[..., a, b, i]``; ``a`` ranges over (Y1, Y2).
    """

    coeffs: DerivedCoeffs
    thickness: float
    phi: np.ndarray
    y: dict
    d: dict
    g: dict
    A: np.ndarray
    cond_A: np.ndarray

    @property
    def director(self) -> np.ndarray:
        return self.d["0"]

    @property
    def corrector(self) -> np.ndarray:
        return self.g["0"]


def _derivs(jet: J.Jet) -> dict:
    """Values of a vector jet and the derivatives needed by the ansatz."""
    out = {"0": jet.value, "t": jet.diff(J.T).value}
    out["x"] = np.stack([jet.diff(a).value for a in (0, 1)], axis=-2)
    out["xt"] = np.stack([jet.diff(a).diff(J.T).value for a in (0, 1)], axis=-2)
    out["xx"] = np.stack(
        [np.stack([jet.diff(a).diff(b).value for b in (0, 1)], axis=-2) for a in (0, 1)], axis=-3
    )
    return out


def build_ansatz(coeffs: DerivedCoeffs, motion: SurfaceMotion, Y, t: float = 0.0, h: Optional[float] = None):
    """Assemble director and corrector (with derivatives) at the points ``Y``."""
    f = _Fields(motion.jet(np.asarray(Y, dtype=float), t, 4))
    phi, d = _director_jets(f, coeffs)
    dd = [d.diff(0), d.diff(1)]
    y1 = f.y1
    F = J.stack([y1[0].truncate(d.degree), y1[1].truncate(d.degree), d], axis=-1)
    g, A = _corrector_jet(F.truncate(dd[0].degree), dd, coeffs)
    Aval = A.value
    cond = np.linalg.cond(Aval)
    if not np.all(np.isfinite(cond)) or np.any(cond > 1e12):
        raise SingularCorrector(f"transverse matrix A is singular (condition number {np.max(cond):.3g})")
    return AnsatzMotion3D(
        coeffs=coeffs,
        thickness=coeffs.h if h is None else h,
        phi=phi.value,
        y=_derivs(f.y),
        d=_derivs(d),
        g=_derivs(g),
        A=Aval,
        cond_A=cond,
    )


def director(coeffs: DerivedCoeffs, motion: SurfaceMotion, Y, t: float = 0.0):
    """(phi, d) with d = phi n and phi^2 = 1 - 2 lam tr E / (lam + 2 mu)."""
    f = _Fields(motion.jet(np.asarray(Y, dtype=float), t, 2))
    phi, d = _director_jets(f, coeffs)
    return phi.value, d.value


def corrector(coeffs: DerivedCoeffs, motion: SurfaceMotion, Y, t: float = 0.0) -> np.ndarray:
    f = _Fields(motion.jet(np.asarray(Y, dtype=float), t, 2))
    phi, d = _director_jets(f, coeffs)
    dd = [d.diff(0), d.diff(1)]
    F = J.stack([f.y1[0], f.y1[1], d], axis=-1).truncate(0)
    g, A = _corrector_jet(F, [x.truncate(0) for x in dd], coeffs)
    if np.any(np.linalg.cond(A.value) > 1e12):
        raise SingularCorrector("transverse matrix A is singular")
    return g.value


# -- assembly in Z --------------------------------------------------------------


def _assemble(an: AnsatzMotion3D, Z: np.ndarray):
    """F_hat, A_hat, chi_t, F_hat_t at heights Z; shapes (..., nZ, 3, 3[, 3])."""
    Zb = Z[:, None]
    Zb2 = Zb**2 / 2
    y, d, g = an.y, an.d, an.g

    # first gradient F[i, a] with columns (Y1, Y2, Z)
    yx = np.swapaxes(y["x"], -1, -2)[..., None, :, :]  # [..., 1, i, a]
    dx = np.swapaxes(d["x"], -1, -2)[..., None, :, :]
    gx = np.swapaxes(g["x"], -1, -2)[..., None, :, :]
    Zc = Z[:, None, None]
    Zc2 = Zc**2 / 2
    F_tan = yx + Zc * dx + Zc2 * gx  # [..., nZ, i, a]
    F_nor = d["0"][..., None, :] + Zb * g["0"][..., None, :]  # [..., nZ, i]
    F = np.concatenate([F_tan, F_nor[..., None]], axis=-1)

    # second gradient A[i, a, c] = d_c F[i, a]
    Zd = Z[:, None, None, None]
    yxx = np.moveaxis(y["xx"], -1, -3)[..., None, :, :, :]  # [..., 1, i, a, b]
    dxx = np.moveaxis(d["xx"], -1, -3)[..., None, :, :, :]
    gxx = np.moveaxis(g["xx"], -1, -3)[..., None, :, :, :]
    A_tt = yxx + Zd * dxx + Zd**2 / 2 * gxx
    A_tn = dx + Zc * gx  # d_a of column 3 == d_Z of column a
    shape = F.shape + (3,)
    Ahat = np.zeros(shape)
    Ahat[..., :2, :2] = A_tt
    Ahat[..., :2, 2] = A_tn
    Ahat[..., 2, :2] = A_tn
    Ahat[..., 2, 2] = np.broadcast_to(g["0"][..., None, :], F_nor.shape)

    chi_t = y["t"][..., None, :] + Zb * d["t"][..., None, :] + Zb2 * g["t"][..., None, :]
    yxt = np.swapaxes(y["xt"], -1, -2)[..., None, :, :]
    dxt = np.swapaxes(d["xt"], -1, -2)[..., None, :, :]
    gxt = np.swapaxes(g["xt"], -1, -2)[..., None, :, :]
    Ft_tan = yxt + Zc * dxt + Zc2 * gxt
    Ft_nor = d["t"][..., None, :] + Zb * g["t"][..., None, :]
    Fdot = np.concatenate([Ft_tan, Ft_nor[..., None]], axis=-1)
    return F, Ahat, chi_t, Fdot


def bulk_densities(an: AnsatzMotion3D, Z: np.ndarray):
    """Strain-gradient bulk energy W and kinetic energy kappa at heights Z."""
    c = an.coeffs
    lam, mu = c.lam, c.mu
    F, Ahat, chi_t, Fdot = _assemble(an, np.asarray(Z, dtype=float))
    H = F - np.eye(3)
    E = 0.5 * (H + np.swapaxes(H, -1, -2) + np.einsum("...ka,...kb->...ab", H, H))
    trE = np.trace(E, axis1=-2, axis2=-1)
    W = 0.5 * lam * trE**2 + mu * np.sum(E * E, axis=(-2, -1))
    # d_c E_ab = (A_iac F_ib + F_ia A_ibc) / 2
    dE = 0.5 * (np.einsum("...iac,...ib->...cab", Ahat, F) + np.einsum("...ia,...ibc->...cab", F, Ahat))
    tr_dE = np.trace(dE, axis1=-2, axis2=-1)
    W = W + c.ell_s2 * np.sum(0.5 * lam * tr_dE**2 + mu * np.sum(dE * dE, axis=(-2, -1)), axis=-1)
    L = Fdot @ np.linalg.inv(F)
    kappa = 0.5 * c.rho_R * (np.sum(chi_t**2, axis=-1) + c.ell_k2 * np.sum(L * L, axis=(-2, -1)))
    return W, kappa


def through_thickness(coeffs: DerivedCoeffs, ansatz: AnsatzMotion3D, h: Optional[float] = None, quad_order: int = 8):
    """Gauss–Legendre integrals of W and kappa over Z in [-h/2, h/2].

    A :class:`QuadratureWarning` is issued when doubling the number of points
    changes either integral by more than 1e-12 relative.
    """
    if quad_order < 6:
        raise ValueError("quad_order must be at least 6")
    h = ansatz.thickness if h is None else h
    if coeffs is not ansatz.coeffs and coeffs != ansatz.coeffs:
        raise ValueError("coefficients differ from those used to build the ansatz")

    def integrate(n):
        x, w = np.polynomial.legendre.leggauss(n)
        Z = 0.5 * h * x
        W, kap = bulk_densities(ansatz, Z)
        return 0.5 * h * (W @ w), 0.5 * h * (kap @ w)

    W1, K1 = integrate(quad_order)
    W2, K2 = integrate(2 * quad_order)
    for name, a, b in (("W", W1, W2), ("kappa", K1, K2)):
        scale = np.maximum(np.abs(b), np.finfo(float).tiny)
        if np.any(np.abs(a - b) > 1e-12 * scale):
            warnings.warn(
                f"{name} through-thickness quadrature under-resolved at {quad_order} points",
                QuadratureWarning,
                stacklevel=2,
            )
    return W1, K1


def constraint_residuals(ansatz: AnsatzMotion3D) -> dict:
    """Residuals of the traction conditions at Z = 0 from the assembled fields.

    Keys: ``E_a3``, ``E_33``, ``dZ_E_a3``, ``dZ_E_33``; each the max abs value.
    """
    c = ansatz.coeffs
    r = c.lam / (c.lam + 2 * c.mu)
    F, _, _, _ = _assemble(ansatz, np.array([0.0]))
    F = F[..., 0, :, :]
    # dF/dZ at Z = 0 is [d,1 | d,2 | g]
    Fp = np.concatenate([np.swapaxes(ansatz.d["x"], -1, -2), ansatz.g["0"][..., None]], axis=-1)
    E = 0.5 * (np.swapaxes(F, -1, -2) @ F - np.eye(3))
    Ep = 0.5 * (np.swapaxes(Fp, -1, -2) @ F + np.swapaxes(F, -1, -2) @ Fp)
    trE2 = E[..., 0, 0] + E[..., 1, 1]
    trEp2 = Ep[..., 0, 0] + Ep[..., 1, 1]
    return {
        "E_a3": float(np.max(np.abs(E[..., :2, 2]))),
        "E_33": float(np.max(np.abs(E[..., 2, 2] + r * trE2))),
        "dZ_E_a3": float(np.max(np.abs(Ep[..., :2, 2]))),
        "dZ_E_33": float(np.max(np.abs(Ep[..., 2, 2] + r * trEp2))),
    }


# -- convergence study -----------------------------------------------------------


STRETCH_MODES = (
    FourierMode(0, 1, 0, 0.5, 0.3, TimeLaw.parse("cos(0.5)")),
    FourierMode(1, 1, 1, 0.3, 0.1, TimeLaw.parse("cos(0.5)")),
)
DEFLECTION_MODES = (
    FourierMode(2, 1, 1, 1.0, 0.2, TimeLaw.parse("sin(1)")),
    FourierMode(2, 0, 1, 0.5, 0.0, TimeLaw.parse("sin(1)")),
)
FAMILIES = {
    "stretch": STRETCH_MODES,
    "bend": DEFLECTION_MODES,
    "mixed": STRETCH_MODES + DEFLECTION_MODES,
}


def motion_family(name: str) -> Callable[[float], SurfaceMotion]:
    """Motion ``id + h * (shape field)`` for a named family."""
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}")
    modes = FAMILIES[name]
    return lambda h: SurfaceMotion.fourier(modes, eps=h)


def material_family(base: MaterialSpec) -> Callable[[float], DerivedCoeffs]:
    """Coefficients with thickness h and particle spacing d = h."""
    return lambda h: derive_coefficients(base.replace(h=h, d=h, ell_s=None, ell_k=None))


def default_points(n: int = 3) -> np.ndarray:
    g = 2 * np.pi * (np.arange(n) + 0.37) / n
    return np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)


@dataclass
class ConvergenceReport:
    h: np.ndarray
    W_err: np.ndarray
    K_err: np.ndarray
    slope_W: float
    slope_K: float
    quad_order: int
    warnings: list = field(default_factory=list)


def _slope(h, err):
    if np.any(err <= 0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def energy_errors(coeffs, motion, points, t: float, quad_order: int):
    """Max over points of |int W - U| and |int kappa - K|."""
    an = build_ansatz(coeffs, motion, points, t)
    W_int, K_int = through_thickness(coeffs, an, quad_order=quad_order)
    U, K = energy_densities(strain_state(motion, points, t), coeffs)
    return float(np.max(np.abs(W_int - U))), float(np.max(np.abs(K_int - K)))


def convergence_study(
    coeffs_family: Callable[[float], DerivedCoeffs],
    motion_family: Callable[[float], SurfaceMotion],
    h_list: Sequence[float] = (0.1, 0.05, 0.025, 0.0125),
    points=None,
    t: float = 1.0,
    quad_order: int = 8,
) -> ConvergenceReport:
    h = np.asarray(h_list, dtype=float)
    points = default_points() if points is None else np.asarray(points, dtype=float)
    results = pmap(lambda hh: energy_errors(coeffs_family(hh), motion_family(hh), points, t, quad_order), h)
    W_err = np.array([r[0] for r in results])
    K_err = np.array([r[1] for r in results])
    notes = []
    order = np.argsort(-h)
    for name, err in (("W", W_err), ("K", K_err)):
        e = err[order]
        if np.any(np.diff(e) >= 0):
            msg = f"{name} error is not decreasing along decreasing h: {e.tolist()}"
            notes.append(msg)
            warnings.warn(msg, NonMonotoneErrorWarning, stacklevel=2)
    return ConvergenceReport(h, W_err, K_err, _slope(h, W_err), _slope(h, K_err), quad_order, notes)
