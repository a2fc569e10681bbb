"""Plane-wave dispersion of the linearized plate equations.

Squared phase velocities of the longitudinal (L), tangentially transverse (T)
and normally transverse (N) branches, their classical counterparts obtained
with both length scales set to zero, and the wavenumbers where the two models
exchange order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .material import DerivedCoeffs

BRANCHES = ("L", "T", "N")


@dataclass(frozen=True)
class WaveVector:
    k1: float
    k2: float

    def __post_init__(self):
        if self.norm == 0:
            raise ValueError("wave vector must be nonzero")

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.k1, self.k2], dtype=float)

    @property
    def norm(self) -> float:
        return float(np.hypot(self.k1, self.k2))

    @property
    def unit(self) -> np.ndarray:
        return self.vec / self.norm

    @property
    def perp(self) -> np.ndarray:
        """Unit vector (-k2, k1)/|k|."""
        return np.array([-self.k2, self.k1]) / self.norm


def cL2(coeffs: DerivedCoeffs, k):
    k2 = np.asarray(k, dtype=float) ** 2
    return coeffs.a / coeffs.rho_s * (1 + coeffs.ell_s2 * k2) / (1 + (coeffs.c * coeffs.q + coeffs.ell_k2) * k2)


def cT2(coeffs: DerivedCoeffs, k):
    k2 = np.asarray(k, dtype=float) ** 2
    return coeffs.a * (1 - coeffs.nu) / (2 * coeffs.rho_s) * (1 + coeffs.ell_s2 * k2) / (1 + coeffs.ell_k2 * k2)


def cN2(coeffs: DerivedCoeffs, k):
    k2 = np.asarray(k, dtype=float) ** 2
    return coeffs.b_coef / coeffs.rho_s * k2 / (1 + (coeffs.c + coeffs.ell_k2) * k2)


def branch_value(coeffs: DerivedCoeffs, k, branch: str):
    return {"L": cL2, "T": cT2, "N": cN2}[branch](coeffs, k)


def acoustical_tensor(coeffs: DerivedCoeffs, k) -> np.ndarray:
    """Symmetric 3x3 tensor whose eigenpairs are (c^2, polarization)."""
    kv = k if isinstance(k, WaveVector) else WaveVector(*np.asarray(k, dtype=float))
    khat = np.append(kv.unit, 0.0)
    kperp = np.append(kv.perp, 0.0)
    e3 = np.array([0.0, 0.0, 1.0])
    kn = kv.norm
    return (
        cL2(coeffs, kn) * np.outer(khat, khat)
        + cT2(coeffs, kn) * np.outer(kperp, kperp)
        + cN2(coeffs, kn) * np.outer(e3, e3)
    )


@dataclass(frozen=True)
class BranchTable:
    k: np.ndarray
    cL2: np.ndarray
    cT2: np.ndarray
    cN2: np.ndarray
    cL2_cl: np.ndarray
    cT2_cl: np.ndarray
    cN2_cl: np.ndarray

    COLUMNS = ("k", "cL2", "cT2", "cN2", "cL2_cl", "cT2_cl", "cN2_cl")

    def as_array(self) -> np.ndarray:
        return np.column_stack([getattr(self, name) for name in self.COLUMNS])


def branch_velocities(coeffs: DerivedCoeffs, k) -> BranchTable:
    """Squared phase velocities at |k| (scalar or array; k = 0 allowed)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k < 0):
        raise ValueError("|k| must be nonnegative")
    cl = coeffs.classical()
    return BranchTable(
        k=k,
        cL2=cL2(coeffs, k),
        cT2=cT2(coeffs, k),
        cN2=cN2(coeffs, k),
        cL2_cl=cL2(cl, k),
        cT2_cl=cT2(cl, k),
        cN2_cl=cN2(cl, k),
    )


def short_wave_limit(coeffs: DerivedCoeffs) -> dict:
    """Limits of the squared velocities as |k| -> infinity."""
    c, q = coeffs.c, coeffs.q
    lk2, ls2 = coeffs.ell_k2, coeffs.ell_s2
    L = coeffs.a / coeffs.rho_s * ls2 / (c * q + lk2) if (c * q + lk2) > 0 else np.inf
    T = coeffs.a * (1 - coeffs.nu) / (2 * coeffs.rho_s) * (ls2 / lk2 if lk2 > 0 else (np.inf if ls2 > 0 else 1.0))
    N = coeffs.b_coef / (coeffs.rho_s * (c + lk2))
    return {"L": L, "T": T, "N": N}


def thresholds(coeffs: DerivedCoeffs) -> tuple[float, float]:
    """Closed-form crossing wavenumbers (k_N^2, k_L^2) under the lattice identifications.

    Valid when ell_k^2 = 2 ell_s^2 > 0; below k_N^2 the normal gradient wave is
    faster than its classical counterpart, below k_L^2 the longitudinal one is
    slower.
    """
    if coeffs.ell_s == 0 and coeffs.ell_k == 0:
        raise ValueError("thresholds are inapplicable when both length scales vanish")
    h, nu = coeffs.h, coeffs.nu
    kN2 = 12 / h**2
    return kN2, kN2 * (2 + (1 / nu - 1) ** 2)


def crossing_wavenumbers(coeffs: DerivedCoeffs) -> tuple[float, float]:
    """(k_N^2, k_L^2) from the general coefficient algebra (any length scales)."""
    cl = coeffs.classical()
    b, bc = coeffs.b_coef, cl.b_coef
    den_N = bc * (coeffs.c + coeffs.ell_k2) - b * cl.c
    kN2 = (b - bc) / den_N if den_N != 0 else np.inf
    q = coeffs.q
    num_L = coeffs.c * q + coeffs.ell_k2 - coeffs.ell_s2 - cl.c * q
    den_L = coeffs.ell_s2 * cl.c * q
    kL2 = num_L / den_L if den_L != 0 else np.inf
    return kN2, kL2


def locate_crossing(coeffs: DerivedCoeffs, branch: str, k_lo: float = 1e-3, k_hi: float = 1e6) -> float:
    """k^2 where the gradient and classical branch velocities coincide (root search).

    Uses the relative difference in log k so the bracket spans many decades.
    """
    cl = coeffs.classical()

    def rel(logk):
        k = np.exp(logk)
        g = branch_value(coeffs, k, branch)
        c = branch_value(cl, k, branch)
        return (g - c) / (g + c)

    lo, hi = np.log(k_lo), np.log(k_hi)
    root = brentq(rel, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(np.exp(2 * root))
