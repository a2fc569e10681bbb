"""Time-domain simulation of the linearized plate equations on a periodic cell.

Fields on ``[0, 2*pi)^2`` are represented by Fourier amplitudes on an N x N
grid of integer wavevectors: ``u(Y) = sum_k x_k exp(i k.Y)``, so
``x = fft2(u) / N**2``.  Each wavevector obeys ``M(k) x'' + K(k) x = f_k``
independently.  Component order is (u1, u2, w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .dispersion import WaveVector
from .material import DerivedCoeffs

Forcing = Union[None, np.ndarray, Callable[[float], np.ndarray]]


class StepSizeError(ValueError):
    """RK4 step exceeds the stability bound."""


class BranchMixingError(ValueError):
    """Initial polarization is not an eigendirection of the requested branch."""


@dataclass(frozen=True)
class ModalSymbol:
    M: np.ndarray
    K: np.ndarray


def assemble_symbol(coeffs: DerivedCoeffs, k) -> ModalSymbol:
    """Mass and stiffness matrices at wavevector(s) ``k`` of shape (..., 2)."""
    k = np.asarray(k, dtype=float)
    batch = k.shape[:-1]
    k2 = np.sum(k * k, axis=-1)
    kk = k[..., :, None] * k[..., None, :]
    I2 = np.eye(2)
    nu, a, rho_s = coeffs.nu, coeffs.a, coeffs.rho_s
    M = np.zeros(batch + (3, 3))
    K = np.zeros(batch + (3, 3))
    M[..., :2, :2] = rho_s * ((1 + coeffs.ell_k2 * k2)[..., None, None] * I2 + coeffs.c * coeffs.q * kk)
    K[..., :2, :2] = (a * (1 + coeffs.ell_s2 * k2))[..., None, None] * (
        0.5 * (1 + nu) * kk + 0.5 * (1 - nu) * k2[..., None, None] * I2
    )
    M[..., 2, 2] = rho_s * (1 + (coeffs.c + coeffs.ell_k2) * k2)
    K[..., 2, 2] = coeffs.b_coef * k2**2
    return ModalSymbol(M, K)


def grid_wavevectors(N: int) -> np.ndarray:
    """Integer wavevectors in FFT order, shape (N, N, 2)."""
    if N < 8 or N % 2:
        raise ValueError("grid size must be even and at least 8")
    freq = np.fft.fftfreq(N, 1.0 / N)
    return np.stack(np.meshgrid(freq, freq, indexing="ij"), axis=-1)


@dataclass(frozen=True)
class ModalBasis:
    """M-orthonormal generalized eigenvectors: ``Phi^T M Phi = I``, ``Phi^T K Phi = diag(omega^2)``."""

    omega2: np.ndarray
    Phi: np.ndarray
    PhiT_M: np.ndarray

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(self.omega2)


def modal_basis(symbol: ModalSymbol) -> ModalBasis:
    L = np.linalg.cholesky(symbol.M)
    Linv = np.linalg.inv(L)
    A = Linv @ symbol.K @ np.swapaxes(Linv, -1, -2)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    w, Q = np.linalg.eigh(A)
    Phi = np.swapaxes(Linv, -1, -2) @ Q
    return ModalBasis(np.maximum(w, 0.0), Phi, np.swapaxes(Phi, -1, -2) @ symbol.M)


@dataclass(frozen=True)
class ModalState:
    x: np.ndarray
    v: np.ndarray
    t: float = 0.0

    @property
    def N(self) -> int:
        return self.x.shape[0]

    @staticmethod
    def zeros(N: int) -> ModalState:
        grid_wavevectors(N)
        z = np.zeros((N, N, 3), dtype=complex)
        return ModalState(z, z.copy(), 0.0)

    def with_mode(self, k, amplitude, velocity=None) -> ModalState:
        """Add a real plane wave: amplitude at ``k`` and its conjugate at ``-k``."""
        k1, k2 = (int(round(c)) for c in k)
        N = self.N
        amp = np.asarray(amplitude, dtype=complex)
        vel = np.zeros(3, dtype=complex) if velocity is None else np.asarray(velocity, dtype=complex)
        x, v = self.x.copy(), self.v.copy()
        i, j = k1 % N, k2 % N
        ic, jc = -k1 % N, -k2 % N
        if (i, j) == (ic, jc):
            if np.any(amp.imag) or np.any(vel.imag):
                raise ValueError("self-conjugate wavevector needs real amplitudes")
            x[i, j] += amp
            v[i, j] += vel
        else:
            x[i, j] += amp
            v[i, j] += vel
            x[ic, jc] += np.conj(amp)
            v[ic, jc] += np.conj(vel)
        return ModalState(x, v, self.t)

    def physical(self) -> tuple[np.ndarray, np.ndarray]:
        """Displacement and velocity fields on the grid, complex arrays of shape (3, N, N)."""
        u = np.fft.ifft2(self.x, axes=(0, 1)) * self.N**2
        ud = np.fft.ifft2(self.v, axes=(0, 1)) * self.N**2
        return np.moveaxis(u, -1, 0), np.moveaxis(ud, -1, 0)

    def conjugate_defect(self) -> float:
        """Max |x_k - conj(x_{-k})| over the grid (zero for real fields)."""
        def flip(a):
            return np.roll(a[::-1, ::-1], 1, axis=(0, 1))

        return float(
            max(np.abs(self.x - np.conj(flip(self.x))).max(), np.abs(self.v - np.conj(flip(self.v))).max())
        )


class Simulator:
    """Precomputed symbols and modal bases for one material and grid size."""

    def __init__(self, coeffs: DerivedCoeffs, N: int):
        self.coeffs = coeffs
        self.N = N
        self.k = grid_wavevectors(N)
        self.symbol = assemble_symbol(coeffs, self.k)
        self.basis = modal_basis(self.symbol)
        self.omega_max = float(self.basis.omega.max())

    @property
    def dt_max(self) -> float:
        """RK4 stability-derived step bound 0.5 * (2 / omega_max)."""
        return 1.0 / self.omega_max

    # -- diagnostics --------------------------------------------------------
    def total_energy(self, state: ModalState) -> float:
        M, K = self.symbol.M, self.symbol.K
        kin = np.einsum("...i,...ij,...j->...", np.conj(state.v), M, state.v).real
        pot = np.einsum("...i,...ij,...j->...", np.conj(state.x), K, state.x).real
        return 0.5 * math.fsum(np.ravel(kin)) + 0.5 * math.fsum(np.ravel(pot))

    def linear_momentum(self, state: ModalState) -> np.ndarray:
        """Total momentum of the cell: area times rho_s times mean velocity."""
        return (2 * np.pi) ** 2 * self.coeffs.rho_s * state.v[0, 0].real

    # -- integrators --------------------------------------------------------
    def propagate_exact(self, state: ModalState, duration: float, forcing: Optional[np.ndarray] = None) -> ModalState:
        """Closed-form per-mode propagator; ``forcing`` must be constant in time."""
        B = self.basis
        z0 = np.einsum("...ij,...j->...i", B.PhiT_M, state.x)
        zd0 = np.einsum("...ij,...j->...i", B.PhiT_M, state.v)
        om = B.omega
        tau = duration
        c = np.cos(om * tau)
        s_over = tau * np.sinc(om * tau / np.pi)  # sin(om tau)/om, tau at om = 0
        z = z0 * c + zd0 * s_over
        zd = -(om**2) * s_over * z0 + zd0 * c
        if forcing is not None:
            g = np.einsum("...ji,...j->...i", B.Phi, forcing)
            half = 0.5 * tau**2 * np.sinc(om * tau / (2 * np.pi)) ** 2  # (1 - cos)/om^2
            z = z + g * half
            zd = zd + g * s_over
        x = np.einsum("...ij,...j->...i", B.Phi, z)
        v = np.einsum("...ij,...j->...i", B.Phi, zd)
        return ModalState(x, v, state.t + duration)

    def propagate_rk4(
        self, state: ModalState, duration: float, forcing: Forcing = None, dt: Optional[float] = None
    ) -> ModalState:
        """Classical RK4 on ``M x'' = -K x + f`` for every active wavevector.

        Wavevectors with zero state and zero forcing stay zero and are skipped.
        The step bound uses the largest frequency on the whole grid.
        """
        bound = self.dt_max
        if dt is None:
            n_steps = max(1, math.ceil(duration / bound))
        else:
            if dt > bound * (1 + 1e-12):
                raise StepSizeError(f"dt={dt} exceeds the RK4 bound {bound}")
            n_steps = max(1, round(duration / dt))
            if not math.isclose(n_steps * dt, duration, rel_tol=1e-9, abs_tol=1e-15):
                raise ValueError("duration must be an integer multiple of dt")
        h = duration / n_steps
        if callable(forcing):
            active = np.ones(self.k.shape[:2], dtype=bool)
        else:
            active = np.any(state.x != 0, axis=-1) | np.any(state.v != 0, axis=-1)
            if forcing is not None:
                active |= np.any(np.asarray(forcing) != 0, axis=-1)
        idx = np.nonzero(active)
        Minv = np.linalg.inv(self.symbol.M[idx])
        K = self.symbol.K[idx]
        x = state.x[idx].copy()
        v = state.v[idx].copy()

        def force(t):
            if forcing is None:
                return 0.0
            f = forcing(t) if callable(forcing) else forcing
            return np.asarray(f)[idx]

        def acc(t, xx):
            return np.einsum("nij,nj->ni", Minv, force(t) - np.einsum("nij,nj->ni", K, xx))

        t = state.t
        for _ in range(n_steps):
            k1x, k1v = v, acc(t, x)
            k2x, k2v = v + 0.5 * h * k1v, acc(t + 0.5 * h, x + 0.5 * h * k1x)
            k3x, k3v = v + 0.5 * h * k2v, acc(t + 0.5 * h, x + 0.5 * h * k2x)
            k4x, k4v = v + h * k3v, acc(t + h, x + h * k3x)
            x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
            t += h
        X, V = state.x.copy(), state.v.copy()
        X[idx], V[idx] = x, v
        return ModalState(X, V, state.t + duration)

    def evolve(self, state: ModalState, duration: float, method: str = "modal-exact", forcing: Forcing = None, dt=None):
        if method in ("modal-exact", "exact"):
            if callable(forcing):
                raise ValueError("modal-exact propagation needs constant forcing; use rk4")
            return self.propagate_exact(state, duration, None if forcing is None else np.asarray(forcing))
        if method == "rk4":
            return self.propagate_rk4(state, duration, forcing, dt)
        raise ValueError(f"unknown method {method!r}")

    # -- branches -----------------------------------------------------------
    def branch_mode(self, k, branch: str):
        """(omega, unit polarization) of a branch at the grid wavevector ``k``."""
        kv = WaveVector(*k)
        pol = {
            "L": np.append(kv.unit, 0.0),
            "T": np.append(kv.perp, 0.0),
            "N": np.array([0.0, 0.0, 1.0]),
        }[branch]
        sym = assemble_symbol(self.coeffs, kv.vec)
        omega2 = (pol @ sym.K @ pol) / (pol @ sym.M @ pol)
        return math.sqrt(omega2), pol


def evolve(state: ModalState, duration: float, coeffs: DerivedCoeffs, method: str = "modal-exact", forcing=None, dt=None):
    return Simulator(coeffs, state.N).evolve(state, duration, method, forcing, dt)


def total_energy(state: ModalState, coeffs: DerivedCoeffs) -> float:
    return Simulator(coeffs, state.N).total_energy(state)


@dataclass(frozen=True)
class PhaseMeasurement:
    speed: float
    omega: float
    times: np.ndarray
    phases: np.ndarray


def measure_phase_velocity(
    coeffs: DerivedCoeffs,
    k,
    branch: str,
    N: int = 64,
    polarization=None,
    method: str = "modal-exact",
    periods: float = 10.0,
    samples: int = 64,
    sim: Optional[Simulator] = None,
) -> PhaseMeasurement:
    """Phase speed of a traveling plane wave, fitted from its phase rotation.

    The wave is launched along the branch polarization (or ``polarization``,
    which must be parallel to it within 1e-10) with the rate of a forward
    traveling wave; the complex amplitude at ``k`` is sampled over the window
    and the unwrapped phase slope gives omega.
    """
    sim = sim or Simulator(coeffs, N)
    omega0, pol = sim.branch_mode(k, branch)
    if polarization is not None:
        p = np.asarray(polarization, dtype=float)
        p = p / np.linalg.norm(p)
        if np.linalg.norm(p - np.dot(p, pol) * pol) > 1e-10:
            raise BranchMixingError(f"polarization {polarization} mixes branches at k={tuple(k)}")
        pol = np.sign(np.dot(p, pol)) * pol
    if omega0 == 0:
        raise ValueError("branch has zero frequency at this wavevector")
    state = ModalState.zeros(sim.N).with_mode(k, pol, -1j * omega0 * pol)
    window = periods * 2 * np.pi / omega0
    times = np.linspace(0.0, window, samples + 1)
    i, j = int(k[0]) % sim.N, int(k[1]) % sim.N
    amps = []
    if method in ("modal-exact", "exact"):
        for t in times:
            amps.append(sim.propagate_exact(state, t).x[i, j] @ pol)
    else:
        s = state
        amps.append(s.x[i, j] @ pol)
        for t0, t1 in zip(times[:-1], times[1:]):
            s = sim.evolve(s, t1 - t0, method)
            amps.append(s.x[i, j] @ pol)
    phases = np.unwrap(np.angle(np.array(amps)))
    omega = -np.polyfit(times, phases, 1)[0]
    return PhaseMeasurement(float(omega / np.linalg.norm(k)), float(omega), times, phases)
