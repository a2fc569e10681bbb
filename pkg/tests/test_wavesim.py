import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from gradplate.dispersion import branch_value
from gradplate.material import REFERENCE, derive_coefficients
from gradplate.wavesim import (
    BranchMixingError,
    ModalState,
    Simulator,
    StepSizeError,
    assemble_symbol,
    grid_wavevectors,
    measure_phase_velocity,
)

CO = derive_coefficients(REFERENCE)
SIM16 = Simulator(CO, 16)


def _wave(sim, k, branch, amp=1.0):
    om, pol = sim.branch_mode(k, branch)
    return om, ModalState.zeros(sim.N).with_mode(k, amp * pol, -1j * om * amp * pol)


def test_grid_requires_even_size():
    with pytest.raises(ValueError):
        grid_wavevectors(15)
    assert grid_wavevectors(8).shape == (8, 8, 2)


@pytest.mark.parametrize("branch", ["L", "T", "N"])
def test_branch_frequencies_match_dispersion(branch):
    k = (2, 1)
    om, _ = SIM16.branch_mode(k, branch)
    kn = np.hypot(*k)
    assert_allclose(om**2, kn**2 * branch_value(CO, kn, branch), rtol=1e-14)


def test_symbol_is_symmetric_positive_definite():
    sym = assemble_symbol(CO, grid_wavevectors(8))
    assert_allclose(sym.M, np.swapaxes(sym.M, -1, -2), atol=1e-16)
    assert np.all(np.linalg.eigvalsh(sym.M) > 0)
    assert np.all(np.linalg.eigvalsh(sym.K) > -1e-15)


def test_normal_mode_frequency_frozen():
    # omega^2 = k^4 b / (rho_s (1 + (c + lk^2) k^2)) at k = (1, 0), hand-evaluated
    om, _ = SIM16.branch_mode((1, 0), "N")
    assert_allclose(om, 0.0364390, rtol=1e-6)


def test_exact_propagation_returns_after_one_period():
    om, s = _wave(SIM16, (1, 1), "T")
    back = SIM16.propagate_exact(s, 2 * np.pi / om)
    assert_allclose(back.x, s.x, atol=1e-13)


def test_rk4_rejects_oversized_step():
    _, s = _wave(SIM16, (1, 0), "L")
    with pytest.raises(StepSizeError):
        SIM16.propagate_rk4(s, 1.0, dt=2 * SIM16.dt_max)


def test_mixed_polarization_rejected():
    with pytest.raises(BranchMixingError):
        measure_phase_velocity(CO, (1, 0), "L", N=16, polarization=(1, 1, 0), sim=SIM16)


def test_physical_field_is_real():
    _, s = _wave(SIM16, (2, -3), "N", 0.1)
    u, _ = s.physical()
    assert np.max(np.abs(u.imag)) < 1e-15
    assert s.conjugate_defect() == 0


@given(st.integers(-7, 7), st.integers(-7, 7), st.sampled_from("LTN"), st.floats(0.1, 50))
def test_exact_propagation_conserves_energy(k1, k2, branch, duration):
    if (k1, k2) == (0, 0):
        return
    _, s = _wave(SIM16, (k1, k2), branch)
    e0 = SIM16.total_energy(s)
    e1 = SIM16.total_energy(SIM16.propagate_exact(s, duration))
    assert_allclose(e1, e0, rtol=1e-12)


@given(st.integers(-7, 7), st.integers(-7, 7), st.floats(0.1, 20))
def test_momentum_zero_without_mean_mode(k1, k2, duration):
    if (k1, k2) == (0, 0):
        return
    _, s = _wave(SIM16, (k1, k2), "L")
    assert_allclose(SIM16.linear_momentum(SIM16.propagate_exact(s, duration)), 0, atol=1e-15)
