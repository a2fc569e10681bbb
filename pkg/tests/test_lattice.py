import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from gradplate.lattice import (
    ChainSpec,
    ChainState,
    IllConditionedFit,
    InstabilityError,
    chain_energy,
    chain_momentum,
    discrete_dispersion,
    dispersion_table,
    fit_length_scales,
    fit_standing_wave_frequency,
    identify_lengths,
    relative_gap,
    step_verlet,
)


def test_gap_leading_term():
    # series in x = kd: discrete 1 - x^2/12 + x^4/360, continuum 1 - x^2/12 + x^4/72, gap x^4/90
    spec = ChainSpec(256, 0.1)
    kd = 0.01
    assert_allclose(relative_gap(spec, kd / spec.d), kd**4 / 90, rtol=1e-3)


def test_table_columns_consistent():
    rows = dispersion_table(ChainSpec(64, 0.2), 0.5)
    assert rows[0].kd == pytest.approx(2 * np.pi / 64)
    for r in rows:
        assert r.rel_gap == pytest.approx(abs(r.omega2_discrete - r.omega2_continuum) / r.omega2_discrete)


def test_identified_difference_matches_lattice():
    spec = ChainSpec(512, 0.05)
    ls2, lk2 = identify_lengths(spec, np.linspace(0.02, 0.2, 12))
    assert_allclose(lk2 - ls2, spec.d**2 / 12, rtol=1e-3)


def test_fit_needs_three_points():
    with pytest.raises(IllConditionedFit):
        fit_length_scales([0.1, 0.1, 0.2], [1, 1, 1], 0.1, 0.0)


def test_identification_rejects_large_kd():
    with pytest.raises(ValueError):
        identify_lengths(ChainSpec(64, 0.1), [0.1, 0.2, 0.5])


def test_verlet_bound_enforced():
    spec = ChainSpec(16, 0.1)
    with pytest.raises(InstabilityError):
        step_verlet(spec, ChainState.zeros(spec), 2.0 / spec.omega_max, 1)


def test_verlet_standing_wave_frequency():
    fitted, exact = fit_standing_wave_frequency(ChainSpec(32, 0.1), j=2, periods=10, dt_fraction=0.02)
    assert_allclose(fitted, exact, rtol=1e-4)


@given(st.integers(0, 1000))
def test_verlet_energy_bounded_and_momentum_conserved(seed):
    rng = np.random.default_rng(seed)
    spec = ChainSpec(16, 0.1)
    s0 = ChainState(rng.normal(size=16), rng.normal(size=16))
    s1 = step_verlet(spec, s0, 0.1 / spec.omega_max, 200)
    assert_allclose(chain_momentum(spec, s1), chain_momentum(spec, s0), atol=1e-11)
    assert_allclose(chain_energy(spec, s1), chain_energy(spec, s0), rtol=1e-2)


@given(st.floats(1e-3, np.pi))
def test_discrete_dispersion_bounded(kd):
    spec = ChainSpec(16, 0.1)
    w2 = discrete_dispersion(spec, kd / spec.d)
    assert 0 < w2 <= spec.omega_max**2 * (1 + 1e-15)


def test_synthetic_continuum_data_recovered_exactly():
    from gradplate.lattice import ShearCoeffs1D, continuum_dispersion

    spec = ChainSpec(512, 0.1)
    kd = np.linspace(0.02, 0.2, 10)
    omega2 = continuum_dispersion(ShearCoeffs1D.from_chain(spec), kd / spec.d)
    ls2, lk2 = identify_lengths(spec, kd, omega2=omega2)
    assert_allclose(lk2 - ls2, spec.d**2 / 12, rtol=1e-10)


def test_halving_spacing_quarters_difference():
    kd = np.linspace(0.02, 0.2, 10)
    a = np.subtract(*identify_lengths(ChainSpec(512, 0.1), kd)[::-1])
    b = np.subtract(*identify_lengths(ChainSpec(512, 0.05), kd)[::-1])
    assert_allclose(b / a, 0.25, rtol=1e-10)
