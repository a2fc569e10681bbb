import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy.spatial.transform import Rotation

from gradplate.kinematics import (
    DegenerateImmersion,
    StrainState,
    energy_densities,
    geometry,
    koiter_energy,
    linearized_operator,
    momentum_flux_divergence,
    strain_state,
    stress_vectors,
)
from gradplate.material import REFERENCE, derive_coefficients
from gradplate.motion import FourierMode, SurfaceMotion, TimeLaw

PTS = np.array([[0.3, 0.7], [1.9, 4.2], [5.0, 2.5]])
WAVY = SurfaceMotion.fourier(
    [
        FourierMode(0, 1, 0, 0.3, 0.1, TimeLaw.parse("cos(1)")),
        FourierMode(2, 1, 1, 0.5, 0.2, TimeLaw.parse("sin(2)")),
        FourierMode(1, 0, 2, 0.2, 0.0),
    ],
    eps=0.1,
)


def test_identity_is_unstrained(ref):
    s = strain_state(SurfaceMotion.identity(), PTS)
    assert_allclose(s.E, 0, atol=1e-15)
    assert_allclose(s.K, 0, atol=1e-15)
    U, K = energy_densities(s, ref)
    assert_allclose(U, 0, atol=1e-30)
    assert_allclose(K, 0, atol=1e-30)


def test_uniform_stretch_strain():
    e = 0.01
    s = strain_state(SurfaceMotion.stretch(e), PTS)
    # E = ((1+e)^2 - 1)/2 I
    assert_allclose(s.E, np.broadcast_to((e + e * e / 2) * np.eye(2), s.E.shape), rtol=1e-14)


def test_uniform_stretch_stress_vector(ref):
    e = 0.01
    sv = stress_vectors(SurfaceMotion.stretch(e), None, ref, PTS)
    # T^1 = a (1+nu) (e + e^2/2) (1+e) e1 for y = (1+e) Y
    want = ref.a * (1 + ref.nu) * (e + e * e / 2) * (1 + e)
    assert_allclose(sv.T[:, 0], np.broadcast_to([want, 0, 0], (3, 3)), atol=1e-16)
    assert_allclose(sv.M, 0, atol=1e-16)
    assert_allclose(sv.Pi, 0, atol=1e-16)


def test_cylinder_curvature():
    R = 10.0
    s = strain_state(SurfaceMotion.cylinder(R), PTS)
    assert_allclose(s.E, 0, atol=1e-15)
    K = np.zeros((3, 2, 2))
    K[:, 1, 1] = 1 / R
    assert_allclose(np.abs(s.K), K, atol=1e-15)


def test_geometry_normal_is_unit_and_orthogonal():
    g = geometry(WAVY, PTS, 0.3)
    assert_allclose(np.linalg.norm(g.normal, axis=-1), 1, rtol=1e-14)
    assert_allclose(np.einsum("pai,pi->pa", g.tangents, g.normal), 0, atol=1e-14)
    assert_allclose(np.einsum("pai,pbi->pab", g.dual, g.tangents), np.broadcast_to(np.eye(2), (3, 2, 2)), atol=1e-14)


def test_degenerate_immersion_raises():
    collapse = SurfaceMotion.affine([[-1, 0], [0, 0], [0, 0]])
    with pytest.raises(DegenerateImmersion):
        strain_state(collapse, PTS)


@given(st.integers(0, 10_000), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_energies_invariant_under_rigid_motion(seed, shift):
    co = derive_coefficients(REFERENCE)
    Q = Rotation.random(random_state=seed).as_matrix()
    a = energy_densities(strain_state(WAVY, PTS, 0.4), co)
    b = energy_densities(strain_state(WAVY.rigidly_moved(Q, shift), PTS, 0.4), co)
    assert_allclose(b, a, rtol=1e-11, atol=1e-20)


@given(st.integers(0, 10_000))
def test_stored_energy_nonnegative(seed):
    rng = np.random.default_rng(seed)
    co = derive_coefficients(REFERENCE)
    E = rng.normal(size=(10, 2, 2))
    E = E + np.swapaxes(E, -1, -2)
    K = rng.normal(size=(10, 2, 2))
    K = K + np.swapaxes(K, -1, -2)
    dE = rng.normal(size=(10, 2, 2, 2))
    dE = dE + np.swapaxes(dE, -1, -2)
    U, _ = energy_densities(StrainState.from_arrays(E, K, dE=dE), co)
    assert np.all(U >= 0)


def test_zero_spacing_reduces_to_koiter(rng):
    co = derive_coefficients(REFERENCE.replace(d=0.0))
    E = rng.normal(size=(20, 2, 2))
    K = rng.normal(size=(20, 2, 2))
    s = StrainState.from_arrays(E + np.swapaxes(E, -1, -2), K + np.swapaxes(K, -1, -2))
    assert_allclose(energy_densities(s, co)[0], koiter_energy(s, co), rtol=1e-13)


def test_small_motion_matches_linearized_operator(ref):
    # frozen: the first-order agreement must improve by about 4x per halving
    field = WAVY.scaled(1.0)
    lin = linearized_operator(field, ref, PTS, 0.7)
    errs = []
    for delta in (1e-3, 5e-4):
        nonlin = momentum_flux_divergence(field.scaled(delta), ref, PTS, 0.7)
        errs.append(np.max(np.abs(nonlin - delta * lin)))
    assert 3.5 < errs[0] / errs[1] < 4.5
