"""Acceptance checks, one per criterion; each prints a single PASS/FAIL line."""

import time
import warnings

import numpy as np
import pytest

from gradplate import dispersion, fracture, lattice, reduction, wavesim
from gradplate.ellipticity import Verdict, classify
from gradplate.kinematics import (
    StrainState,
    classical_kinetic,
    energy_densities,
    koiter_energy,
    linearization_consistency,
)
from gradplate.material import REFERENCE, derive_coefficients
from gradplate.motion import FourierMode, SurfaceMotion, TimeLaw

CO = derive_coefficients(REFERENCE)


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line past output capture, then assert."""

    def emit(label: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        assert ok, detail

    return emit


def test_lattice_homogenization(report):
    t0 = time.perf_counter()
    spec = lattice.ChainSpec(N_p=1024, d=0.1)
    kd = spec.wavenumbers(0.2) * spec.d
    gap = lattice.relative_gap(spec, kd / spec.d)
    slope = lattice.gap_slope(spec, kd)
    ls2, lk2 = lattice.identify_lengths(spec, kd)
    diff_err = abs((lk2 - ls2) / (spec.d**2 / 12) - 1)
    elapsed = time.perf_counter() - t0
    ok = gap.max() <= 5e-5 and abs(slope - 4) <= 0.1 and diff_err <= 0.01 and elapsed < 10
    report(
        "lattice homogenization",
        ok,
        f"max gap {gap.max():.3e}, slope {slope:.4f}, ell_k^2-ell_s^2 rel err {diff_err:.2e}, {elapsed:.2f}s",
    )


def test_thickness_reduction_rates(report):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", reduction.NonMonotoneErrorWarning)
        rep = reduction.convergence_study(
            reduction.material_family(REFERENCE),
            reduction.motion_family("mixed"),
            (0.1, 0.05, 0.025, 0.0125),
        )
    elapsed = time.perf_counter() - t0
    ok = rep.slope_W >= 3.8 and rep.slope_K >= 3.4 and elapsed < 30
    report("thickness reduction", ok, f"slope W {rep.slope_W:.3f}, slope kappa {rep.slope_K:.3f}, {elapsed:.2f}s")


def test_classical_limits(report):
    rng = np.random.default_rng(3)
    co = derive_coefficients(REFERENCE.replace(d=0.0))
    sym = lambda a: a + np.swapaxes(a, -1, -2)
    n = 100
    state = StrainState.from_arrays(
        E=sym(rng.normal(size=(n, 2, 2))),
        K=sym(rng.normal(size=(n, 2, 2))),
        Edot=sym(rng.normal(size=(n, 2, 2))),
        ndot=rng.normal(size=(n, 3)),
        velocity=rng.normal(size=(n, 3)),
        grad_velocity=rng.normal(size=(n, 2, 3)),
    )
    U, K = energy_densities(state, co)
    errU = np.max(np.abs(U - koiter_energy(state, co)) / np.abs(koiter_energy(state, co)))
    errK = np.max(np.abs(K - classical_kinetic(state, co)) / np.abs(classical_kinetic(state, co)))
    report("classical limits", errU <= 1e-12 and errK <= 1e-12, f"stored rel err {errU:.2e}, kinetic rel err {errK:.2e}")


def test_ellipticity_classification(report):
    t0 = time.perf_counter()
    motion = SurfaceMotion.fourier([FourierMode(2, 1, 1, 0.3), FourierMode(0, 2, 0, 0.1), FourierMode(1, 0, 1, 0.2, 0.4)])
    strong = classify(CO, motion, 10_000, rng_seed=1)
    weak = classify(CO.with_lengths(0.0, CO.ell_k), motion, 10_000, rng_seed=1)
    elapsed = time.perf_counter() - t0
    ok = (
        strong.verdict is Verdict.STRONGLY_ELLIPTIC
        and strong.min_value > 0
        and weak.verdict is Verdict.LEGENDRE_HADAMARD_ONLY
        and weak.tangent_max <= 1e-12
        and weak.normal_min > 0
        and elapsed < 5
    )
    report(
        "ellipticity",
        ok,
        f"min (ell_s>0) {strong.min_value:.3e}, tangent max (ell_s=0) {weak.tangent_max:.1e}, "
        f"normal min {weak.normal_min:.3e}, {elapsed:.2f}s",
    )


def test_dispersion_branches(report):
    rng = np.random.default_rng(5)
    ks = rng.uniform(-100, 100, size=(100, 2))
    eig_err = 0.0
    for k in ks:
        ev = np.sort(np.linalg.eigvalsh(dispersion.acoustical_tensor(CO, k)))
        t = dispersion.branch_velocities(CO, np.hypot(*k))
        want = np.sort([t.cL2[0], t.cT2[0], t.cN2[0]])
        eig_err = max(eig_err, np.max(np.abs(ev - want) / want))
    limit = dispersion.short_wave_limit(CO)["L"]
    kk = np.geomspace(1, 1e7, 300)
    approach = np.abs(dispersion.cL2(CO, kk) - limit)
    monotone = bool(np.all(np.diff(approach) < 0))
    closed = CO.a / CO.rho_s * CO.ell_s2 / (CO.c * CO.q + CO.ell_k2)
    limit_err = max(abs(dispersion.cL2(CO, 1e9) - closed), abs(limit - closed)) / closed
    cl = dispersion.cL2(CO.classical(), np.geomspace(1, 1e9, 300))
    classical_vanishes = bool(np.all(np.diff(cl) < 0) and cl[-1] < 1e-12 * dispersion.cL2(CO.classical(), 0.0))
    h, nu = CO.h, CO.nu
    want_N, want_L = 12 / h**2, 12 / h**2 * (2 + (1 / nu - 1) ** 2)
    cross_err = max(
        abs(dispersion.locate_crossing(CO, "N") / want_N - 1), abs(dispersion.locate_crossing(CO, "L") / want_L - 1)
    )
    ok = eig_err <= 1e-14 and monotone and limit_err <= 1e-12 and abs(limit - 0.457143) < 5e-7
    ok = ok and classical_vanishes and cross_err <= 1e-9
    report(
        "dispersion",
        ok,
        f"eig rel err {eig_err:.1e}, limit {limit:.6f} (err {limit_err:.1e}, monotone {monotone}), "
        f"classical -> 0 {classical_vanishes}, crossing rel err {cross_err:.1e}",
    )


def test_wave_simulation(report):
    t0 = time.perf_counter()
    sim = wavesim.Simulator(CO, 64)
    k = (3, 2)
    kn = np.hypot(*k)
    speed_err = 0.0
    for branch in "LTN":
        m = wavesim.measure_phase_velocity(CO, k, branch, sim=sim)
        want = np.sqrt(dispersion.branch_value(CO, kn, branch))
        speed_err = max(speed_err, abs(m.speed - want) / want)
    drift = 0.0
    for branch in "LTN":
        om, pol = sim.branch_mode(k, branch)
        s = wavesim.ModalState.zeros(64).with_mode(k, pol, -1j * om * pol)
        e0 = sim.total_energy(s)
        drift = max(drift, abs(sim.total_energy(sim.propagate_exact(s, 1000 * 2 * np.pi / om)) - e0) / e0)
    om, pol = sim.branch_mode(k, "L")
    s = wavesim.ModalState.zeros(64).with_mode(k, pol, -1j * om * pol)
    T = 20 * np.pi / om
    exact = sim.propagate_exact(s, T)
    base = T / np.ceil(T / sim.dt_max)
    steps = np.array([1, 0.5, 0.25, 0.125]) * base
    errs = [np.max(np.abs(sim.propagate_rk4(s, T, dt=dt).x - exact.x)) for dt in steps]
    slope = np.polyfit(np.log(steps), np.log(errs), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = speed_err <= 1e-10 and drift < 1e-10 and abs(slope - 4) <= 0.2 and elapsed < 20
    report(
        "wave simulation",
        ok,
        f"phase speed rel err {speed_err:.1e}, energy drift {drift:.1e}, rk4 slope {slope:.3f}, {elapsed:.2f}s",
    )


def _sin(component, m1, m2, amp=1.0, law=None):
    return FourierMode(component, m1, m2, amp, -np.pi / 2, law or TimeLaw())


DIRECTION_FIELDS = {
    "in-plane shear": SurfaceMotion.fourier([_sin(1, 1, 0)]),
    "deflection": SurfaceMotion.fourier([_sin(2, 1, 0)]),
    "time-dependent mixed": SurfaceMotion.fourier(
        [_sin(0, 1, 2, law=TimeLaw.parse("cos(1)")), FourierMode(2, 0, 1, 0.5, 0.0, TimeLaw.parse("sin(1)"))]
    ),
}


def test_linearization_consistency(report):
    slopes = {name: linearization_consistency(CO, field).slope for name, field in DIRECTION_FIELDS.items()}
    ok = all(abs(s - 2) <= 0.1 for s in slopes.values())
    report("linearization", ok, ", ".join(f"{n} {s:.4f}" for n, s in slopes.items()))


def test_fracture_solver(report):
    t0 = time.perf_counter()
    x = np.cos((np.arange(50) + 0.5) * np.pi / 50) * 0.999
    id_err = max(
        np.max(np.abs(fracture.finite_hilbert(lambda s: np.sqrt(1 - s * s), x) - x)),
        np.max(np.abs(fracture.finite_hilbert(np.ones_like, x) - np.log((1 + x) / (1 - x)) / np.pi)),
        np.max(np.abs(fracture.finite_hilbert(lambda s: -s / np.sqrt(1 - s * s), x) - 1)),
    )
    gamma = 1.7
    f_cl = fracture.classical_reference(gamma)
    cl_err = np.max(np.abs(fracture.finite_hilbert(lambda s: f_cl(s, 1), x) - gamma))

    a = fracture.solve_crack(fracture.CrackConfig(0.1, 1e-3, 1.0, 128))
    b = fracture.solve_crack(fracture.CrackConfig(0.1, 1e-3, 1.0, 256))
    grid = np.cos(np.linspace(0, np.pi, 4001))
    change = np.max(np.abs(a.evaluate(grid) - b.evaluate(grid)))
    na, nb = a.sup_norms(), b.sup_norms()
    norm_change = np.max(np.abs(na - nb) / nb)
    finite = bool(np.all(np.isfinite(na)))

    scaled = fracture.solve_crack(fracture.CrackConfig(0.1, 1e-3, -3.0, 128))
    lin_err = np.max(np.abs(scaled.coeffs + 3.0 * a.coeffs)) / (3.0 * np.max(np.abs(a.coeffs)))

    rep = fracture.tip_diagnostics(0.1, [8e-3, 4e-3, 2e-3, 1e-3], N=128)
    elapsed = time.perf_counter() - t0
    ok = id_err <= 1e-8 and cl_err <= 1e-8 and change < 1e-8 and finite and norm_change < 1e-3
    ok = ok and lin_err <= 1e-13 and rep.increasing and elapsed < 60
    report(
        "fracture",
        ok,
        f"identities {id_err:.1e}, classical {cl_err:.1e}, N-change {change:.1e}, "
        f"C4 norm change {norm_change:.1e}, linearity {lin_err:.1e}, "
        f"tip f'' {np.round(rep.max_f2, 3).tolist()}, {elapsed:.2f}s",
    )
