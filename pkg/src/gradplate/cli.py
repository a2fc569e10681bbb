"""Command-line front end: ``gradplate <subcommand> [options]``.

Every option may also be given in a ``--config FILE`` of ``key = value``
lines (keys spelled as the long option without dashes, e.g. ``k_max``).
Command-line values override file values.  Exit codes: 0 success,
2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import dispersion, ellipticity, fracture, lattice, reduction, wavesim
from .io import ConfigError, ReportError, RunConfig, read_key_values, summary_text, write_csv, write_summary, write_svg
from .kinematics import DegenerateImmersion
from .material import REFERENCE, MaterialError, derive_coefficients, load_material
from .motion import SurfaceMotion, load_motion

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

NUMERICAL_ERRORS = (
    np.linalg.LinAlgError,
    ArithmeticError,
    DegenerateImmersion,
    ellipticity.EllipticityViolation,
    wavesim.StepSizeError,
    wavesim.BranchMixingError,
    lattice.InstabilityError,
    lattice.IllConditionedFit,
    reduction.CompressionCollapse,
    reduction.SingularCorrector,
    fracture.SingularSystem,
    fracture.NonConvergence,
)


class ConfigWarning(UserWarning):
    pass


def _float_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_pair(text) -> list[int]:
    vals = text if isinstance(text, (list, tuple)) else str(text).split(",")
    try:
        pair = [int(v) for v in vals]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers 'k1,k2', got {text!r}") from None
    if len(pair) != 2:
        raise argparse.ArgumentTypeError(f"expected two integers 'k1,k2', got {text!r}")
    return pair


# name -> (type, default, help, choices)
OPTIONS: dict[str, dict[str, tuple]] = {
    "material": {},
    "ellipticity": {
        "samples": (int, 10_000, "number of seeded low-discrepancy samples", None),
        "motion": (str, None, "motion file (rows: component m1 m2 amp phase time_law); identity if omitted", None),
    },
    "dispersion": {
        "k_max": (float, 200.0, "largest wavenumber |k|", None),
        "points": (int, 200, "number of k samples", None),
        "svg": (str, None, "optional SVG plot of the squared velocities", None),
    },
    "waves": {
        "grid": (int, 64, "grid points per side of the periodic cell", None),
        "mode": (_int_pair, [1, 0], "integer wavevector 'k1,k2'", None),
        "branch": (str, "L", "wave branch", ("L", "T", "N")),
        "method": (str, "exact", "time integrator", ("exact", "rk4")),
        "duration": (float, 10.0, "simulated time", None),
        "amplitude": (float, 1e-3, "modal amplitude of the launched wave", None),
    },
    "lattice": {
        "N": (int, 256, "number of particles in the periodic chain", None),
        "d": (float, 0.1, "particle spacing", None),
        "kd_max": (float, 0.2, "largest dimensionless wavenumber k d", None),
    },
    "reduce": {
        "family": (str, "mixed", "test motion family", ("stretch", "bend", "mixed")),
        "h_list": (_float_list, [0.1, 0.05, 0.025, 0.0125], "comma-separated thicknesses", None),
        "quad_order": (int, 8, "through-thickness Gauss points", None),
    },
    "fracture": {
        "alpha": (float, 0.1, "dimensionless membrane group", None),
        "beta": (float, 1e-3, "dimensionless gradient group", None),
        "gamma": (float, 1.0, "dimensionless load", None),
        "N": (int, 128, "number of collocation points", None),
        "field_nx": (int, 41, "field grid points in x on [-2, 2]", None),
        "field_nz": (int, 16, "field grid points in z on [1e-3, 2] (log-spaced)", None),
    },
}
USES_MATERIAL = {"material", "ellipticity", "dispersion", "waves", "reduce"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradplate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gradplate {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="key=value file; command-line values win")
        p.add_argument("--seed", type=int, help="random seed (default 0)")
        p.add_argument("--out", help="output CSV path (fracture: output prefix)")
        if name in USES_MATERIAL:
            p.add_argument("--material", help="material file (default: reference material)")
        for key, (typ, default, text, choices) in opts.items():
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, type=typ, choices=choices, help=f"{text} (default {default})")
    return parser


def _convert(sub: str, key: str, value: str):
    typ, _, _, choices = OPTIONS[sub][key]
    try:
        out = typ(value)
    except (ValueError, argparse.ArgumentTypeError):
        raise ConfigError(f"invalid value for {key!r}: {value!r}") from None
    if choices and out not in choices:
        raise ConfigError(f"invalid value for {key!r}: {value!r} (choose from {', '.join(choices)})")
    return out


def parse_config(argv, config_file=None) -> RunConfig:
    """Merge defaults, an optional key=value file and command-line flags."""
    ns = vars(build_parser().parse_args(list(argv)))
    sub = ns.pop("subcommand")
    config_file = ns.pop("config", config_file)
    known = set(OPTIONS[sub]) | {"seed", "out"} | ({"material"} if sub in USES_MATERIAL else set())
    merged: dict = {}
    if config_file is not None:
        for key, val in read_key_values(config_file).items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r} in {config_file}")
            merged[key] = val if key in ("out", "material") else int(val) if key == "seed" else _convert(sub, key, val)
    for key, val in ns.items():
        if key in merged and merged[key] != val:
            warnings.warn(f"{key}: command-line value {val!r} overrides config file value {merged[key]!r}", ConfigWarning, stacklevel=2)
        merged[key] = val
    params = {k: merged.get(k, default) for k, (_, default, _, _) in OPTIONS[sub].items()}
    return RunConfig(sub, params, merged.get("material"), merged.get("out"), int(merged.get("seed", 0)))


# -- subcommand handlers ----------------------------------------------------------
# Each returns (summary results, tables); tables is [columns, rows] or {suffix: (columns, rows)}.


def _coeffs(cfg: RunConfig):
    spec = load_material(cfg.material) if cfg.material else REFERENCE
    return spec, derive_coefficients(spec)


def run_material(cfg):
    spec, co = _coeffs(cfg)
    names = ("lam", "mu", "a", "b_coef", "c", "ell_s", "ell_k", "rho_s", "q")
    values = {n: getattr(co, n) for n in names}
    return values, [("name", "value"), [(n, values[n]) for n in names]]


def run_ellipticity(cfg):
    _, co = _coeffs(cfg)
    motion = load_motion(cfg.params["motion"]) if cfg.params["motion"] else SurfaceMotion.identity()
    res = ellipticity.classify(co, motion, cfg.params["samples"], rng_seed=cfg.seed)
    s = res.samples
    rows = [tuple(a) + tuple(b) + tuple(y) + (v,) for a, b, y, v in zip(s["covector"], s["direction"], s["Y"], s["value"])]
    summary = {
        "verdict": res.verdict.value,
        "n_samples": res.n_samples,
        "min_value": res.min_value,
        "tangent_max": res.tangent_max,
        "normal_min": res.normal_min,
    }
    print(f"verdict: {res.verdict.value} (min contraction {res.min_value:.6g} over {res.n_samples} samples)")
    return summary, [("a1", "a2", "b1", "b2", "b3", "Y1", "Y2", "value"), rows]


def run_dispersion(cfg):
    _, co = _coeffs(cfg)
    p = cfg.params
    if p["points"] < 2 or p["k_max"] <= 0:
        raise ConfigError("dispersion needs points >= 2 and k_max > 0")
    k = np.linspace(p["k_max"] / p["points"], p["k_max"], p["points"])
    table = dispersion.branch_velocities(co, k)
    summary = {"short_wave_limit": dispersion.short_wave_limit(co)}
    try:
        kN2, kL2 = dispersion.thresholds(co)
        summary["crossing_k2"] = {"N": kN2, "L": kL2}
    except ValueError:
        summary["crossing_k2"] = None
    if p["svg"]:
        series = {name: (k, getattr(table, name)) for name in table.COLUMNS[1:]}
        write_svg(p["svg"], series, "wavenumber |k|", "squared phase velocity", logx=True)
    return summary, [table.COLUMNS, table.as_array().tolist()]


def run_waves(cfg):
    _, co = _coeffs(cfg)
    p = cfg.params
    sim = wavesim.Simulator(co, p["grid"])
    k = tuple(p["mode"])
    omega, pol = sim.branch_mode(k, p["branch"])
    amp = p["amplitude"] * pol
    state = wavesim.ModalState.zeros(sim.N).with_mode(k, amp, -1j * omega * amp)
    e0 = sim.total_energy(state)
    final = sim.evolve(state, p["duration"], "modal-exact" if p["method"] == "exact" else "rk4")
    e1 = sim.total_energy(final)
    meas = wavesim.measure_phase_velocity(co, k, p["branch"], N=sim.N, sim=sim, method="modal-exact" if p["method"] == "exact" else "rk4")
    kn = float(np.hypot(*k))
    summary = {
        "omega": omega,
        "phase_speed_predicted": float(np.sqrt(dispersion.branch_value(co, kn, p["branch"]))),
        "phase_speed_measured": meas.speed,
        "energy_initial": e0,
        "energy_final": e1,
        "energy_drift": abs(e1 - e0) / e0,
    }
    idx = np.argwhere(np.abs(final.x) > 0)
    rows = []
    for i, j, c in idx:
        k1 = i if i <= sim.N // 2 else i - sim.N
        k2 = j if j <= sim.N // 2 else j - sim.N
        z = final.x[i, j, c]
        rows.append((int(k1), int(k2), ("u1", "u2", "w")[c], z.real, z.imag))
    rows.sort()
    return summary, [("k1", "k2", "component", "re", "im"), rows]


def run_lattice(cfg):
    p = cfg.params
    spec = lattice.ChainSpec(p["N"], p["d"])
    table = lattice.dispersion_table(spec, p["kd_max"])
    fit_kd = spec.wavenumbers(0.3) * spec.d
    ls2, lk2 = lattice.identify_lengths(spec, fit_kd)
    summary = {"max_rel_gap": max(r.rel_gap for r in table), "gap_slope": lattice.gap_slope(spec, fit_kd)}
    summary.update(ell_s2=ls2, ell_k2=lk2, ell_diff_over_d2=(lk2 - ls2) / spec.d**2)
    rows = [(r.kd, r.omega2_discrete, r.omega2_continuum, r.rel_gap) for r in table]
    return summary, [("kd", "omega2_discrete", "omega2_continuum", "rel_gap"), rows]


def run_reduce(cfg):
    spec, _ = _coeffs(cfg)
    p = cfg.params
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", reduction.NonMonotoneErrorWarning)
        rep = reduction.convergence_study(
            reduction.material_family(spec), reduction.motion_family(p["family"]), p["h_list"], quad_order=p["quad_order"]
        )
    summary = {"slope_W": rep.slope_W, "slope_K": rep.slope_K, "warnings": rep.warnings}
    rows = list(zip(rep.h.tolist(), rep.W_err.tolist(), rep.K_err.tolist()))
    return summary, [("h", "W_err", "K_err"), rows]


def run_fracture(cfg):
    p = cfg.params
    sol = fracture.solve_crack(fracture.CrackConfig(p["alpha"], p["beta"], p["gamma"], p["N"]))
    norms = sol.sup_norms()
    x = np.linspace(-2, 2, p["field_nx"])
    z = np.geomspace(1e-3, 2, p["field_nz"])
    fld = fracture.reconstruct_field(sol, x, z)
    summary = {
        "residual": sol.residual,
        "cond": sol.cond,
        "sup_norms": {f"f{m}" if m else "f": norms[m] for m in range(5)},
        "field_sup_norms": fld.sup_norms,
        "tip_max_f2": fracture.tip_curvature(sol),
    }
    f_rows = np.column_stack([sol.nodes[::-1], sol.nodal[:, ::-1].T]).tolist()
    field_rows = np.column_stack([fld.x.ravel(), fld.z.ravel(), fld.v.ravel(), fld.vx.ravel(), fld.vz.ravel()]).tolist()
    tables = {
        "_f.csv": (("x", "f", "f1", "f2", "f3", "f4"), f_rows),
        "_field.csv": (("x", "z", "v", "vx", "vz"), field_rows),
    }
    return summary, tables


HANDLERS = {
    "material": run_material,
    "ellipticity": run_ellipticity,
    "dispersion": run_dispersion,
    "waves": run_waves,
    "lattice": run_lattice,
    "reduce": run_reduce,
    "fracture": run_fracture,
}


def run(cfg: RunConfig) -> dict:
    """Execute a configuration, write its reports and return the summary results."""
    summary, tables = HANDLERS[cfg.subcommand](cfg)
    if cfg.out:
        if isinstance(tables, dict):
            for suffix, (cols, rows) in tables.items():
                write_csv(cfg.out + suffix, cols, rows)
            write_summary(cfg.out + "_report.json", cfg, summary, __version__)
        else:
            cols, rows = tables
            write_csv(cfg.out, cols, rows)
            write_summary(Path(cfg.out).with_suffix(".json"), cfg, summary, __version__)
    return summary


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        summary = run(cfg)
    except (ConfigError, MaterialError) as exc:
        print(f"gradplate: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ReportError as exc:
        print(f"gradplate: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gradplate: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        print(f"gradplate: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"gradplate: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(summary_text(cfg, summary, __version__))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
