"""Second-gradient acoustic contraction and ellipticity classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.stats import qmc

from .material import DerivedCoeffs
from .motion import SurfaceMotion

ZERO_TOL = 1e-12


class Verdict(str, Enum):
    STRONGLY_ELLIPTIC = "StronglyElliptic"
    LEGENDRE_HADAMARD_ONLY = "LegendreHadamardOnly"


class EllipticityViolation(RuntimeError):
    """A sampled contraction contradicts the expected sign structure."""

    def __init__(self, message: str, query: EllipticityQuery, value: float):
        super().__init__(f"{message}: value={value!r} at {query}")
        self.query = query
        self.value = value


@dataclass(frozen=True)
class EllipticityQuery:
    covector: tuple[float, float]
    direction: tuple[float, float, float]
    Y: tuple[float, float] = (0.0, 0.0)
    t: float = 0.0

    def __post_init__(self):
        if np.linalg.norm(self.covector) == 0:
            raise ValueError("covector must be nonzero")
        if np.linalg.norm(self.direction) == 0:
            raise ValueError("direction must be nonzero")


def _frame(motion: SurfaceMotion, Y, t):
    """Tangents y,a (shape (..., 2, 3)) and unit normal at the points Y."""
    y = motion.jet(np.asarray(Y, dtype=float), t, 1)
    t1, t2 = y.diff(0).value, y.diff(1).value
    normal = np.cross(t1, t2)
    area = np.linalg.norm(normal, axis=-1)
    if np.any(area < 1e-10):
        raise ValueError("motion is not an immersion at a sampled point")
    return np.stack([t1, t2], axis=-2), normal / area[..., None]


def contraction(coeffs: DerivedCoeffs, covector, direction, tangents, normal) -> np.ndarray:
    """Vectorized contraction a_a a_b b.(C^{abgd} a_g a_d b) from explicit frames."""
    A = np.asarray(covector, dtype=float)
    b = np.asarray(direction, dtype=float)
    bt = np.einsum("...ai,...i->...a", tangents, b)
    a2 = np.sum(A * A, axis=-1)
    grad = 0.5 * coeffs.a * coeffs.ell_s2 * (
        (1 - coeffs.nu) * a2 * np.sum(bt * bt, axis=-1) + (1 + coeffs.nu) * a2 * np.sum(A * bt, axis=-1) ** 2
    )
    return grad + coeffs.b_coef * a2 * np.sum(b * normal, axis=-1) ** 2


def contract(coeffs: DerivedCoeffs, motion: SurfaceMotion, query: EllipticityQuery) -> float:
    tangents, normal = _frame(motion, query.Y, query.t)
    return float(contraction(coeffs, query.covector, query.direction, tangents, normal))


@dataclass
class Classification:
    verdict: Verdict
    n_samples: int
    min_value: float
    tangent_max: float
    normal_min: float
    samples: dict = field(repr=False, default_factory=dict)


def _sample_directions(n: int, seed: int):
    """Low-discrepancy (Y, covector angle, sphere direction) samples."""
    sob = qmc.Sobol(d=5, scramble=True, seed=seed)
    u = sob.random_base2(max(0, int(np.ceil(np.log2(n)))))[:n]
    Y = 2 * np.pi * u[:, :2]
    theta = 2 * np.pi * u[:, 2]
    cov = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    z = 2 * u[:, 3] - 1
    phi = 2 * np.pi * u[:, 4]
    r = np.sqrt(1 - z * z)
    b = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    return Y, cov, b


def classify(
    coeffs: DerivedCoeffs, motion: SurfaceMotion, sample_count: int = 10_000, rng_seed: int = 0, t: float = 0.0
) -> Classification:
    """Classify the stored energy as strongly elliptic or Legendre–Hadamard only.

    Three sample families share the same seeded points: generic directions on
    the sphere, directions tangent to the deformed surface and the unit
    normal.  Axis-aligned covectors and coordinate directions are appended.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    Y, cov, b = _sample_directions(sample_count, rng_seed)
    axes = np.eye(2)
    coords = np.eye(3)
    extra_Y = np.repeat(Y[:1], 6, axis=0)
    extra_cov = np.array([axes[i % 2] for i in range(6)])
    extra_b = np.array([coords[i // 2] for i in range(6)])
    Y = np.concatenate([Y, extra_Y])
    cov = np.concatenate([cov, extra_cov])
    b = np.concatenate([b, extra_b])

    tangents, normal = _frame(motion, Y, t)
    generic = contraction(coeffs, cov, b, tangents, normal)

    # unit tangent directions: combine unit y,1 and y,2 with the sphere angle
    phi = np.arctan2(b[:, 1], b[:, 0])
    unit_t = tangents / np.linalg.norm(tangents, axis=-1, keepdims=True)
    bt = np.cos(phi)[:, None] * unit_t[:, 0] + np.sin(phi)[:, None] * unit_t[:, 1]
    bt /= np.linalg.norm(bt, axis=-1, keepdims=True)
    tangent = contraction(coeffs, cov, bt, tangents, normal)
    normal_vals = contraction(coeffs, cov, normal, tangents, normal)

    def query(i, direction):
        return EllipticityQuery(tuple(cov[i]), tuple(direction[i]), tuple(Y[i]), t)

    values = {"generic": (generic, b), "tangent": (tangent, bt), "normal": (normal_vals, normal)}
    for name, (vals, dirs) in values.items():
        i = int(np.argmin(vals))
        if vals[i] < 0:
            raise EllipticityViolation(f"negative {name} contraction", query(i, dirs), float(vals[i]))

    min_value = float(min(v.min() for v, _ in values.values()))
    tangent_max = float(tangent.max())
    normal_min = float(normal_vals.min())
    if coeffs.ell_s > 0:
        if min_value <= 0:
            i = int(np.argmin(generic))
            raise EllipticityViolation("non-positive contraction with ell_s > 0", query(i, b), float(generic[i]))
        verdict = Verdict.STRONGLY_ELLIPTIC
    else:
        if tangent_max > ZERO_TOL:
            i = int(np.argmax(tangent))
            raise EllipticityViolation("tangent contraction not zero with ell_s = 0", query(i, bt), tangent_max)
        verdict = Verdict.LEGENDRE_HADAMARD_ONLY
    samples = {"Y": Y, "covector": cov, "direction": b, "value": generic}
    return Classification(verdict, len(Y), min_value, tangent_max, normal_min, samples)
