"""Material parameters and the coefficients of the surface energies."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np


class MaterialError(ValueError):
    """Raised for physically inadmissible material parameters."""


def lame_from_engineering(E: float, nu: float) -> tuple[float, float]:
    """Lamé moduli (lambda, mu) from Young's modulus and Poisson's ratio."""
    if not E > 0:
        raise MaterialError(f"Young's modulus must be positive, got {E}")
    if not 0 < nu < 0.5:
        raise MaterialError(f"Poisson ratio must lie in (0, 1/2), got {nu}")
    lam = E * nu / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    return lam, mu


def engineering_from_lame(lam: float, mu: float) -> tuple[float, float]:
    """Inverse map: (E, nu) from the Lamé moduli."""
    E = mu * (2 * mu + 3 * lam) / (mu + lam)
    nu = lam / (2 * (mu + lam))
    return E, nu


@dataclass(frozen=True)
class MaterialSpec:
    """Engineering constants of a plate.

    ``ell_s`` and ``ell_k`` override the default lattice identifications
    ``ell_s**2 = d**2/12`` and ``ell_k**2 = d**2/6``.
    """

    E: float
    nu: float
    rho_R: float
    h: float
    d: float = 0.0
    ell_s: Optional[float] = None
    ell_k: Optional[float] = None

    def __post_init__(self):
        lame_from_engineering(self.E, self.nu)
        if not self.rho_R > 0:
            raise MaterialError(f"density must be positive, got {self.rho_R}")
        if not self.h > 0:
            raise MaterialError(f"thickness must be positive, got {self.h}")
        if not self.d >= 0:
            raise MaterialError(f"particle spacing must be nonnegative, got {self.d}")
        for name in ("ell_s", "ell_k"):
            val = getattr(self, name)
            if val is not None and not val >= 0:
                raise MaterialError(f"{name} must be nonnegative, got {val}")

    def replace(self, **changes) -> MaterialSpec:
        fields = asdict(self)
        fields.update(changes)
        return MaterialSpec(**fields)


@dataclass(frozen=True)
class DerivedCoeffs:
    """Coefficients entering the surface energy densities.

    ``b_coef`` is the bending coefficient (named to avoid clashing with the
    direction vector ``b`` used elsewhere).
    """

    lam: float
    mu: float
    a: float
    b_coef: float
    c: float
    ell_s: float
    ell_k: float
    rho_s: float
    E: float
    nu: float
    h: float
    rho_R: float

    @property
    def ell_s2(self) -> float:
        return self.ell_s**2

    @property
    def ell_k2(self) -> float:
        return self.ell_k**2

    @property
    def q(self) -> float:
        """Lateral-contraction inertia factor nu**2/(1-nu)**2."""
        return self.nu**2 / (1 - self.nu) ** 2

    def classical(self) -> DerivedCoeffs:
        """Same plate with both length scales set to zero."""
        return derive_coefficients(
            MaterialSpec(E=self.E, nu=self.nu, rho_R=self.rho_R, h=self.h, d=0.0)
        )

    def with_lengths(self, ell_s: float, ell_k: float) -> DerivedCoeffs:
        return derive_coefficients(
            MaterialSpec(E=self.E, nu=self.nu, rho_R=self.rho_R, h=self.h, ell_s=ell_s, ell_k=ell_k)
        )


def derive_coefficients(spec: MaterialSpec) -> DerivedCoeffs:
    lam, mu = lame_from_engineering(spec.E, spec.nu)
    ell_s2 = spec.d**2 / 12 if spec.ell_s is None else spec.ell_s**2
    ell_k2 = spec.d**2 / 6 if spec.ell_k is None else spec.ell_k**2
    a = spec.h * spec.E / (1 - spec.nu**2)
    b = a * (spec.h**2 / 24 + ell_s2)
    c = (spec.h**2 + 12 * ell_k2) / 12
    return DerivedCoeffs(
        lam=lam,
        mu=mu,
        a=a,
        b_coef=b,
        c=c,
        ell_s=float(np.sqrt(ell_s2)),
        ell_k=float(np.sqrt(ell_k2)),
        rho_s=spec.h * spec.rho_R,
        E=spec.E,
        nu=spec.nu,
        h=spec.h,
        rho_R=spec.rho_R,
    )


REFERENCE = MaterialSpec(E=1.0, nu=0.25, rho_R=1.0, h=0.1, d=0.1)

_FILE_KEYS = {"E", "nu", "rho_R", "h", "d", "ell_s", "ell_k"}
_REQUIRED = {"E", "nu", "rho_R", "h"}


def parse_material_text(text: str, source: str = "<string>") -> MaterialSpec:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MaterialError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FILE_KEYS:
            raise MaterialError(f"{source}:{lineno}: unknown material key {key!r}")
        try:
            values[key] = float(val)
        except ValueError:
            raise MaterialError(f"{source}:{lineno}: {key} is not a number: {val!r}") from None
    missing = _REQUIRED - values.keys()
    if missing:
        raise MaterialError(f"{source}: missing material keys {sorted(missing)}")
    return MaterialSpec(**values)


def load_material(path) -> MaterialSpec:
    path = Path(path)
    return parse_material_text(path.read_text(), source=str(path))


def format_material(spec: MaterialSpec) -> str:
    lines = [f"{k} = {v!r}" for k, v in asdict(spec).items() if v is not None]
    return "\n".join(lines) + "\n"
