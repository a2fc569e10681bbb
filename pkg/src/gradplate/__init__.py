"""Gradient-enriched elastic plates: kinematics, waves, homogenization and an anti-plane crack."""

__version__ = "0.1.0"

from .material import REFERENCE, DerivedCoeffs, MaterialSpec, derive_coefficients, load_material

__all__ = ["REFERENCE", "DerivedCoeffs", "MaterialSpec", "derive_coefficients", "load_material", "__version__"]
