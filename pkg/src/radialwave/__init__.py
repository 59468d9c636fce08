"""Numerical laboratory for the radial energy-subcritical nonlinear wave
equation in R^3: half-line reduction, exact linear propagation, fractional
Sobolev and space-time norms, singular soliton construction, and a
verification suite for the computable identities and inequalities."""

from .core import (
    FieldPair,
    GEOMETRIC,
    RadialGrid,
    ReducedPair,
    UNIFORM,
    VerificationError,
    center_cutoff,
    from_reduced,
    make_grid,
    reduction_identity_residual,
    ring_energy,
    to_reduced,
)

__version__ = "0.1.0"

__all__ = [
    "FieldPair",
    "GEOMETRIC",
    "RadialGrid",
    "ReducedPair",
    "UNIFORM",
    "VerificationError",
    "center_cutoff",
    "from_reduced",
    "make_grid",
    "reduction_identity_residual",
    "ring_energy",
    "to_reduced",
    "__version__",
]
