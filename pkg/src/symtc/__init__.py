"""Motion planners, equivariant-map checks and topological-complexity bounds
for real projective spaces, lens spaces, complex projective spaces and spheres."""

__version__ = "0.1.0"

from .errors import SymTCError  # noqa: E402
from .geometry import SpaceDescriptor, SpacePoint, UnitVector, canonicalize  # noqa: E402

__all__ = ["__version__", "SymTCError", "SpaceDescriptor", "SpacePoint", "UnitVector", "canonicalize"]
