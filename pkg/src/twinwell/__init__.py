"""Heteroclinic connections and equivariant strip minimizers for planar
two-well gradient systems."""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: F401
from .potential import PotentialSpec, evaluate, w2_critical_eps1  # noqa: F401
