"""Spectral, topological and skin-effect analysis of a non-Hermitian two-band chain."""

__version__ = "0.1.0"

from .lattice import ModelParams  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = ["ModelParams", "BACKEND", "__version__"]
