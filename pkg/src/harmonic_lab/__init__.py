"""Discrete harmonic functions on lattice boxes, strips, and half-spaces.

The package bundles the pieces needed to experiment with gradient estimates
for discrete harmonic functions: lattice geometry and norms, a discrete
Fourier layer with the propagation symbols, dyadic variation machinery for
multiplier bounds, spectral and iterative solvers on periodic strips,
extension operators on boxes, and random-walk estimators for the discrete
Poisson kernel.  The ``cli`` module drives reproducible experiment sweeps.
"""

from . import boxes, dyadic, halfspace, lattice, spectral, walks

__all__ = ["boxes", "dyadic", "halfspace", "lattice", "spectral", "walks"]
__version__ = "0.1.0"
