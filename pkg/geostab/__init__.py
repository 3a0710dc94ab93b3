"""
geostab: geometric stability analysis of dynamical systems.

Lyapunov exponents under state-dependent seminorms, KCC deviation invariants
of semisprays, and the Jacobi-Maupertuis translation of natural systems into
geodesic flows, with a scenario-driven command line on top.
"""
__version__ = "0.1.0"

from .errors import ConfigurationError, GeostabError, NumericalError

__all__ = [
    '__version__',
    'GeostabError',
    'ConfigurationError',
    'NumericalError'
]
