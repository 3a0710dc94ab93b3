"""
Core numerics for geostab.
Expression DSL, forward-mode dual numbers and small dense linear algebra.
"""
from .expr import Expression, SymbolTable, parse, evaluate, serialize, as_expression
from .dual import Dual, derive, partial, jvp, gradient, jacobian, hessian, primal
from .linalg import (
    ComplexEigenSet, solve_linear, lu_factor, lu_solve, inverse, scaled_determinant,
    eigenvalues, weighted_gram_schmidt
)

__all__ = [
    'Expression', 'SymbolTable', 'parse', 'evaluate', 'serialize', 'as_expression',
    'Dual', 'derive', 'partial', 'jvp', 'gradient', 'jacobian', 'hessian', 'primal',
    'ComplexEigenSet', 'solve_linear', 'lu_factor', 'lu_solve', 'inverse', 'scaled_determinant',
    'eigenvalues', 'weighted_gram_schmidt'
]
