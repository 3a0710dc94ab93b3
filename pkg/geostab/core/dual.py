"""
Forward-mode automatic differentiation with tagged, nestable dual numbers.

Every differentiation pass draws a fresh tag. A dual with a higher tag always
sits outside duals with lower tags, so nested passes never confuse their
infinitesimals.
"""
import itertools
import math
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

_tags = itertools.count(1)


class Dual:
    """a + b·ε with ε² = 0. Both parts may themselves be (lower-tagged) duals."""

    __slots__ = ("real", "eps", "tag")

    # numpy scalars defer to the reflected Dual operators
    __array_ufunc__ = None

    def __init__(self, real: Any, eps: Any, tag: int):
        self.real = real
        self.eps = eps
        self.tag = tag

    def __repr__(self) -> str:
        return f"Dual({self.real!r}, {self.eps!r}, tag={self.tag})"

    def __add__(self, other):
        tag = _top(self, other)
        ar, ae = _split(self, tag)
        br, be = _split(other, tag)
        return Dual(ar + br, _add(ae, be), tag)

    __radd__ = __add__

    def __sub__(self, other):
        tag = _top(self, other)
        ar, ae = _split(self, tag)
        br, be = _split(other, tag)
        return Dual(ar - br, _sub(ae, be), tag)

    def __rsub__(self, other):
        tag = _top(self, other)
        ar, ae = _split(other, tag)
        br, be = _split(self, tag)
        return Dual(ar - br, _sub(ae, be), tag)

    def __mul__(self, other):
        tag = _top(self, other)
        ar, ae = _split(self, tag)
        br, be = _split(other, tag)
        return Dual(ar * br, _add(_mul(ar, be), _mul(ae, br)), tag)

    __rmul__ = __mul__

    def __truediv__(self, other):
        tag = _top(self, other)
        ar, ae = _split(self, tag)
        br, be = _split(other, tag)
        if primal(br) == 0.0:
            raise ZeroDivisionError("division by zero")
        real = ar / br
        return Dual(real, _sub(ae, _mul(real, be)) / br, tag)

    def __rtruediv__(self, other):
        tag = _top(self, other)
        ar, ae = _split(other, tag)
        br, be = _split(self, tag)
        if primal(br) == 0.0:
            raise ZeroDivisionError("division by zero")
        real = ar / br
        return Dual(real, _sub(ae, _mul(real, be)) / br, tag)

    def __neg__(self):
        return Dual(-self.real, _neg(self.eps), self.tag)

    def __pos__(self):
        return self

    def __abs__(self):
        return fabs(self)

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)


def _top(a, b) -> int:
    ta = a.tag if isinstance(a, Dual) else 0
    tb = b.tag if isinstance(b, Dual) else 0
    return ta if ta > tb else tb


def _split(a, tag):
    if isinstance(a, Dual) and a.tag == tag:
        return a.real, a.eps
    return a, 0.0


def _is_zero(a) -> bool:
    return not isinstance(a, Dual) and a == 0.0


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return a + b


def _sub(a, b):
    if _is_zero(b):
        return a
    if _is_zero(a):
        return _neg(b)
    return a - b


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return 0.0
    return a * b


def _neg(a):
    return 0.0 if _is_zero(a) else -a


def primal(x) -> float:
    """Innermost real value of a (possibly nested) dual."""
    while isinstance(x, Dual):
        x = x.real
    return x


def is_dual(x) -> bool:
    return isinstance(x, Dual)


# elementary functions, generic over floats and duals

def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.real), _mul(cos(x.real), x.eps), x.tag)
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.real), _mul(_neg(sin(x.real)), x.eps), x.tag)
    return math.cos(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.real)
        return Dual(e, _mul(e, x.eps), x.tag)
    return math.exp(x)


def log(x):
    if primal(x) <= 0.0:
        raise ValueError("log of a non-positive value")
    if isinstance(x, Dual):
        return Dual(log(x.real), 0.0 if _is_zero(x.eps) else x.eps / x.real, x.tag)
    return math.log(x)


def sqrt(x):
    p = primal(x)
    if p < 0.0:
        raise ValueError("sqrt of a negative value")
    if isinstance(x, Dual):
        s = sqrt(x.real)
        if _is_zero(x.eps):
            return Dual(s, 0.0, x.tag)
        if p == 0.0:
            raise ValueError("sqrt is not differentiable at 0")
        return Dual(s, x.eps / (2.0 * s), x.tag)
    return math.sqrt(x)


def fabs(x):
    if isinstance(x, Dual):
        if primal(x) < 0.0:
            return Dual(-x.real, _neg(x.eps), x.tag)
        return x
    return math.fabs(x)


def step(x) -> float:
    """Heaviside: 0 below zero, 1 at and above. Its derivative is taken as 0 everywhere."""
    return 0.0 if primal(x) < 0.0 else 1.0


def power(base, exponent):
    if not isinstance(exponent, Dual):
        exponent = float(exponent)
        integral = exponent.is_integer() and abs(exponent) <= 1024
        if not integral and primal(base) < 0.0:
            raise ValueError("non-integer power of a negative base")
        if exponent < 0.0 and primal(base) == 0.0:
            raise ZeroDivisionError("negative power of zero")
        if isinstance(base, Dual):
            if primal(base) == 0.0 and exponent < 1.0 and not _is_zero(base.eps):
                raise ZeroDivisionError("power is not differentiable at 0")
            value = power(base.real, exponent)
            slope = _mul(exponent, power(base.real, exponent - 1.0)) if exponent != 0.0 else 0.0
            return Dual(value, _mul(slope, base.eps), base.tag)
        if integral:
            return base ** int(exponent)
        return math.pow(base, exponent)
    # variable exponent: b^e = exp(e·log b)
    if primal(base) <= 0.0:
        raise ValueError("variable exponent requires a positive base")
    return exp(exponent * log(base))


# derivative engine

def _tangent(value, tag):
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_tangent(v, tag) for v in value]
    if isinstance(value, Dual) and value.tag == tag:
        return value.eps
    return 0.0


def partial(f: Callable, point: Sequence, index: int):
    """∂f/∂z_index at point. f may return a scalar or a (nested) sequence."""
    tag = next(_tags)
    z = list(point)
    z[index] = Dual(z[index], 1.0, tag)
    return _tangent(f(z), tag)


def jvp(f: Callable, point: Sequence, direction: Sequence):
    """Directional derivative of f at point along direction, in one pass."""
    tag = next(_tags)
    z = [Dual(p, d, tag) if d != 0.0 else p for p, d in zip(point, direction)]
    return _tangent(f(z), tag)


def derive(f: Callable, point: Sequence, order: int = 1, indices: Sequence[int] = (0,)):
    """
    Partial derivative of f at point.

    Args:
        f: Callable over a list of number-likes
        point: Evaluation point
        order: 1 or 2
        indices: (i,) for ∂/∂z_i, (i, j) for ∂²/∂z_i∂z_j

    Returns:
        Derivative value(s), shaped like f's output
    """
    if order == 1:
        return partial(f, point, indices[0])
    if order == 2:
        i, j = indices[0], indices[1]
        return partial(lambda z: partial(f, z, j), point, i)
    raise ValueError(f"Unsupported derivative order: {order}")


def gradient(f: Callable, point: Sequence, wrt: Optional[Sequence[int]] = None) -> List:
    wrt = range(len(point)) if wrt is None else wrt
    return [partial(f, point, i) for i in wrt]


def jacobian(f: Callable, point: Sequence, wrt: Optional[Sequence[int]] = None) -> List[List]:
    """J[component][variable] for a sequence-valued f."""
    columns = gradient(f, point, wrt)
    if not columns:
        return []
    return [list(row) for row in zip(*columns)]


def hessian(f: Callable, point: Sequence, wrt: Optional[Sequence[int]] = None) -> List[List]:
    """Symmetric matrix of second partials of a scalar f."""
    wrt = list(range(len(point))) if wrt is None else list(wrt)
    rows = jacobian(lambda z: gradient(f, z, wrt), point, wrt)
    return rows


def to_float_array(values) -> np.ndarray:
    """Collapse a nested list of plain numbers to a float array; duals are rejected."""
    return np.array(values, dtype=float)
