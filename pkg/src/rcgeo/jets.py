"""Truncated multivariate Taylor arithmetic (jets).

A Jet stores the Taylor expansion of a scalar quantity around an
(implicit) base point, truncated at a fixed total order.  Coefficients
are Taylor-normalized: the coefficient stored for multi-index alpha is
(d^alpha f) / alpha!, so that multiplication is plain coefficient
convolution truncated to the jet order.  Multi-indices are enumerated
densely in graded lexicographic order (total degree first, then
lexicographic), which makes truncation to a lower order a prefix slice.

Elementary functions are evaluated by composing the univariate Taylor
series of the function at the jet's value part with the jet's
higher-order part (which has zero constant term, so the composition is
an exact finite sum at the stored order).

Arithmetic between jets of identical shape is closed: the result has
the same (num_vars, order).  Mixing orders is allowed for convenience
and truncates to the smaller order, which is the largest order to which
the result is exact.  Mixing different num_vars is an error.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

MAX_VARS = 8
MAX_ORDER = 4
DEFAULT_ORDER = 3


class JetShapeError(ValueError):
    """Operands have incompatible (num_vars, order) or invalid shape."""


class JetDomainError(ValueError):
    """Function evaluated outside its domain at the jet's value part."""


@lru_cache(maxsize=None)
def monomials(num_vars: int, order: int) -> tuple:
    """All multi-indices with |alpha| <= order, graded lexicographic."""
    monos = [
        m
        for m in itertools.product(range(order + 1), repeat=num_vars)
        if sum(m) <= order
    ]
    monos.sort(key=lambda m: (sum(m), m))
    return tuple(monos)


@lru_cache(maxsize=None)
def _mono_index(num_vars: int, order: int) -> dict:
    return {m: i for i, m in enumerate(monomials(num_vars, order))}


@lru_cache(maxsize=None)
def _mul_table(num_vars: int, order: int):
    """Index triples (i, j, k) with mono_i + mono_j = mono_k."""
    monos = monomials(num_vars, order)
    idx = _mono_index(num_vars, order)
    ii, jj, kk = [], [], []
    for i, mi in enumerate(monos):
        di = sum(mi)
        for j, mj in enumerate(monos):
            if di + sum(mj) > order:
                continue
            k = idx[tuple(a + b for a, b in zip(mi, mj))]
            ii.append(i)
            jj.append(j)
            kk.append(k)
    return np.array(ii), np.array(jj), np.array(kk), len(monos)


@lru_cache(maxsize=None)
def _diff_table(num_vars: int, order: int, axis: int):
    """Source index and factor for the derivative jet along one axis.

    If f has Taylor coefficients c, then d_axis f has coefficient
    (beta[axis] + 1) * c[beta + e_axis] at multi-index beta.
    """
    src_monos = _mono_index(num_vars, order)
    out = []
    for beta in monomials(num_vars, order - 1):
        up = list(beta)
        up[axis] += 1
        out.append((src_monos[tuple(up)], up[axis]))
    src = np.array([s for s, _ in out])
    fac = np.array([f for _, f in out], dtype=np.float64)
    return src, fac


def _check_shape(num_vars: int, order: int) -> None:
    if not (1 <= num_vars <= MAX_VARS):
        raise JetShapeError(f"num_vars must be in [1, {MAX_VARS}], got {num_vars}")
    if not (0 <= order <= MAX_ORDER):
        raise JetShapeError(f"order must be in [0, {MAX_ORDER}], got {order}")


class Jet:
    """Dense truncated Taylor expansion of a scalar.

    Fields: num_vars, order, coeffs (one float per multi-index with
    |alpha| <= order, in graded lexicographic order).
    """

    __slots__ = ("num_vars", "order", "coeffs")

    def __init__(self, num_vars: int, order: int, coeffs):
        _check_shape(num_vars, order)
        c = np.asarray(coeffs, dtype=np.float64)
        n = len(monomials(num_vars, order))
        if c.shape != (n,):
            raise JetShapeError(
                f"expected {n} coefficients for {num_vars} vars at order {order}, "
                f"got shape {c.shape}"
            )
        self.num_vars = num_vars
        self.order = order
        self.coeffs = c

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def __repr__(self):
        return f"Jet(n={self.num_vars}, K={self.order}, value={self.value!r})"

    # -- shape alignment ------------------------------------------------

    def _align(self, other: "Jet"):
        if self.num_vars != other.num_vars:
            raise JetShapeError(
                f"num_vars mismatch: {self.num_vars} vs {other.num_vars}"
            )
        if self.order == other.order:
            return self, other
        k = min(self.order, other.order)
        return truncate(self, k), truncate(other, k)

    # -- ring operations ------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.num_vars, a.order, a.coeffs + b.coeffs)
        if isinstance(other, (int, float, np.floating, np.integer)):
            c = self.coeffs.copy()
            c[0] += float(other)
            return Jet(self.num_vars, self.order, c)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.num_vars, self.order, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.num_vars, a.order, a.coeffs - b.coeffs)
        if isinstance(other, (int, float, np.floating, np.integer)):
            c = self.coeffs.copy()
            c[0] -= float(other)
            return Jet(self.num_vars, self.order, c)
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            ii, jj, kk, n = _mul_table(a.num_vars, a.order)
            w = a.coeffs[ii] * b.coeffs[jj]
            return Jet(a.num_vars, a.order, np.bincount(kk, weights=w, minlength=n))
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.num_vars, self.order, self.coeffs * float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * _reciprocal(other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.num_vars, self.order, self.coeffs / float(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return _reciprocal(self) * float(other)
        return NotImplemented

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) or (
            isinstance(p, float) and p == int(p)
        ):
            return _int_pow(self, int(p))
        if isinstance(p, (float, np.floating)):
            if self.value <= 0.0:
                raise JetDomainError(
                    f"non-integer power {p} of non-positive value {self.value}"
                )
            return exp(float(p) * log(self))
        return NotImplemented


# -- constructors -------------------------------------------------------


def constant(value: float, num_vars: int, order: int) -> Jet:
    _check_shape(num_vars, order)
    c = np.zeros(len(monomials(num_vars, order)))
    c[0] = float(value)
    return Jet(num_vars, order, c)


def variable(index: int, value: float, num_vars: int, order: int) -> Jet:
    """The coordinate function x_index expanded at the given value."""
    _check_shape(num_vars, order)
    if not (0 <= index < num_vars):
        raise JetShapeError(f"variable index {index} out of range for {num_vars} vars")
    c = np.zeros(len(monomials(num_vars, order)))
    c[0] = float(value)
    if order >= 1:
        unit = tuple(1 if i == index else 0 for i in range(num_vars))
        c[_mono_index(num_vars, order)[unit]] = 1.0
    return Jet(num_vars, order, c)


def variables(values, num_vars: int, order: int) -> list:
    return [variable(i, v, num_vars, order) for i, v in enumerate(values)]


# -- coefficient access -------------------------------------------------


def extract_partial(j: Jet, alpha) -> float:
    """True partial derivative d^alpha f at the base point."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != j.num_vars or any(a < 0 for a in alpha):
        raise JetShapeError(f"bad multi-index {alpha} for {j.num_vars} vars")
    if sum(alpha) > j.order:
        raise JetShapeError(
            f"multi-index {alpha} exceeds stored order {j.order}"
        )
    fac = 1.0
    for a in alpha:
        fac *= math.factorial(a)
    return float(j.coeffs[_mono_index(j.num_vars, j.order)[alpha]]) * fac


def gradient(j: Jet) -> np.ndarray:
    """All first partials as a vector."""
    g = np.zeros(j.num_vars)
    for i in range(j.num_vars):
        alpha = tuple(1 if k == i else 0 for k in range(j.num_vars))
        g[i] = extract_partial(j, alpha)
    return g


def partial(j: Jet, axis: int) -> Jet:
    """Derivative along one axis, as a jet of order one less."""
    if j.order == 0:
        raise JetShapeError("cannot differentiate an order-0 jet")
    if not (0 <= axis < j.num_vars):
        raise JetShapeError(f"axis {axis} out of range")
    src, fac = _diff_table(j.num_vars, j.order, axis)
    return Jet(j.num_vars, j.order - 1, j.coeffs[src] * fac)


def truncate(j: Jet, order: int) -> Jet:
    if order > j.order:
        raise JetShapeError(f"cannot raise order {j.order} to {order}")
    if order == j.order:
        return j
    n = len(monomials(j.num_vars, order))
    return Jet(j.num_vars, order, j.coeffs[:n].copy())


# -- composition with univariate series ---------------------------------


def _compose(x: Jet, series) -> Jet:
    """Sum of series[k] * h^k with h = x minus its value part (Horner)."""
    h = Jet(x.num_vars, x.order, x.coeffs.copy())
    h.coeffs[0] = 0.0
    r = constant(series[-1], x.num_vars, x.order)
    for k in range(len(series) - 2, -1, -1):
        r = r * h + series[k]
    return r


def _reciprocal(x: Jet) -> Jet:
    x0 = x.value
    if x0 == 0.0:
        raise JetDomainError("division by a jet with zero value part")
    series = [(-1.0) ** k / x0 ** (k + 1) for k in range(x.order + 1)]
    return _compose(x, series)


def _series_sin(x0, order):
    cyc = [math.sin(x0), math.cos(x0), -math.sin(x0), -math.cos(x0)]
    return [cyc[k % 4] / math.factorial(k) for k in range(order + 1)]


def _series_cos(x0, order):
    cyc = [math.cos(x0), -math.sin(x0), -math.cos(x0), math.sin(x0)]
    return [cyc[k % 4] / math.factorial(k) for k in range(order + 1)]


def _series_exp(x0, order):
    e = math.exp(x0)
    return [e / math.factorial(k) for k in range(order + 1)]


def _series_log(x0, order):
    if x0 <= 0.0:
        raise JetDomainError(f"log of non-positive value {x0}")
    out = [math.log(x0)]
    for k in range(1, order + 1):
        out.append((-1.0) ** (k + 1) / (k * x0**k))
    return out


def _series_sqrt(x0, order):
    if x0 <= 0.0:
        raise JetDomainError(f"sqrt of non-positive value {x0}")
    out = [math.sqrt(x0)]
    c = 0.5 * x0 ** (-0.5)
    for k in range(1, order + 1):
        out.append(c)
        c *= (0.5 - k) / (k + 1) / x0
    return out


def _series_sinh(x0, order):
    cyc = [math.sinh(x0), math.cosh(x0)]
    return [cyc[k % 2] / math.factorial(k) for k in range(order + 1)]


def _series_cosh(x0, order):
    cyc = [math.cosh(x0), math.sinh(x0)]
    return [cyc[k % 2] / math.factorial(k) for k in range(order + 1)]


_UNARY_SERIES = {
    "sin": _series_sin,
    "cos": _series_cos,
    "exp": _series_exp,
    "log": _series_log,
    "sqrt": _series_sqrt,
    "sinh": _series_sinh,
    "cosh": _series_cosh,
}

_UNARY_FLOAT = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "neg": lambda v: -v,
}


def apply_unary(tag: str, x) -> Jet:
    """Apply a named elementary function to a jet (or float)."""
    if not isinstance(x, Jet):
        v = float(x)
        if tag == "log":
            if v <= 0.0:
                raise JetDomainError(f"log of non-positive value {v}")
            return math.log(v)
        if tag == "sqrt":
            if v <= 0.0:
                raise JetDomainError(f"sqrt of non-positive value {v}")
            return math.sqrt(v)
        try:
            return _UNARY_FLOAT[tag](v)
        except KeyError:
            raise JetShapeError(f"unknown function {tag!r}") from None
    if tag == "neg":
        return -x
    if tag == "tan":
        return apply_unary("sin", x) / apply_unary("cos", x)
    try:
        series_fn = _UNARY_SERIES[tag]
    except KeyError:
        raise JetShapeError(f"unknown function {tag!r}") from None
    return _compose(x, series_fn(x.value, x.order))


def binary(op: str, a, b):
    """Apply a named binary operation; operands may be jets or floats."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if op == "^":
        return pow_op(a, b)
    if op == "atan2":
        return atan2(a, b)
    raise JetShapeError(f"unknown binary operation {op!r}")


def pow_op(a, b):
    """Power with exact handling of integer exponents."""
    if isinstance(b, Jet):
        if not isinstance(a, Jet):
            if a <= 0.0:
                raise JetDomainError(f"power with non-positive base {a}")
            return exp(b * math.log(a))
        return exp(b * log(a))
    if isinstance(a, Jet):
        return a**b
    bf = float(b)
    if bf == int(bf):
        return float(a) ** int(bf)
    if a <= 0.0:
        raise JetDomainError(f"non-integer power of non-positive base {a}")
    return float(a) ** bf


def _int_pow(x: Jet, p: int) -> Jet:
    if p < 0:
        return _int_pow(_reciprocal(x), -p)
    r = constant(1.0, x.num_vars, x.order)
    base = x
    while p:
        if p & 1:
            r = r * base
        p >>= 1
        if p:
            base = base * base
    return r


def atan2(y, x):
    """Two-argument arctangent of jets, exact at the stored order.

    Writes atan2(Y, X) = atan2(y0, x0) + arctan(u) where
    u = (Y x0 - X y0) / (X x0 + Y y0) vanishes at the base point, so the
    arctangent series at zero composes exactly.
    """
    if not isinstance(y, Jet) and not isinstance(x, Jet):
        return math.atan2(float(y), float(x))
    if not isinstance(y, Jet):
        y = constant(float(y), x.num_vars, x.order)
    if not isinstance(x, Jet):
        x = constant(float(x), y.num_vars, y.order)
    x0, y0 = x.value, y.value
    if x0 == 0.0 and y0 == 0.0:
        raise JetDomainError("atan2 at the origin has no expansion")
    u = (y * x0 - x * y0) / (x * x0 + y * y0)
    series = [0.0]
    for k in range(1, u.order + 1):
        if k % 2 == 1:
            series.append((-1.0) ** ((k - 1) // 2) / k)
        else:
            series.append(0.0)
    return math.atan2(y0, x0) + _compose(u, series)


# -- generic elementary functions (float or Jet) ------------------------


def sin(x):
    return apply_unary("sin", x)


def cos(x):
    return apply_unary("cos", x)


def tan(x):
    return apply_unary("tan", x)


def exp(x):
    return apply_unary("exp", x)


def log(x):
    return apply_unary("log", x)


def sqrt(x):
    return apply_unary("sqrt", x)


def sinh(x):
    return apply_unary("sinh", x)


def cosh(x):
    return apply_unary("cosh", x)


def value_of(x) -> float:
    """Value part of a jet, or the float itself."""
    if isinstance(x, Jet):
        return x.value
    return float(x)


def order_of(x) -> float:
    """Truncation order of a jet; plain numbers count as unlimited."""
    if isinstance(x, Jet):
        return x.order
    return math.inf
