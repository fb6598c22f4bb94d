"""Second-order jets of scalar functions on a 3-dimensional chart.

Every field in the package is evaluated through a :class:`ScalarField`, a
small forward-mode differentiation graph.  Evaluating a field at ``N`` points
returns a :class:`Jet` holding the value, the gradient and (when available)
the Hessian at each point, all computed from closed-form derivative rules.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


class JetOrderError(ValueError):
    """Requested derivative order exceeds what a field can supply."""


@dataclass(frozen=True)
class Jet:
    value: np.ndarray
    first: Optional[np.ndarray] = None
    second: Optional[np.ndarray] = None

    @property
    def order(self) -> int:
        if self.second is not None:
            return 2
        if self.first is not None:
            return 1
        return 0


def as_points(pts) -> np.ndarray:
    """Return ``pts`` as a float array of shape (N, 3)."""
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected points of shape (N, 3), got {arr.shape}")
    return arr


class Univariate:
    """A smooth map R -> R given by its value and first two derivatives."""

    def __init__(self, f: Callable, df: Callable, d2f: Callable, name: str = "u",
                 derivative: Optional[Callable[[], "Univariate"]] = None):
        self.f = f
        self.df = df
        self.d2f = d2f
        self.name = name
        self._derivative = derivative

    def derivative(self) -> Optional["Univariate"]:
        """The map u' as a Univariate, when it is known in closed form."""
        return None if self._derivative is None else self._derivative()

    def derivs(self, t: np.ndarray, order: int):
        out = [self.f(t)]
        if order >= 1:
            out.append(self.df(t))
        if order >= 2:
            out.append(self.d2f(t))
        return out

    def __call__(self, t):
        return self.f(np.asarray(t, dtype=float))

    def __repr__(self):
        return f"Univariate({self.name})"


class DegenerateDivisionError(ArithmeticError):
    """Division by a field that (numerically) vanishes at an evaluation point."""


def _reciprocal(threshold: float) -> Univariate:
    def f(t):
        if np.any(np.abs(t) <= threshold):
            raise DegenerateDivisionError(
                f"division by a field with |value| <= {threshold:g}"
            )
        return 1.0 / t

    return Univariate(f, lambda t: -1.0 / t**2, lambda t: 2.0 / t**3, "reciprocal",
                      lambda: scaled_power(-1.0, -2.0))


def scaled_power(c: float, n: float) -> Univariate:
    """t -> c * t**n."""
    return Univariate(
        lambda t: c * t**n,
        lambda t: c * n * t ** (n - 1),
        lambda t: c * n * (n - 1) * t ** (n - 2),
        f"{c:g}*pow{n:g}",
        lambda: scaled_power(c * n, n - 1) if n != 0 else scaled_power(0.0, 0.0),
    )


def power(n: float) -> Univariate:
    return scaled_power(1.0, n)


def _trig(k: int) -> Univariate:
    # k-th derivative of sin, k mod 4
    cyc = [np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)]
    names = ["sin", "cos", "-sin", "-cos"]
    return Univariate(cyc[k % 4], cyc[(k + 1) % 4], cyc[(k + 2) % 4], names[k % 4],
                      lambda: _trig(k + 1))


def _scaled_exp(c: float) -> Univariate:
    return Univariate(lambda t: c * np.exp(t), lambda t: c * np.exp(t),
                      lambda t: c * np.exp(t), "exp", lambda: _scaled_exp(c))


SIN = _trig(0)
COS = _trig(1)
EXP = _scaled_exp(1.0)
LOG = Univariate(np.log, lambda t: 1.0 / t, lambda t: -1.0 / t**2, "log",
                 lambda: power(-1.0))
SQRT = Univariate(
    np.sqrt, lambda t: 0.5 / np.sqrt(t), lambda t: -0.25 * t**-1.5, "sqrt",
    lambda: scaled_power(0.5, -0.5),
)


JetFn = Callable[[np.ndarray, int], Jet]

_local = threading.local()


class _EvalCache:
    """Memo of node evaluations for the duration of one top-level call."""

    def __init__(self):
        self.store = {}
        self.keep = []


def _evaluate(node: "ScalarField", p: np.ndarray, k: int) -> Jet:
    cache = getattr(_local, "cache", None)
    if cache is None:
        return node._fn(p, k)
    key = (id(node), id(p))
    hit = cache.store.get(key)
    if hit is not None and hit[0] >= k:
        return hit[1]
    j = node._fn(p, k)
    cache.store[key] = (k, j)
    cache.keep.append((node, p))
    return j


def _top(node: "ScalarField", p: np.ndarray, k: int) -> Jet:
    if getattr(_local, "cache", None) is not None:
        return _evaluate(node, p, k)
    _local.cache = _EvalCache()
    try:
        return _evaluate(node, p, k)
    finally:
        _local.cache = None


class evaluation_scope:
    """Share one evaluation cache across several field evaluations at the same points."""

    def __enter__(self):
        self._outer = getattr(_local, "cache", None)
        if self._outer is None:
            _local.cache = _EvalCache()
        return self

    def __exit__(self, *exc):
        if self._outer is None:
            _local.cache = None
        return False


class ScalarField:
    """Scalar function of the three chart coordinates with analytic jets.

    ``fn(pts, order)`` must return a :class:`Jet` populated up to ``order``.
    ``order`` on the field is the highest derivative order it can supply.
    ``dfn(i)``, when given, builds the partial derivative along coordinate
    ``i`` as a new field (so repeated differentiation keeps full order);
    without it :meth:`partial` falls back to slicing the jet.
    Child nodes are evaluated through a per-call memo, so shared
    subexpressions cost one evaluation.
    """

    __slots__ = ("_fn", "order", "label", "_dfn", "_partials", "const")
    degree = 0

    def __init__(self, fn: JetFn, order: int = 2, label: str = "f",
                 dfn: Optional[Callable[[int], "ScalarField"]] = None,
                 const: Optional[float] = None):
        self._fn = fn
        self.order = order
        self.label = label
        self._dfn = dfn
        self._partials = {}
        self.const = const

    # -- evaluation -------------------------------------------------------
    def jet(self, pts, order: int = 2) -> Jet:
        if order > self.order:
            raise JetOrderError(
                f"field {self.label!r} supplies derivatives up to order "
                f"{self.order}, requested {order}"
            )
        return _top(self, as_points(pts), order)

    def __call__(self, pts) -> np.ndarray:
        return _top(self, as_points(pts), 0).value

    def gradient_values(self, pts) -> np.ndarray:
        return self.jet(pts, 1).first

    def hessian_values(self, pts) -> np.ndarray:
        return self.jet(pts, 2).second

    def __repr__(self):
        return f"ScalarField({self.label}, order={self.order})"

    # -- algebra ----------------------------------------------------------
    def __add__(self, other):
        other = lift(other)
        a = self
        if a.const is not None and other.const is not None:
            return constant(a.const + other.const)
        if other.const == 0.0:
            return a
        if a.const == 0.0:
            return other
        return _combine(a, other, _jet_add, f"({a.label}+{other.label})",
                        lambda i: a.partial(i) + other.partial(i))

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-lift(other))

    def __rsub__(self, other):
        return lift(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            c = float(other)
            f = self
            if f.const is not None:
                return constant(f.const * c)
            if c == 0.0:
                return constant(0.0)
            if c == 1.0:
                return f
            return ScalarField(
                lambda p, k: _jet_scale(_evaluate(f, p, k), c),
                f.order,
                f"{c:g}*{f.label}",
                lambda i: f.partial(i) * c,
            )
        other = lift(other)
        a = self
        if other.const is not None:
            return a * other.const
        if a.const is not None:
            return other * a.const
        return _combine(a, other, _jet_mul, f"{a.label}*{other.label}",
                        lambda i: a.partial(i) * other + a * other.partial(i))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / float(other))
        other = lift(other)
        if other.const is not None:
            return self * (1.0 / other.const)
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return lift(other) * reciprocal(self)

    def __pow__(self, n):
        if n == 2:
            return self * self
        return compose(power(n), self)

    def partial(self, i: int) -> "ScalarField":
        """Partial derivative along chart coordinate ``i``."""
        hit = self._partials.get(i)
        if hit is not None:
            return hit
        if self._dfn is not None:
            out = self._dfn(i)
        else:
            if self.order < 1:
                raise JetOrderError(f"{self.label!r} has no derivatives")

            def fn(p, k, f=self):
                j = _evaluate(f, p, k + 1)
                first = j.second[:, i, :] if k >= 1 else None
                return Jet(j.first[:, i], first, None)

            out = ScalarField(fn, self.order - 1, f"d{i}({self.label})")
        self._partials[i] = out
        return out


def lift(obj) -> ScalarField:
    if isinstance(obj, ScalarField):
        return obj
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return constant(float(obj))
    raise TypeError(f"cannot use {type(obj).__name__} as a scalar field")


def _combine(a: ScalarField, b: ScalarField, rule, label, dfn=None) -> ScalarField:
    def fn(p, k):
        return rule(_evaluate(a, p, k), _evaluate(b, p, k), k)

    return ScalarField(fn, min(a.order, b.order), label, dfn)


def _jet_add(a: Jet, b: Jet, k: int) -> Jet:
    return Jet(
        a.value + b.value,
        a.first + b.first if k >= 1 else None,
        a.second + b.second if k >= 2 else None,
    )


def _jet_scale(a: Jet, c: float) -> Jet:
    return Jet(
        c * a.value,
        None if a.first is None else c * a.first,
        None if a.second is None else c * a.second,
    )


def _jet_mul(a: Jet, b: Jet, k: int) -> Jet:
    value = a.value * b.value
    first = second = None
    if k >= 1:
        first = a.first * b.value[:, None] + b.first * a.value[:, None]
    if k >= 2:
        cross = a.first[:, :, None] * b.first[:, None, :]
        second = (
            a.second * b.value[:, None, None]
            + b.second * a.value[:, None, None]
            + cross
            + np.swapaxes(cross, 1, 2)
        )
    return Jet(value, first, second)


def compose(u: Univariate, f: ScalarField) -> ScalarField:
    """The field ``u(f)`` with derivatives from the chain rule."""
    f = lift(f)
    if f.const is not None:
        return constant(float(u.f(np.array(f.const))))

    def fn(p, k):
        j = _evaluate(f, p, k)
        d = u.derivs(j.value, k)
        first = second = None
        if k >= 1:
            first = d[1][:, None] * j.first
        if k >= 2:
            second = (
                d[2][:, None, None] * j.first[:, :, None] * j.first[:, None, :]
                + d[1][:, None, None] * j.second
            )
        return Jet(d[0], first, second)

    dfn = None
    if u._derivative is not None:
        dfn = lambda i: compose(u.derivative(), f) * f.partial(i)  # noqa: E731
    return ScalarField(fn, min(f.order, 2), f"{u.name}({f.label})", dfn)


def _zero_dfn(i):
    return constant(0.0)


def constant(c: float) -> ScalarField:
    def fn(p, k):
        n = p.shape[0]
        return Jet(
            np.full(n, c),
            np.zeros((n, 3)) if k >= 1 else None,
            np.zeros((n, 3, 3)) if k >= 2 else None,
        )

    return ScalarField(fn, 2, f"{c:g}", _zero_dfn, const=float(c))


def coordinate(i: int, name: Optional[str] = None) -> ScalarField:
    e = np.zeros(3)
    e[i] = 1.0

    def fn(p, k):
        n = p.shape[0]
        return Jet(
            p[:, i].copy(),
            np.broadcast_to(e, (n, 3)).copy() if k >= 1 else None,
            np.zeros((n, 3, 3)) if k >= 2 else None,
        )

    return ScalarField(fn, 2, name or "xyz"[i], lambda j: constant(float(i == j)))


def coords(names: Sequence[str] = ("x", "y", "z")):
    """The three coordinate functions of a chart."""
    return tuple(coordinate(i, n) for i, n in enumerate(names))


def of_coordinate(u: Univariate, i: int) -> ScalarField:
    """The field ``u(x_i)``; its partials are exact whenever ``u`` knows its derivative."""
    return compose(u, coordinate(i))


def sin(f) -> ScalarField:
    return compose(SIN, lift(f))


def cos(f) -> ScalarField:
    return compose(COS, lift(f))


def exp(f) -> ScalarField:
    return compose(EXP, lift(f))


def sqrt(f) -> ScalarField:
    return compose(SQRT, lift(f))


def reciprocal(f: ScalarField, threshold: float = 1e-300) -> ScalarField:
    return compose(_reciprocal(threshold), f)


def from_callables(value, gradient, hessian=None, label="custom") -> ScalarField:
    """Field assembled from explicit value/gradient/Hessian callables.

    Used for numerically defined functions whose derivatives are known in
    closed form (for example a line-integral primitive whose gradient is the
    integrand).
    """

    def fn(p, k):
        v = np.asarray(value(p), dtype=float)
        first = np.asarray(gradient(p), dtype=float) if k >= 1 else None
        second = np.asarray(hessian(p), dtype=float) if k >= 2 else None
        return Jet(v, first, second)

    return ScalarField(fn, 2 if hessian is not None else 1, label)


def affine_pullback(f: ScalarField, A: np.ndarray, b: np.ndarray) -> ScalarField:
    """``f`` composed with the affine map ``p -> A p + b``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if f.const is not None:
        return f

    def fn(p, k):
        j = _evaluate(f, p @ A.T + b, k)
        first = j.first @ A if k >= 1 else None
        second = np.einsum("ai,nab,bj->nij", A, j.second, A) if k >= 2 else None
        return Jet(j.value, first, second)

    def dfn(i):
        out = constant(0.0)
        for a in range(3):
            if A[a, i] != 0.0:
                out = out + affine_pullback(f.partial(a), A, b) * float(A[a, i])
        return out

    return ScalarField(fn, f.order, f"{f.label}∘aff", dfn)
