"""Piecewise polynomial functions of one variable.

Cutoff functions, the radial profiles of the glued counterexample and the
Bernoulli function built from them are all piecewise polynomials, so sums,
products, derivatives and antiderivatives stay exact.
"""
from __future__ import annotations

from math import comb
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .jets import Univariate


def smoothstep_poly(order: int = 2) -> Polynomial:
    """Polynomial S on [0, 1] with S(0)=0, S(1)=1 and ``order`` vanishing derivatives at both ends."""
    k = order
    coef = np.zeros(2 * k + 2)
    for j in range(k + 1):
        coef[k + 1 + j] = comb(k + j, j) * comb(2 * k + 1, k - j) * (-1) ** j
    return Polynomial(coef)


def _shift(p: Polynomial, d: float) -> Polynomial:
    """q(t) = p(t + d)."""
    if d == 0.0:
        return Polynomial(p.coef)
    return p(Polynomial([d, 1.0]))


class PiecewisePolynomial:
    """Polynomial pieces on consecutive intervals ``[breaks[i], breaks[i+1]]``.

    Piece i is stored in the local variable ``t = s - breaks[i]`` so that
    high-degree pieces far from the origin keep full precision.  Outside
    ``[breaks[0], breaks[-1]]`` the first/last piece is continued.
    """

    def __init__(self, breaks: Sequence[float], pieces: Sequence[Polynomial]):
        breaks = np.asarray(breaks, dtype=float)
        if len(pieces) != len(breaks) - 1:
            raise ValueError("need one polynomial per interval")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        self.breaks = breaks
        self.pieces: List[Polynomial] = [Polynomial(p.coef) for p in pieces]

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value: float, lo: float = 0.0, hi: float = 1.0):
        return cls([lo, hi], [Polynomial([value])])

    @classmethod
    def from_knots(cls, knots: Sequence[Tuple[float, float]], order: int = 2):
        """Plateaus joined by smoothsteps.

        ``knots`` is a list of (position, value); between consecutive knots
        the function moves from one value to the next along a smoothstep of
        the given order (constant when the values agree).
        """
        S = smoothstep_poly(order)
        breaks = [knots[0][0]]
        pieces = []
        for (a, va), (b, vb) in zip(knots[:-1], knots[1:]):
            if va == vb:
                pieces.append(Polynomial([va]))
            else:
                pieces.append(va + (vb - va) * S(Polynomial([0.0, 1.0 / (b - a)])))
            breaks.append(b)
        return cls(breaks, pieces)

    # -- evaluation -------------------------------------------------------
    def _index(self, s: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.breaks, s, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def eval(self, s, nu: int = 0) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        idx = self._index(s)
        out = np.empty_like(s)
        for i, p in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                q = p.deriv(nu) if nu else p
                out[mask] = q(s[mask] - self.breaks[i])
        return out[0] if scalar else out

    def __call__(self, s):
        return self.eval(s)

    def as_univariate(self, name: str = "pp") -> Univariate:
        return Univariate(
            lambda t: self.eval(t, 0),
            lambda t: self.eval(t, 1),
            lambda t: self.eval(t, 2),
            name,
            lambda: self.deriv().as_univariate(name + "'"),
        )

    # -- algebra ----------------------------------------------------------
    def _on(self, breaks: np.ndarray) -> List[Polynomial]:
        """Pieces re-expressed on a refinement ``breaks``."""
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        out = []
        for a, i in zip(breaks[:-1], self._index(mids)):
            out.append(_shift(self.pieces[i], a - self.breaks[i]))
        return out

    def _refined(self, other: "PiecewisePolynomial"):
        breaks = np.union1d(self.breaks, other.breaks)
        return breaks, self._on(breaks), other._on(breaks)

    def __add__(self, other):
        if not isinstance(other, PiecewisePolynomial):
            return PiecewisePolynomial(self.breaks, [p + other for p in self.pieces])
        breaks, a, b = self._refined(other)
        return PiecewisePolynomial(breaks, [p + q for p, q in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return PiecewisePolynomial(self.breaks, [-p for p in self.pieces])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PiecewisePolynomial):
            return PiecewisePolynomial(self.breaks, [p * other for p in self.pieces])
        breaks, a, b = self._refined(other)
        return PiecewisePolynomial(breaks, [p * q for p, q in zip(a, b)])

    __rmul__ = __mul__

    def deriv(self, m: int = 1) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.breaks, [p.deriv(m) for p in self.pieces])

    def antiderivative(self, base: float | None = None) -> "PiecewisePolynomial":
        """Continuous antiderivative vanishing at ``base`` (default: left end)."""
        base = self.breaks[0] if base is None else base
        pieces = []
        offset = 0.0
        for i, p in enumerate(self.pieces):
            P = p.integ()
            pieces.append(P - P(0.0) + offset)
            offset = pieces[-1](self.breaks[i + 1] - self.breaks[i])
        out = PiecewisePolynomial(self.breaks, pieces)
        return out - float(out.eval(base))

    def integral(self, a: float, b: float) -> float:
        F = self.antiderivative()
        return float(F.eval(b) - F.eval(a))

    def affine_compose(self, scale: float, shift: float) -> "PiecewisePolynomial":
        """The function ``s -> self(scale * s + shift)``."""
        if scale == 0:
            raise ValueError("scale must be nonzero")
        old = self.breaks
        new = (old - shift) / scale
        order = np.arange(len(self.pieces))
        if scale < 0:
            new = new[::-1]
            order = order[::-1]
        pieces = []
        for j, i in enumerate(order):
            # old local variable = scale * (new_break_j + t) + shift - old_break_i
            pieces.append(self.pieces[i](Polynomial([scale * new[j] + shift - old[i], scale])))
        return PiecewisePolynomial(new, pieces)

    def restrict(self, lo: float, hi: float) -> "PiecewisePolynomial":
        inner = self.breaks[(self.breaks > lo) & (self.breaks < hi)]
        breaks = np.concatenate([[lo], inner, [hi]])
        return PiecewisePolynomial(breaks, self._on(breaks))

    def sign_runs(self, sign: int, lo: float, hi: float, n: int = 20001,
                  thresh: float = 1e-12) -> List[Tuple[float, float]]:
        """Maximal sub-intervals of [lo, hi] (on a sampling grid) where sign(self) == sign."""
        s = np.linspace(lo, hi, n)
        v = self.eval(s)
        hit = (v * sign) > thresh
        runs = []
        start = None
        for i, flag in enumerate(hit):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                runs.append((s[start], s[i - 1]))
                start = None
        if start is not None:
            runs.append((s[start], s[-1]))
        return runs

    def __repr__(self):
        return f"PiecewisePolynomial({len(self.pieces)} pieces on [{self.breaks[0]:g}, {self.breaks[-1]:g}])"


def bump(lo: float, hi: float, power: int = 3) -> PiecewisePolynomial:
    """Nonnegative C^(power-1) bump supported in [lo, hi] with peak value 1."""
    t = Polynomial([0.0, 1.0 / (hi - lo)])
    core = 4.0**power * (t * (1 - t)) ** power
    zero = Polynomial([0.0])
    return PiecewisePolynomial([lo - 1.0, lo, hi, hi + 1.0], [zero, core, zero])


def concatenate(parts: Iterable[PiecewisePolynomial]) -> PiecewisePolynomial:
    breaks: List[float] = []
    pieces: List[Polynomial] = []
    for part in parts:
        if breaks and abs(breaks[-1] - part.breaks[0]) > 1e-15:
            raise ValueError("parts must be contiguous")
        if not breaks:
            breaks.append(part.breaks[0])
        breaks.extend(part.breaks[1:])
        pieces.extend(part.pieces)
    return PiecewisePolynomial(breaks, pieces)
