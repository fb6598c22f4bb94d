"""Rotation numbers of linear torus flows and arc-permutation covering numbers."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Tuple

import numpy as np

DENOMINATOR_CAP = 10**6


@dataclass(frozen=True)
class RotationNumber:
    value: float  # slope b/a, inf for vertical directions
    rational: bool
    p: Optional[int]  # convergent numerator used
    q: Optional[int]  # convergent denominator used
    error: float  # |value - p/q|

    def to_dict(self):
        return {"value": self.value, "rational": self.rational, "p": self.p, "q": self.q,
                "error": self.error}


def rotation_number(direction, cap: int = DENOMINATOR_CAP, rtol: float = 4 * np.finfo(float).eps) -> RotationNumber:
    """Slope b/a of the direction (a, b) on T^2 with a rationality verdict.

    The slope is compared with its best rational approximation of
    denominator at most ``cap``; it counts as rational when they agree to
    a few ulps.
    """
    a, b = (float(v) for v in direction)
    if a == 0.0 and b == 0.0:
        raise ValueError("direction must be nonzero")
    if a == 0.0:
        return RotationNumber(float("inf"), True, 1, 0, 0.0)
    slope = b / a
    frac = Fraction(slope).limit_denominator(cap)
    err = abs(slope - frac.numerator / frac.denominator)
    rational = err <= rtol * max(1.0, abs(slope))
    return RotationNumber(slope, bool(rational), frac.numerator, frac.denominator, float(err))


def arc_permutation_covering(m: int, p: int) -> Tuple[int, int]:
    """(n, d) for the rotation i -> i + p on m arcs: n cycles, each of length d = m / n."""
    if m <= 0:
        raise ValueError("m must be positive")
    if not (0 <= p < m):
        raise ValueError("need 0 <= p < m")
    n = gcd(p, m)
    return n, m // n
