"""Charts, identification maps and point normalization."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np


class OutsideAtlasError(ValueError):
    """A point cannot be brought into any chart domain."""


@dataclass(frozen=True)
class AffineMap:
    """p -> A p + b."""

    A: np.ndarray
    b: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))

    def __call__(self, pts):
        return np.asarray(pts, dtype=float) @ self.A.T + self.b

    def inverse(self) -> "AffineMap":
        Ai = np.linalg.inv(self.A)
        return AffineMap(Ai, -Ai @ self.b, f"{self.name}^-1")

    def then(self, other: "AffineMap") -> "AffineMap":
        """other after self."""
        return AffineMap(other.A @ self.A, other.A @ self.b + other.b, f"{other.name}*{self.name}")

    @property
    def orientation(self) -> int:
        return int(np.sign(np.linalg.det(self.A)))


@dataclass(frozen=True)
class Chart:
    """Coordinate box with optional periodic axes and an optional twist.

    ``periods[i]`` is the period of axis i or None.  A twist ``(axis, M)``
    identifies ``p`` with ``p + e_axis`` composed with the linear map ``M``
    acting on the two remaining axes (a mapping torus).
    """

    id: str
    lo: Tuple[float, float, float]
    hi: Tuple[float, float, float]
    periods: Tuple[Optional[float], Optional[float], Optional[float]] = (None, None, None)
    names: Tuple[str, str, str] = ("x", "y", "z")
    twist: Optional[Tuple[int, Tuple[Tuple[float, float], Tuple[float, float]]]] = None
    radial: Optional[float] = None  # disk radius in the first two axes, if any

    def contains(self, p, slack: float = 1e-12) -> bool:
        p = np.asarray(p, dtype=float)
        ok = np.all(p >= np.asarray(self.lo) - slack) and np.all(p <= np.asarray(self.hi) + slack)
        if ok and self.radial is not None:
            ok = p[0] ** 2 + p[1] ** 2 <= self.radial**2 * (1 + 1e-12)
        return bool(ok)


@dataclass(frozen=True)
class Point:
    chart_id: str
    coords: Tuple[float, float, float]

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


@dataclass
class Atlas:
    charts: Dict[str, Chart]
    generators: List[AffineMap] = field(default_factory=list)
    transitions: Dict[Tuple[str, str], AffineMap] = field(default_factory=dict)
    name: str = "atlas"

    @property
    def default_chart(self) -> str:
        return next(iter(self.charts))

    def chart(self, chart_id: Optional[str] = None) -> Chart:
        return self.charts[chart_id or self.default_chart]

    def normalize(self, raw, chart_id: Optional[str] = None) -> Tuple[Point, np.ndarray]:
        """Canonical representative of ``raw`` and the linear part of the identification used.

        The linear part maps tangent vectors at ``raw`` to tangent vectors at
        the returned point.
        """
        ch = self.chart(chart_id)
        p = np.array(raw, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise OutsideAtlasError(f"not a finite 3-vector: {raw!r}")
        L = np.eye(3)
        if ch.twist is not None:
            axis, M = ch.twist
            per = ch.periods[axis] or 1.0
            k = int(np.floor(p[axis] / per))
            if k:
                others = [i for i in range(3) if i != axis]
                Mk = np.linalg.matrix_power(np.linalg.inv(np.asarray(M, dtype=float)), k)
                # exact for integer monodromies
                Mk = np.round(Mk) if np.allclose(Mk, np.round(Mk)) else Mk
                p[axis] -= k * per
                p[others] = Mk @ p[others]
                step = np.eye(3)
                step[np.ix_(others, others)] = Mk
                L = step @ L
        for i, per in enumerate(ch.periods):
            if per is not None and (ch.twist is None or i != ch.twist[0]):
                p[i] = np.mod(p[i], per)
                if p[i] >= per:  # mod can round up to the period
                    p[i] = 0.0
        if ch.twist is not None:
            axis = ch.twist[0]
            if p[axis] >= (ch.periods[axis] or 1.0):
                p[axis] = 0.0
        if not ch.contains(p):
            raise OutsideAtlasError(f"point {tuple(raw)} leaves chart {ch.id!r}")
        return Point(ch.id, tuple(float(v) for v in p)), L

    def check_generators(self, tol: float = 1e-14) -> float:
        """Largest deviation of g^-1 g from the identity over generators."""
        worst = 0.0
        rng = np.random.default_rng(0)
        pts = rng.random((16, 3))
        for g in self.generators:
            back = g.inverse()(g(pts))
            worst = max(worst, float(np.max(np.abs(back - pts))))
            if g.orientation <= 0:
                raise ValueError(f"generator {g.name} is not orientation preserving")
        return worst


def normalize_point(atlas: Atlas, raw: Sequence[float], chart_id: Optional[str] = None) -> Point:
    return atlas.normalize(raw, chart_id)[0]


def mapping_torus_atlas(M, name: str) -> Atlas:
    """R^3 modulo (x,y,z)~(x,y+1,z)~(x,y,z+1)~(x+1, M(y,z))."""
    M = np.asarray(M, dtype=float)
    chart = Chart(
        id=name,
        lo=(0.0, 0.0, 0.0),
        hi=(1.0, 1.0, 1.0),
        periods=(1.0, 1.0, 1.0),
        twist=(0, tuple(map(tuple, M))),
    )
    A = np.eye(3)
    A[1:, 1:] = M
    gens = [
        AffineMap(np.eye(3), [0, 1, 0], "ty"),
        AffineMap(np.eye(3), [0, 0, 1], "tz"),
        AffineMap(A, [1, 0, 0], "monodromy"),
    ]
    return Atlas({name: chart}, gens, name=name)
