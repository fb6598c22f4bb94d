"""Vector fields, differential forms and metrics on a single chart.

Forms are stored by coefficients in the coordinate basis:

* 1-forms ``a1 dx + a2 dy + a3 dz``
* 2-forms ``b1 dy^dz + b2 dz^dx + b3 dx^dy``
* 3-forms ``m dx^dy^dz``

With this basis d acts as grad/curl/div on the coefficient vectors.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .jets import ScalarField, affine_pullback, as_points, constant, lift


def _fields(items, n):
    items = tuple(lift(c) for c in items)
    if len(items) != n:
        raise ValueError(f"expected {n} components, got {len(items)}")
    return items


def _stack(fields, pts):
    pts = as_points(pts)
    return np.stack([f(pts) for f in fields], axis=-1)


def _jets(fields, pts, order):
    pts = as_points(pts)
    js = [f.jet(pts, order) for f in fields]
    value = np.stack([j.value for j in js], axis=1)
    first = np.stack([j.first for j in js], axis=1) if order >= 1 else None
    second = np.stack([j.second for j in js], axis=1) if order >= 2 else None
    return value, first, second


class _Componentwise:
    """Shared algebra for objects made of scalar components."""

    n = 3

    def __init__(self, comps: Sequence, label: str = ""):
        self.comps = _fields(comps, self.n)
        self.label = label or type(self).__name__

    def __call__(self, pts) -> np.ndarray:
        return _stack(self.comps, pts)

    def jets(self, pts, order: int = 1):
        """Component values (N, n), first partials (N, n, 3), second partials (N, n, 3, 3)."""
        return _jets(self.comps, pts, order)

    @property
    def order(self) -> int:
        return min(c.order for c in self.comps)

    def _new(self, comps):
        return type(self)(comps, self.label)

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._new([a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._new([a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return self._new([-a for a in self.comps])

    def __mul__(self, f):
        return self._new([a * f for a in self.comps])

    __rmul__ = __mul__

    def __truediv__(self, f):
        if isinstance(f, (int, float)):
            return self * (1.0 / f)
        inv = 1.0 / lift(f)
        return self._new([a * inv for a in self.comps])

    def __getitem__(self, i):
        return self.comps[i]

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(c.label for c in self.comps)})"


class VectorField(_Componentwise):
    degree = None


class OneForm(_Componentwise):
    degree = 1


class TwoForm(_Componentwise):
    degree = 2


class ThreeForm(_Componentwise):
    degree = 3
    n = 1

    def __init__(self, coef, label: str = ""):
        if isinstance(coef, (list, tuple)):
            (coef,) = coef
        super().__init__([coef], label)

    @property
    def coef(self) -> ScalarField:
        return self.comps[0]

    def __call__(self, pts) -> np.ndarray:
        return self.coef(pts)


def zero_vector() -> VectorField:
    return VectorField([0.0, 0.0, 0.0], "0")


def basis_vector(i: int) -> VectorField:
    return VectorField([float(i == j) for j in range(3)], "xyz"[i])


def basis_one_form(i: int) -> OneForm:
    return OneForm([float(i == j) for j in range(3)], "d" + "xyz"[i])


def volume_form(m=1.0) -> ThreeForm:
    return ThreeForm(lift(m), "vol")


class NotPositiveDefiniteError(ValueError):
    """A metric failed the positive-definiteness check at an evaluated point."""


class MetricField:
    """Symmetric 3x3 coefficient field ``g_ij``.

    Only the upper triangle is stored, so symmetry holds exactly.
    """

    degree = None

    def __init__(self, entries, label: str = "g"):
        entries = [[lift(entries[i][j]) for j in range(3)] for i in range(3)]
        self._upper = {(i, j): entries[i][j] for i in range(3) for j in range(i, 3)}
        self.label = label

    @classmethod
    def diagonal(cls, d0, d1, d2, label="g"):
        z = constant(0.0)
        return cls([[d0, z, z], [z, d1, z], [z, z, d2]], label)

    @classmethod
    def euclidean(cls):
        return cls.diagonal(1.0, 1.0, 1.0, "euclid")

    def entry(self, i: int, j: int) -> ScalarField:
        return self._upper[(min(i, j), max(i, j))]

    @property
    def order(self) -> int:
        return min(f.order for f in self._upper.values())

    def matrix(self, pts) -> np.ndarray:
        pts = as_points(pts)
        out = np.empty((pts.shape[0], 3, 3))
        for (i, j), f in self._upper.items():
            out[:, i, j] = out[:, j, i] = f(pts)
        return out

    def jets(self, pts, order: int = 1):
        """g (N,3,3), dg (N,3,3,3) with dg[n,i,j,k] = d_k g_ij, and second partials."""
        pts = as_points(pts)
        n = pts.shape[0]
        g = np.empty((n, 3, 3))
        dg = np.empty((n, 3, 3, 3)) if order >= 1 else None
        d2g = np.empty((n, 3, 3, 3, 3)) if order >= 2 else None
        for (i, j), f in self._upper.items():
            jt = f.jet(pts, order)
            g[:, i, j] = g[:, j, i] = jt.value
            if order >= 1:
                dg[:, i, j] = dg[:, j, i] = jt.first
            if order >= 2:
                d2g[:, i, j] = d2g[:, j, i] = jt.second
        return g, dg, d2g

    def check_positive(self, pts) -> np.ndarray:
        """Smallest eigenvalue at each point; raises if any is not positive."""
        lam = np.linalg.eigvalsh(self.matrix(pts))[:, 0]
        if np.any(lam <= 0):
            k = int(np.argmin(lam))
            raise NotPositiveDefiniteError(
                f"metric {self.label!r} not positive definite at {as_points(pts)[k]}"
            )
        return lam

    def christoffel(self, pts) -> np.ndarray:
        """Gamma[n, k, i, j] = Christoffel symbol of the second kind."""
        g, dg, _ = self.jets(pts, 1)
        ginv = np.linalg.inv(g)
        # first kind: G[l,i,j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
        first = 0.5 * (
            np.einsum("njli->nlij", dg)
            + np.einsum("nilj->nlij", dg)
            - np.einsum("nijl->nlij", dg)
        )
        return np.einsum("nkl,nlij->nkij", ginv, first)

    def inverse(self) -> "MetricField":
        """Inverse metric g^ij as fields (adjugate over determinant)."""
        e = self.entry
        cof = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                r = [a for a in range(3) if a != i]
                c = [b for b in range(3) if b != j]
                minor = e(r[0], c[0]) * e(r[1], c[1]) - e(r[0], c[1]) * e(r[1], c[0])
                cof[i][j] = minor * float((-1) ** (i + j))
        det = self.determinant()
        inv = 1.0 / det
        return MetricField([[cof[j][i] * inv for j in range(3)] for i in range(3)],
                           f"{self.label}^-1")

    def determinant(self) -> ScalarField:
        e = self.entry
        return (
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        )

    def apply(self, X: VectorField) -> list:
        """Component fields of g X (index lowered)."""
        return [sum((self.entry(i, j) * X[j] for j in range(3)), constant(0.0))
                for i in range(3)]

    def inner(self, X: VectorField, Y: VectorField) -> ScalarField:
        gX = self.apply(X)
        return sum((gX[i] * Y[i] for i in range(3)), constant(0.0))

    def __repr__(self):
        return f"MetricField({self.label})"


# -- affine pullbacks --------------------------------------------------------
def _cofactor_t(A):
    # cof(A)^T = det(A) A^{-1}
    return np.linalg.det(A) * np.linalg.inv(A)


def pullback(obj, A, b):
    """Pull a field back along the affine map ``G(p) = A p + b``.

    Scalars compose, vectors transform by ``A^{-1}``, forms and metrics by the
    transpose rules of their degree.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if isinstance(obj, ScalarField):
        return affine_pullback(obj, A, b)
    if isinstance(obj, ThreeForm):
        return ThreeForm(affine_pullback(obj.coef, A, b) * float(np.linalg.det(A)),
                         obj.label)
    if isinstance(obj, MetricField):
        comps = [[None] * 3 for _ in range(3)]
        pulled = {k: affine_pullback(f, A, b) for k, f in obj._upper.items()}
        for i in range(3):
            for j in range(3):
                acc = constant(0.0)
                for a in range(3):
                    for c in range(3):
                        w = A[a, i] * A[c, j]
                        if w != 0.0:
                            acc = acc + pulled[(min(a, c), max(a, c))] * float(w)
                comps[i][j] = acc
        return MetricField(comps, obj.label)
    comps = [affine_pullback(c, A, b) for c in obj.comps]
    if isinstance(obj, VectorField):
        M = np.linalg.inv(A)
    elif isinstance(obj, OneForm):
        M = A.T
    elif isinstance(obj, TwoForm):
        M = _cofactor_t(A)
    else:
        raise TypeError(f"cannot pull back {type(obj).__name__}")
    new = []
    for i in range(3):
        acc = constant(0.0)
        for j in range(3):
            if M[i, j] != 0.0:
                acc = acc + comps[j] * float(M[i, j])
        new.append(acc)
    return type(obj)(new, obj.label)
