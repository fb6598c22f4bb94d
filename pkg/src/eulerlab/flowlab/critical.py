"""Critical points of functions on a disk by grid-seeded Newton iteration."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..chartcalc import ScalarField

log = logging.getLogger(__name__)


@dataclass
class CriticalSet:
    points: np.ndarray  # (K, 3), z = 0
    values: np.ndarray
    hessians: np.ndarray  # (K, 2, 2)
    klass: np.ndarray  # str labels
    n_seeds: int
    n_failed: int

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, self.hessians, self.klass))

    def to_dict(self):
        return {
            "count": len(self),
            "n_seeds": self.n_seeds,
            "n_failed": self.n_failed,
            "value_range": [float(self.values.min()), float(self.values.max())] if len(self) else [],
            "classes": {k: int(np.sum(self.klass == k)) for k in np.unique(self.klass)},
        }


def _classify(H2, tol=1e-9):
    d = H2[:, 0, 0] * H2[:, 1, 1] - H2[:, 0, 1] * H2[:, 1, 0]
    out = np.where(d < -tol, "hyperbolic", np.where(d > tol, "elliptic", "degenerate"))
    return out


def critical_points(H: ScalarField, radius: float, resolution: int = 512, tol: float = 1e-13,
                    inner_radius: float = 0.0, max_iter: int = 50, dedupe: float = 1e-6) -> CriticalSet:
    """Zeros of (dH/dx, dH/dy) in the annulus inner_radius <= r <= radius."""
    g = np.linspace(-radius, radius, resolution)
    xx, yy = np.meshgrid(g, g)
    r2 = xx**2 + yy**2
    keep = (r2 <= radius**2) & (r2 >= inner_radius**2)
    P = np.column_stack([xx[keep], yy[keep], np.zeros(keep.sum())])
    n_seeds = len(P)
    alive = np.ones(n_seeds, bool)
    done = np.zeros(n_seeds, bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(alive & ~done)
        if idx.size == 0:
            break
        j = H.jet(P[idx], 2)
        grad = j.first[:, :2]
        gn = np.linalg.norm(grad, axis=1)
        conv = gn < tol
        done[idx[conv]] = True
        idx, grad, hess = idx[~conv], grad[~conv], j.second[~conv][:, :2, :2]
        det = hess[:, 0, 0] * hess[:, 1, 1] - hess[:, 0, 1] * hess[:, 1, 0]
        sing = np.abs(det) < 1e-14
        alive[idx[sing]] = False
        idx, grad, hess, det = idx[~sing], grad[~sing], hess[~sing], det[~sing]
        step = np.column_stack([
            (hess[:, 1, 1] * grad[:, 0] - hess[:, 0, 1] * grad[:, 1]) / det,
            (hess[:, 0, 0] * grad[:, 1] - hess[:, 1, 0] * grad[:, 0]) / det,
        ])
        P[idx, :2] -= step
        rr = P[idx, 0] ** 2 + P[idx, 1] ** 2
        out = (rr > radius**2) | (rr < inner_radius**2) | ~np.isfinite(rr)
        alive[idx[out]] = False
    failed = int(np.sum(~done))
    if failed:
        log.info("critical_points: %d of %d seeds did not converge", failed, n_seeds)
    C = P[done]
    if len(C):
        # bin first so that many seeds converging to one point stay cheap
        _, first = np.unique(np.round(C[:, :2] / dedupe), axis=0, return_index=True)
        C = C[np.sort(first)]
        tree = cKDTree(C[:, :2])
        pairs = tree.query_pairs(dedupe, output_type="ndarray")
        unique = np.ones(len(C), bool)
        for a, b in pairs:
            if unique[a] and unique[b]:
                unique[b] = False
        C = C[unique]
    if len(C):
        j = H.jet(C, 2)
        vals, H2 = j.value, j.second[:, :2, :2]
    else:
        vals, H2 = np.empty(0), np.empty((0, 2, 2))
    return CriticalSet(C, vals, H2, _classify(H2), n_seeds, failed)
