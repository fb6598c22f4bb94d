"""The data bundle of a stationary Euler solution."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from ..chartcalc import (
    MetricField,
    OneForm,
    ScalarField,
    ThreeForm,
    TwoForm,
    VectorField,
    constant,
    interior_product,
)
from .atlas import Atlas


@dataclass
class ModelSolution:
    atlas: Atlas
    X: VectorField
    lam: OneForm
    omega: TwoForm
    mu: ThreeForm
    bernoulli: ScalarField
    metric: Optional[MetricField] = None
    pressure: Optional[ScalarField] = None
    name: str = "model"
    chart_id: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def chart(self):
        return self.atlas.chart(self.chart_id)

    def invariant_residuals(self, pts) -> Dict[str, float]:
        """omega - i_X mu, min |mu| and min lambda(X) at ``pts``."""
        pts = np.asarray(pts, dtype=float)
        iXmu = interior_product(self.X, self.mu)
        return {
            "omega": float(np.max(np.abs(self.omega(pts) - iXmu(pts)))),
            "min_abs_mu": float(np.min(np.abs(self.mu(pts)))),
            "min_lambda_X": float(np.min(interior_product(self.X, self.lam)(pts))),
        }


def pairing_metric(lam: OneForm, X: VectorField) -> MetricField:
    """Metric with X orthogonal to ker(lam), |X|^2 = lam(X), Euclidean on ker(lam).

    g = lam lam^T / lam(X) + P^T P with P = I - X lam^T / lam(X) the projection
    onto ker(lam) along X.  Then g X = lam.
    """
    a = interior_product(X, lam)
    inv = 1.0 / a
    l, x = lam.comps, X.comps
    P = [[(constant(float(i == j)) - x[i] * l[j] * inv) for j in range(3)] for i in range(3)]
    entries = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            acc = l[i] * l[j] * inv
            for k in range(3):
                acc = acc + P[k][i] * P[k][j]
            entries[i][j] = acc
    return MetricField(entries, "g_pair")
