"""Translation lengths of hyperbolic elements of SL(2, R)."""
from __future__ import annotations

import numpy as np


class NotHyperbolicError(ValueError):
    """Element is elliptic or parabolic."""


def mobius_translation_length(matrix, det_tol: float = 1e-9) -> float:
    """2 arccosh(|tr|/2): the period of the closed geodesic of a hyperbolic element."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if abs(np.linalg.det(m) - 1.0) > det_tol:
        raise ValueError("matrix must have determinant 1")
    tr = abs(np.trace(m))
    if tr <= 2.0:
        raise NotHyperbolicError(f"|trace| = {tr:g} <= 2: not a hyperbolic element")
    return float(2.0 * np.arccosh(tr / 2.0))
