"""Deterministic low-discrepancy sample sets."""
from __future__ import annotations

import numpy as np
from scipy.stats import qmc


def halton_box(n: int, lo, hi, seed: int = 0) -> np.ndarray:
    """n scrambled-Halton points in the box [lo, hi] (3-dimensional)."""
    if n <= 0:
        raise ValueError("need a positive number of samples")
    u = qmc.Halton(d=3, scramble=True, seed=seed).random(n)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo + (hi - lo) * u


def halton_disk(n: int, radius: float, seed: int = 0, z_range=(0.0, 1.0)) -> np.ndarray:
    """n points in the solid cylinder {r < radius} x z_range, area-uniform in the disk."""
    u = halton_box(n, (0.0, 0.0, z_range[0]), (1.0, 1.0, z_range[1]), seed)
    r = radius * np.sqrt(u[:, 0])
    th = 2 * np.pi * u[:, 1]
    return np.column_stack([r * np.cos(th), r * np.sin(th), u[:, 2]])


def chart_samples(chart, n: int, seed: int = 0) -> np.ndarray:
    if chart.radial is not None:
        return halton_disk(n, chart.radial * (1 - 1e-9), seed, (chart.lo[2], chart.hi[2]))
    return halton_box(n, chart.lo, chart.hi, seed)
