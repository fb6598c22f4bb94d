"""Orbits, return maps, periodic orbits and their combinatorics."""
from .combinatorics import RotationNumber, arc_permutation_covering, rotation_number
from .critical import CriticalSet, critical_points
from .integrate import OrbitLeftDomainError, OrbitSegment, integrate, integrate_fixed
from .sections import (
    NewtonFailure,
    NoReturnError,
    PeriodicOrbit,
    SectionMap,
    TangentialCrossingError,
    classify_orbit,
    covering_number,
    detect_period,
    fd_return_jacobian,
    find_periodic,
    linearized_return,
    poincare_map,
)

__all__ = [name for name in dir() if not name.startswith("_")]
