"""Catalog of explicit model manifolds and solutions."""
from .atlas import AffineMap, Atlas, Chart, OutsideAtlasError, Point, normalize_point
from .contact import (
    ContactConditionError,
    CutoffProfile,
    modified_contact,
    solid_torus_invariant_contact,
    standardized_orbit_neighborhood,
)
from .glued import (
    GluedCounterexample,
    GluingError,
    ProfileError,
    UnbalanceableProfileError,
    default_b,
    extension_profile,
    glued_counterexample,
    make_balanced_gfun,
)
from .hyperbolic import NotHyperbolicError, mobius_translation_length
from .klein import (
    IncompatibleProfileError,
    cosine_profile,
    double_cover_pullback,
    klein_mapping_torus,
    shear_mapping_torus,
)
from .solution import ModelSolution, pairing_metric

__all__ = [name for name in dir() if not name.startswith("_")]
