"""Chart-based exterior and Riemannian calculus."""
from .fields import (
    MetricField,
    NotPositiveDefiniteError,
    OneForm,
    ThreeForm,
    TwoForm,
    VectorField,
    basis_one_form,
    basis_vector,
    pullback,
    volume_form,
    zero_vector,
)
from .jets import (
    DegenerateDivisionError,
    Jet,
    JetOrderError,
    ScalarField,
    Univariate,
    as_points,
    compose,
    constant,
    coordinate,
    coords,
    cos,
    exp,
    from_callables,
    lift,
    of_coordinate,
    sin,
    sqrt,
)
from .ops import (
    DegreeError,
    covariant_derivative,
    cross,
    curl,
    divergence,
    exterior_derivative,
    fd_jet,
    gradient,
    interior_product,
    lie_derivative_volume,
    musical_flat,
    musical_sharp,
)
from .profiles import PiecewisePolynomial, bump, smoothstep_poly

__all__ = [name for name in dir() if not name.startswith("_")]
