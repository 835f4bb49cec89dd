"""Orbit-reduced Hamiltonian dynamics in one and two stages."""

from .errors import (
    ChartSingularityError,
    DegenerateOrbitError,
    InvalidExtensionError,
    InvalidInputError,
    InvalidTangentError,
    NumericalFailureError,
    OrbitRedError,
)
from .lie import (
    SO3,
    AlgebraElement,
    CoalgebraElement,
    GroupElement,
    LieStructure,
    abelian,
    ad_star,
    Ad_star_inv,
    bracket,
    exp_so3,
    kks_form,
    solve_coadjoint_tangent,
)

__version__ = "0.1.0"
