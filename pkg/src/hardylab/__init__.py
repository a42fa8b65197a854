"""Numerical laboratory for Hardy identities with remainders and spectral bounds."""

from .bessel import (
    BesselPair,
    cp,
    cp_from_difference,
    j0,
    j0_first_zero,
    j0_prime,
    lamb_constant,
    lamb_pair,
    log_pair,
    ode_residual,
    pair_from_dict,
    power_pair,
)
from .errors import *  # noqa: F401,F403
from .geometry import (
    Annulus,
    Ball,
    CutLocusDescriptor,
    ExteriorOfBall,
    Interval,
    Polygon2D,
    PuncturedBall,
    Rectangle,
    Strip,
    cut_locus,
    diameter,
    directional_distance,
    distance,
    domain_from_dict,
    domain_to_dict,
    essential_diameter,
    grad_distance,
    inradius,
    laplacian_distance_good,
    line_distance,
    near_points,
    nu_skeleton,
    segments_along_line,
    weakly_mean_convex,
)
from .hardy_verify import (
    IdentityReport,
    QuadratureScheme,
    avk_wirths_bracket,
    distributional_pairing,
    set_threads,
    verify_1d,
    verify_avk_wirths,
    verify_conformal_bookkeeping,
    verify_domain_directional,
    verify_domain_full,
    verify_mean_identity,
)
from .mean_distance import (
    MeanWeights,
    mean_distance,
    quasi_inradius,
    skeletal_mean,
    spherical_mean_weights,
    xi,
)
from .quadrature import SphereQuadrature, sphere_quadrature
from .spectral import (
    BoundReport,
    EigenResult,
    bound_report,
    davies_bound,
    first_dirichlet_eigenvalue,
    improved_bound,
)
from .testfunctions import TestFunction, radial_bump, shifted_bump, tensor_bump

__version__ = "0.1.0"
