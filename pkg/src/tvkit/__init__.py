"""Total-variation distances between pushforwards of Gaussian-type measures."""

__version__ = "0.1.0"

from .errors import InputError, NumericFailure, SingularPointError
from .funcspace import (
    MonotonePiece,
    MultiPoly,
    Polynomial,
    TrigPolynomial,
    differentiate,
    evaluate,
    local_order,
    monotone_convex_decomposition,
    parse_multipoly,
    parse_polynomial,
    parse_trig,
    real_roots,
)
from .measures import (
    DensityModel,
    PushforwardDensity,
    chi,
    density,
    gaussian,
    lebesgue_on,
    parse_density,
    preimages,
    pushforward_density,
    restricted,
    standard_gaussian,
)
from .tvmetrics import (
    ModulusCurve,
    TVResult,
    l1_distance,
    modulus_curve,
    shift_modulus,
    shift_modulus_argument,
    tv_gaussian_same_variance,
    tv_histogram_mc,
    tv_pushforward,
    tv_quadrature,
)
from .besov import (
    BesovEstimate,
    PartitionCertificate,
    certified_modulus_constant,
    fit_smoothness,
    prop1_constant,
    prop2_bound,
)
from .bounds import (
    BoundReport,
    delta3_exact,
    gaussian_abs_moment,
    grad_star_norm,
    theorem1_bound,
    theorem2_check,
    trig_modulus_experiment,
    vandermonde_system_check,
)
