"""exot: exchangeable optimal transport on sequence space.

Quadratic Monge-Kantorovich problems between exchangeable measures given as
finite de Finetti mixtures, solved by reduction to a nested transport
problem: exact discrete OT over mixing weights with the one-dimensional
squared Wasserstein distance as ground cost. Includes finite-dimensional
approximation experiments and log-concavity audits of projection families.
"""

from .dist1d import (
    CurvatureRange,
    Dist1D,
    Empirical,
    Gaussian,
    GridPotential,
    NoDensityError,
    QuantileGrid,
    Uniform,
    dist_from_dict,
    dist_to_dict,
)
from .definetti import (
    ExchangeableMixture,
    PrefixSample,
    SchemaError,
    SupportError,
    classify_component,
    parse_mixture,
    project,
    sample_prefix,
    serialize_mixture,
)
from .wasserstein1d import (
    AtomicSourceError,
    CurvatureBoundError,
    LipschitzReport,
    Map1D,
    caffarelli_check,
    lipschitz_estimate,
    monotone_map,
    w2_squared,
)
from .outer_ot import (
    DiscreteCoupling,
    ExchangeableMap,
    NotSolvable,
    Solvable,
    apply_exchangeable_map,
    cost_matrix,
    exchangeable_value,
    monge_solvability,
    solve_entropic,
    solve_exact,
)
from .findim_approx import (
    ConvergenceRow,
    ConvergenceTable,
    ExchangeableGaussian,
    MonitorReport,
    assumption_a_monitor,
    cloud_value,
    convergence_experiment,
    empirical_value,
    gaussian_brenier_lipschitz,
)
from .logconcave_audit import (
    GridHessianReport,
    ModulusCurve,
    QuadraticPotential,
    counterexample_projection,
    gaussian_modulus,
    grid_hessian_modulus,
    mixture_projection_density,
    modulus_curve,
    projection_bounds_check,
)

__version__ = "0.1.0"
