"""Good/bad decomposition of centered Gaussian measures relative to a
symmetric closed convex body, plus a numerical certification suite for every
requirement of the decomposition and the inequalities behind it."""

__version__ = "0.1.0"

from .bodies import (
    ConvergenceError,
    Ellipsoid,
    L2Ball,
    LpBall,
    ScaledBody,
    SymmetricConvexBody,
    SymmetricPolytope,
    dykstra_project,
)
from .cutoff import CutoffSigma, HypothesisError, admissibility_slack, build_sigma, delta_star
from .gaussian import (
    DilatedGaussian,
    FactorizationError,
    GaussianMeasure,
    WhiteningTransform,
    dilation_log_ratio,
    sample_dilated,
    sample_std_normal,
    whiten,
)
from .rng import RngStream
from .scenario import ConfigError, Scenario, build_split, load_scenario, reference_scenario
from .split import (
    DeltaPrimeEstimate,
    GoodBadSplit,
    SamplingBudgetError,
    estimate_delta_prime,
    make_split,
    sample_bad,
    sample_good,
)
from .verify import (
    CheckRecord,
    VerificationReport,
    check_delta_condition,
    complement_mass,
    run_checks,
)
