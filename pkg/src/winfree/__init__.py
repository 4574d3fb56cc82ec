"""Simulation and analysis toolkit for pulse-coupled phase oscillators."""

from .errors import (
    ConfigurationError,
    CriterionInapplicableError,
    DegenerateFrequenciesError,
    DomainError,
    InsufficientDataError,
    IntegrationFailure,
    PreconditionError,
    SizeLimitError,
    UnsupportedOperationError,
)
from .model import (
    InteractionSpec,
    PhaseState,
    SystemConfig,
    custom_interaction,
    divergence,
    divergence_lower_bound,
    influence,
    influence_deriv,
    is_gradient_spec,
    jacobian,
    jacobian_for_spec,
    load_custom_table,
    order_parameter,
    potential,
    power_cosine,
    rectified_poisson,
    sensitivity,
    sensitivity_deriv,
    sinusoidal,
    vector_field,
    wrap_to_pi,
)
from .integrate import (
    ConclusionReport,
    RegimeReport,
    SolverOptions,
    Trajectory,
    classify_regime,
    default_regime_tol,
    detect_death,
    dp45_options,
    regime_report,
    rk4_options,
    rotation_numbers,
    simulate,
    verify_theorem_conclusions,
)
from .thresholds import (
    BoundParams,
    CriterionReport,
    appendix_inequality_check,
    appendix_mu,
    check_partial_death_criterion,
    general_threshold,
    kc_coefficient,
    limit_R_lower_bound,
    probability_bound,
    sincos_death_time,
    sinusoidal_threshold,
    toy_thresholds,
    verify_interaction_conditions,
)
from .equilibria import (
    EquilibriumRecord,
    Signature,
    WPolynomial,
    build_W_polynomial,
    classify_stability,
    construct_prescribed_equilibrium,
    critical_coupling,
    enumerate_equilibria,
    equilibria_to_json,
    solve_R_equation,
)
from .montecarlo import (
    EstimateCI,
    McConfig,
    empirical_death_probability,
    empirical_order_param_cdf,
    estimate_escape_measure,
    result_json_dict,
    sample_uniform_initial,
)
from .cli import estimate_pathwise_critical_coupling, main

__version__ = "0.1.0"
