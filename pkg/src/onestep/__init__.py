"""Stationary distributions of density-dependent one-step Markov chains.

The exact stationary law of the master equation, the steady state ``v`` of
the associated Fokker-Planck equation and its Ornstein-Uhlenbeck (Gaussian)
approximation ``w``, plus tools to measure how fast ``|v - w|`` shrinks
with the system size ``N``.
"""

from .analysis import (
    ConvergenceReport,
    check_exp_inequality,
    check_rR_bounds,
    compare_to_master,
    empirical_order,
    k_scaling,
    mean_field_gap,
    sup_error,
)
from .errors import (
    AssumptionViolationError,
    InvalidParameterError,
    ModelViolationError,
    NumericalError,
    OneStepError,
    ReducibleChainError,
    StabilityError,
)
from .estimators import SteadyStateDensity
from .fokkerplanck import (
    DensityProfile,
    compute_B,
    fp_discretization_matrix,
    linear_closed_form_v,
    normalization_K,
    steady_state_v,
)
from .master import (
    Distribution,
    first_moment,
    generator_matrix,
    integrate_master,
    stationary_distribution,
)
from .meanfield import equilibrium, integrate_mf
from .ouapprox import curvature_q, moivre_laplace, steady_state_w, symmetric_linear_U
from .rates import (
    RateModel,
    build_chain,
    make_linear_model,
    make_polynomial_model,
    make_sis_complete_model,
    model_from_dict,
    validate_assumptions,
)

__version__ = "0.1.0"
