"""Cubic smoothing splines under adversarial label corruption."""

from .adversary import (
    ATTACKS,
    CleanDataset,
    CorruptedDataset,
    MixturePair,
    Normal,
    apply_attack,
    concentrated_attack,
    greedy_attack,
    mixing_weight,
    mixture_attack,
    random_attack,
    residual_densities,
)
from .config import ExperimentConfig, load_config, parse_config
from .errors import (
    BudgetError,
    ConfigError,
    ConstructionError,
    DensityError,
    DesignError,
    InputError,
    LogicError,
    NumericalError,
    RegimeWarning,
    RobustSplineError,
)
from .kernel import (
    EmpiricalCDF,
    TruncatedGaussianDensity,
    UniformDensity,
    cdf_discrepancy,
    equivalent_kernel,
    hat_matrix,
    kernel_approx_error,
    weight_function,
)
from .lecam import BumpPair, build_pair, l2_gap_squared, lecam_lower_bound, linf_gap
from .risk import RiskEstimate, budget_for, estimate_risk, lambda_schedule, l2_distance_squared, linf_distance
from .spline import DesignPoints, NaturalCubicSpline, SmoothingParams, diagnostics, evaluate, fit
from .targets import DesignSpec, MLP3Params, generate_design, make_target, sample_dataset

__version__ = "0.1.0"
