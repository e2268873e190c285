"""Supercritical bond percolation on random recursive trees via Yule processes with rare mutations."""
from .branching import (
    AncestralReaches,
    BranchingOutcome,
    BranchingParams,
    BranchingState,
    Mode,
    StopReason,
    TimeReaches,
    TotalReaches,
    cluster_from_coupling,
    germ_statistics,
    run_until,
    step,
)
from .errors import ConvergenceError, InvariantViolation, ParameterError, SeriesDivergenceError
from .limit_laws import (
    LimitSpec,
    SeriesResult,
    Theorem,
    falling_factorial,
    germ_recenter,
    kappa_alpha_prime,
    kappa_beta,
    ld_cf,
    limit_cdf,
    limit_variable_cf,
    mutant_integral_closed,
    mutant_integral_quadrature,
    recenter,
    yule_cf,
    yule_cf_scalefree,
)
from .models import BAry, ScaleFree, UniformRecursive, p_of
from .stats import KSReport, SampleSet, empirical_cf, ks_one_sample, ks_two_sample, summarize
from .trees import PercolationResult, percolate_bary, percolate_scalefree, percolate_urt

__version__ = "0.1.0"
