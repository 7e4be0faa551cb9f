"""Frequency-node estimation for sums of damped complex exponentials.

The estimator approximates the samples by a vector whose Hankel matrix has
a prescribed rank, solving the resulting nonconvex least-squares problem
with ADMM, and then reads the nodes off the shift-invariant column space of
the solution Hankel matrix. Arbitrary nonnegative sample weights are
supported, which covers missing samples.
"""

from .admm import AdmmConfig, AdmmResult, AdmmState, admm_step, missing_weights, solve
from .errors import (
    EstimationError,
    IllConditionedError,
    RankDeficiencyError,
    SingularInformationError,
    UnsupportedInputError,
)
from .evaluation import (
    EstimationReport,
    CramerRaoBound,
    EstimatorSpec,
    MatchResult,
    MissingPattern,
    Scenario,
    crb,
    esprit,
    match_nodes,
    monte_carlo,
)
from .hankel import (
    antidiagonal_counts,
    antidiagonal_sums,
    form_hankel,
    numerical_rank,
    rank_p_truncation,
)
from .nodes import NodeSet, PhysicalNodes, extract_nodes, nodes_to_physical, select_order
from .signal import (
    FOUR_TONE,
    SEVEN_TONE,
    ExponentialModel,
    NoiseSpec,
    PhysicalModel,
    SampledSignal,
    SampleGrid,
    add_noise,
    nls_objective,
    noise_variance,
    solve_amplitudes,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmResult",
    "AdmmState",
    "CramerRaoBound",
    "EstimationError",
    "EstimationReport",
    "EstimatorSpec",
    "ExponentialModel",
    "IllConditionedError",
    "MatchResult",
    "MissingPattern",
    "NodeSet",
    "NoiseSpec",
    "PhysicalModel",
    "PhysicalNodes",
    "RankDeficiencyError",
    "SampleGrid",
    "SampledSignal",
    "Scenario",
    "SingularInformationError",
    "FOUR_TONE",
    "SEVEN_TONE",
    "UnsupportedInputError",
    "add_noise",
    "admm_step",
    "antidiagonal_counts",
    "antidiagonal_sums",
    "crb",
    "esprit",
    "extract_nodes",
    "form_hankel",
    "match_nodes",
    "missing_weights",
    "monte_carlo",
    "nls_objective",
    "noise_variance",
    "nodes_to_physical",
    "numerical_rank",
    "rank_p_truncation",
    "select_order",
    "solve",
    "solve_amplitudes",
    "synthesize",
]
