"""Optimal council weights and democracy deficit in two-tier voting systems.

Voters in each state cast +-1 votes; each state's delegate votes with the
state majority and carries a council weight. The package computes, exactly
and by Monte Carlo, the weights minimising the expected squared gap between
council vote and popular vote, under independent voters, the collective
bias model (per state or shared across the union) and the Curie-Weiss model.
"""

__version__ = "0.1.0"

from .model import (
    GLOBAL,
    PER_STATE,
    EmptyUnion,
    EvenPopulation,
    MeasureSpec,
    PointMass,
    StateSpec,
    SymmetricAtoms,
    Uniform,
    UnionSpec,
    WeightVector,
    bias_moments,
    validate_union,
)
from .oracle import (
    asymptotic_predictions,
    conditional_majority_bias,
    cross_moments,
    cross_moments_global_cbm,
    cw_magnetization,
    exact_deficit_global_cbm,
    margin_distribution,
    margin_distribution_cbm,
    margin_distribution_conditional,
    margin_distribution_cw,
    moments,
)
from .weights import (
    QuadraticForm,
    asymptotic_weights,
    optimal_weights,
    optimal_weights_general,
    optimal_weights_independent_states,
    weight_scheme,
)
from .deficit import (
    deficit_asymptotic_global_cbm,
    deficit_independent_states,
    deficit_quadratic,
    exact_deficit,
    per_voter_report,
    predicted_per_voter,
)
from .montecarlo import estimate_deficit, estimate_moments, sample_margins
