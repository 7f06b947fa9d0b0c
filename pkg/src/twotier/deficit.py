"""Expected democracy deficit ``E(Delta^2)`` and its per-voter normalisation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import CURIE_WEISS, MeasureSpec, ModelError, UnionSpec, WeightVector, bias_moments
from .oracle import (
    PI_MINUS_2_OVER_PI,
    MomentSet,
    exact_deficit_global_cbm,
    margin_distribution,
    moments,
)
from .weights import QuadraticForm


def _values(g) -> np.ndarray:
    return g.values if isinstance(g, WeightVector) else np.asarray(g, dtype=float)


def deficit_independent_states(g, moment_sets: Sequence[MomentSet]) -> float:
    """``sum_v (g_v^2 - 2 g_v E|S_v| + E(S_v^2))`` for independent states."""
    g = _values(g)
    if len(g) != len(moment_sets):
        raise ModelError(f"{len(g)} weights for {len(moment_sets)} states")
    abs_mean = np.array([s.abs_mean for s in moment_sets])
    second = np.array([s.second_moment for s in moment_sets])
    return float(np.sum(g * g - 2.0 * g * abs_mean + second))


def deficit_quadratic(g, q: QuadraticForm) -> float:
    return q.value(g)


def deficit_asymptotic_global_cbm(total_weight: float, n: int, mu1: float, mu2: float) -> float:
    """Large-N deficit under global coupling: ``G^2 - 2 mu1 G N + mu2 N^2``.

    Only the total weight ``G`` enters; the minimum ``(mu2 - mu1^2) N^2``
    sits at ``G = mu1 N``.
    """
    if mu2 < mu1 * mu1 - 1e-15:
        raise ModelError(f"mu2={mu2} < mu1^2={mu1 * mu1}")
    return total_weight**2 - 2.0 * mu1 * total_weight * n + mu2 * float(n) ** 2


def exact_deficit(union: UnionSpec, spec: MeasureSpec, g) -> float:
    """Exact ``E(Delta^2)`` for any spec and weights."""
    g = _values(g)
    if spec.is_global:
        return exact_deficit_global_cbm(union, spec.bias, g)
    ms = [moments(margin_distribution(int(n), spec)) for n in union.populations]
    return deficit_independent_states(g, ms)


def predicted_per_voter(union: UnionSpec, spec: MeasureSpec) -> float | None:
    """Leading-order prediction of ``E((Delta/N)^2)`` at optimal weights.

    Independent voters and subcritical Curie-Weiss give a ``1/N`` term;
    collective bias gives a positive constant, which for per-state coupling
    is weighted by ``sum_v alpha_v^2`` with ``alpha_v = N_v / N``. No
    prediction (None) for Curie-Weiss at or above the critical point.
    """
    n = union.total
    if spec.kind == CURIE_WEISS:
        if spec.beta < 1.0:
            return PI_MINUS_2_OVER_PI / (1.0 - spec.beta) / n
        return None
    mu = spec.bias
    if mu.is_point_mass_at_zero:
        return PI_MINUS_2_OVER_PI / n
    mu1, mu2 = bias_moments(mu)
    const = mu2 - mu1 * mu1
    if spec.is_global:
        return const
    return const * float(np.sum(union.proportions**2))


@dataclass(frozen=True)
class DeficitReport:
    dd: float
    per_voter: float
    predicted: float | None = None
    relative_gap: float | None = None


def per_voter_report(dd: float, union: UnionSpec, predicted: float | None = None) -> DeficitReport:
    """Normalise ``dd`` by ``N^2`` and compare with a predicted constant."""
    if dd < 0:
        raise ModelError(f"deficit must be nonnegative, got {dd}")
    per_voter = dd / float(union.total) ** 2
    gap = None
    if predicted is not None and predicted != 0:
        gap = abs(per_voter - predicted) / abs(predicted)
    return DeficitReport(dd=float(dd), per_voter=per_voter, predicted=predicted, relative_gap=gap)
