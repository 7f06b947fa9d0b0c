"""Exact (non-sampling) margin laws, moments and deficits.

All distributions are computed in log space: log-gamma binomial
coefficients, ``xlogy`` for the Bernoulli factors, and a max shift before
exponentiating. Populations up to ~10**6 are fine.

Mixtures over a bias measure integrate over its half-line representation
(see :mod:`twotier.model`). For :class:`~twotier.model.Uniform` that is a
fixed Gauss-Legendre rule: polynomial integrands of degree < 2*nodes are
exact, so distributions are exact for ``N < 128`` with the default rule.
Beyond that, individual probabilities are a discretised mixture, but the
moments (smooth in zeta) remain accurate to ~1e-11 relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .model import (
    CURIE_WEISS,
    BiasMeasure,
    MeasureSpec,
    ModelError,
    UnionSpec,
    WeightVector,
    bias_moments,
)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
PI_MINUS_2_OVER_PI = (math.pi - 2.0) / math.pi


@dataclass(frozen=True)
class MarginDistribution:
    """Law of a state margin ``S`` (yes minus no votes).

    ``probs[j]`` is the probability of ``j`` yes-votes, i.e. of margin
    ``2j - N``.
    """

    population: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (self.population + 1,):
            raise ValueError(f"expected {self.population + 1} probabilities, got shape {p.shape}")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def support(self) -> np.ndarray:
        return 2 * np.arange(self.population + 1) - self.population

    def prob(self, k: int) -> float:
        """P(S = k); zero off the support."""
        n = self.population
        if (k + n) % 2 or abs(k) > n:
            return 0.0
        return float(self.probs[(k + n) // 2])

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.probs - self.probs[::-1])) <= tol)

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        return c / c[-1]


@dataclass(frozen=True)
class MomentSet:
    """``E|S|``, ``E(S^2)`` and ``Var(|S|)`` of one state margin."""

    abs_mean: float
    second_moment: float

    @property
    def abs_variance(self) -> float:
        return max(self.second_moment - self.abs_mean**2, 0.0)


@dataclass(frozen=True)
class CrossMomentSet:
    """Pairwise moments across states.

    ``chi_chi[v, k] = E(chi_v chi_k)``, ``chi_s[v, k] = E(chi_v S_k)``,
    ``ss[v, k] = E(S_v S_k)``.
    """

    chi_chi: np.ndarray
    chi_s: np.ndarray
    ss: np.ndarray


def _log_binom(n: int) -> np.ndarray:
    j = np.arange(n + 1)
    # a - (b + c) is exactly symmetric under j -> n - j
    return gammaln(n + 1.0) - (gammaln(j + 1.0) + gammaln(n - j + 1.0))


def _check_odd(n: int) -> int:
    if int(n) != n or n < 1 or n % 2 == 0:
        raise ModelError(f"population must be a positive odd integer, got {n!r}")
    return int(n)


def _normalized_exp(logw: np.ndarray) -> np.ndarray:
    w = np.exp(logw - logw.max())
    return w / w.sum()


def _conditional_probs(n: int, zeta: float, log_binom: np.ndarray | None = None) -> np.ndarray:
    if log_binom is None:
        log_binom = _log_binom(n)
    j = np.arange(n + 1)
    logw = log_binom + xlogy(j, (1.0 + zeta) / 2.0) + xlogy(n - j, (1.0 - zeta) / 2.0)
    return _normalized_exp(logw)


def margin_distribution_conditional(n: int, zeta: float) -> MarginDistribution:
    """Margin law when every voter says yes independently with prob. ``(1 + zeta)/2``."""
    n = _check_odd(n)
    if not -1.0 <= zeta <= 1.0:
        raise ModelError(f"zeta must lie in [-1, 1], got {zeta}")
    return MarginDistribution(n, _conditional_probs(n, float(zeta)))


def margin_distribution_cbm(n: int, mu: BiasMeasure) -> MarginDistribution:
    """Margin law under the collective bias model with bias measure ``mu``."""
    n = _check_odd(n)
    lb = _log_binom(n)
    probs = np.zeros(n + 1)
    for z, w in zip(*mu.half_line()):
        if w == 0:
            continue
        c = _conditional_probs(n, float(z), lb)
        # the law at -zeta is the mirror image of the law at +zeta
        probs += w * 0.5 * (c + c[::-1])
    return MarginDistribution(n, probs)


def margin_distribution_cw(n: int, beta: float) -> MarginDistribution:
    """Curie-Weiss margin law: ``P(S = k)`` proportional to ``C(N, (N+k)/2) exp(beta k^2 / 2N)``."""
    n = _check_odd(n)
    if beta < 0 or not np.isfinite(beta):
        raise ModelError(f"beta must be finite and nonnegative, got {beta}")
    k = 2.0 * np.arange(n + 1) - n
    return MarginDistribution(n, _normalized_exp(_log_binom(n) + beta * k * k / (2.0 * n)))


def margin_distribution(n: int, spec: MeasureSpec) -> MarginDistribution:
    """Marginal law of one state's margin under ``spec`` (coupling does not matter here)."""
    if spec.kind == CURIE_WEISS:
        return margin_distribution_cw(n, spec.beta)
    return margin_distribution_cbm(n, spec.bias)


def moments(dist: MarginDistribution) -> MomentSet:
    k = dist.support.astype(float)
    p = dist.probs
    return MomentSet(abs_mean=float(np.dot(np.abs(k), p)), second_moment=float(np.dot(k * k, p)))


def conditional_majority_bias(n: int, zeta: float) -> float:
    """``E_zeta(chi) = P_zeta(S > 0) - P_zeta(S < 0)``."""
    n = _check_odd(n)
    if zeta < 0:
        return -conditional_majority_bias(n, -zeta)
    if zeta > 1:
        raise ModelError(f"zeta must lie in [-1, 1], got {zeta}")
    return float(_conditional_state_terms(n, float(zeta), _log_binom(n))[0])


def _conditional_state_terms(n: int, zeta: float, lb: np.ndarray):
    """``(E chi, E|S|)`` under the conditional product law."""
    p = _conditional_probs(n, zeta, lb)
    h = (n + 1) // 2
    k = 2.0 * np.arange(n + 1) - n
    hi, lo = p[h:].sum(), p[:h].sum()
    # ratio form stays inside [-1, 1] under rounding
    e_chi = 0.0 if zeta == 0 else float((hi - lo) / (hi + lo))
    return e_chi, float(np.dot(np.abs(k), p))


def _signed_nodes(mu: BiasMeasure):
    """Nodes over [-1, 1] with weights, each half-line node split into +-zeta."""
    z, w = mu.half_line()
    keep = w > 0
    z, w = z[keep], w[keep]
    return np.concatenate([z, -z]), np.concatenate([w, w]) / 2.0


def cross_moments_global_cbm(union: UnionSpec, mu: BiasMeasure) -> CrossMomentSet:
    """Exact finite-N cross moments when one bias value is shared by all states.

    Given zeta the states are independent, so off-diagonal terms are
    integrals of products of conditional expectations.
    """
    pops = union.populations
    m = union.m
    zs, ws = _signed_nodes(mu)
    mu1, mu2 = bias_moments(mu)

    # e_chi[j, v] = E_zeta_j(chi_v)
    e_chi = np.empty((len(zs), m))
    diag_abs = np.zeros(m)
    diag_sq = np.zeros(m)
    for v, n in enumerate(pops):
        n = int(n)
        lb = _log_binom(n)
        for i, z in enumerate(zs):
            if i >= len(zs) // 2:
                # mirror node: odd/even symmetry in zeta
                e_chi[i, v] = -e_chi[i - len(zs) // 2, v]
                continue
            e_chi[i, v], e_abs = _conditional_state_terms(n, float(z), lb)
            diag_abs[v] += 2 * ws[i] * e_abs
        diag_sq[v] = n + (n * n - n) * mu2

    chi_chi = np.einsum("j,jv,jk->vk", ws, e_chi, e_chi)
    chi_s = np.einsum("j,jv,j,k->vk", ws, e_chi, zs, pops.astype(float))
    ss = mu2 * np.outer(pops, pops).astype(float)
    np.fill_diagonal(chi_chi, 1.0)
    np.fill_diagonal(chi_s, diag_abs)
    np.fill_diagonal(ss, diag_sq)
    return CrossMomentSet(chi_chi=chi_chi, chi_s=chi_s, ss=ss)


def cross_moments(union: UnionSpec, spec: MeasureSpec) -> CrossMomentSet:
    """Cross moments for any spec; independent states give diagonal matrices."""
    if spec.is_global:
        return cross_moments_global_cbm(union, spec.bias)
    ms = [moments(margin_distribution(int(n), spec)) for n in union.populations]
    m = union.m
    return CrossMomentSet(
        chi_chi=np.eye(m),
        chi_s=np.diag([s.abs_mean for s in ms]),
        ss=np.diag([s.second_moment for s in ms]),
    )


def exact_deficit_global_cbm(union: UnionSpec, mu: BiasMeasure, g) -> float:
    """Exact ``E(Delta^2)`` when every voter follows one shared bias draw.

    Conditionally on zeta, ``Delta = sum_v Y_v`` with independent
    ``Y_v = g_v chi_v - S_v``, so ``E_zeta(Delta^2) = sum Var(Y_v) + (sum E Y_v)^2``.
    """
    g = g.values if isinstance(g, WeightVector) else np.asarray(g, dtype=float)
    pops = union.populations
    if len(g) != union.m:
        raise ModelError(f"expected {union.m} weights, got {len(g)}")
    zs, ws = _signed_nodes(mu)
    lbs = [_log_binom(int(n)) for n in pops]
    total = 0.0
    for z, w in zip(zs, ws):
        var_sum = 0.0
        mean_sum = 0.0
        for gv, n, lb in zip(g, pops, lbs):
            n = int(n)
            e_chi, e_abs = _conditional_state_terms(n, float(z), lb)
            e_s = z * n
            var_chi = 1.0 - e_chi * e_chi
            var_s = n * (1.0 - z * z)
            cov = e_abs - e_chi * e_s  # chi * S = |S|
            var_sum += gv * gv * var_chi + var_s - 2.0 * gv * cov
            mean_sum += gv * e_chi - e_s
        total += w * (var_sum + mean_sum * mean_sum)
    return float(total)


# --------------------------------------------------------------------------
# Asymptotic predictors


def cw_magnetization(beta: float, tol: float = 1e-12, m0: float = 0.9, max_iter: int = 1_000_000) -> float:
    """Largest solution of ``m = tanh(beta m)``; zero for ``beta <= 1``.

    Damped fixed-point iteration. Convergence slows as beta approaches 1
    from above.
    """
    if beta <= 1.0:
        return 0.0
    m = m0
    for _ in range(max_iter):
        nxt = 0.5 * (m + math.tanh(beta * m))
        if abs(nxt - m) < tol:
            return nxt
        m = nxt
    raise RuntimeError(f"fixed-point iteration did not converge for beta={beta}")


@dataclass(frozen=True)
class PredictedValues:
    """Large-population predictions for one state of size ``population``.

    ``abs_mean`` is ``constant * N**exponent``. For Curie-Weiss at ``beta == 1``
    the constant is unknown and reported as NaN; only the exponent is
    meaningful there. ``abs_variance`` and ``per_voter_deficit`` are None
    where no prediction is made.
    """

    population: int
    exponent: float
    constant: float
    abs_mean: float
    abs_variance: float | None
    per_voter_deficit: float | None


def asymptotic_predictions(spec: MeasureSpec, n: int) -> PredictedValues:
    if spec.kind == CURIE_WEISS:
        beta = spec.beta
        if beta < 1.0:
            scale = 1.0 / (1.0 - beta)
            c = SQRT_2_OVER_PI * math.sqrt(scale)
            return PredictedValues(n, 0.5, c, c * math.sqrt(n), PI_MINUS_2_OVER_PI * scale * n, 0.0)
        if beta == 1.0:
            return PredictedValues(n, 0.75, math.nan, math.nan, None, 0.0)
        c = cw_magnetization(beta)
        return PredictedValues(n, 1.0, c, c * n, None, 0.0)

    mu1, mu2 = bias_moments(spec.bias)
    if spec.bias.is_point_mass_at_zero:
        return PredictedValues(
            n, 0.5, SQRT_2_OVER_PI, SQRT_2_OVER_PI * math.sqrt(n), PI_MINUS_2_OVER_PI * n, 0.0
        )
    return PredictedValues(n, 1.0, mu1, mu1 * n, (mu2 - mu1 * mu1) * n * n, mu2 - mu1 * mu1)


__all__ = [
    "MarginDistribution",
    "MomentSet",
    "CrossMomentSet",
    "PredictedValues",
    "margin_distribution_conditional",
    "margin_distribution_cbm",
    "margin_distribution_cw",
    "margin_distribution",
    "moments",
    "conditional_majority_bias",
    "cross_moments_global_cbm",
    "cross_moments",
    "exact_deficit_global_cbm",
    "asymptotic_predictions",
    "cw_magnetization",
]
