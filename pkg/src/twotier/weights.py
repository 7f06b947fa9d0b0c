"""Optimal council weights.

The expected squared deficit is a quadratic in the weights,

    D(g) = g^T A g - 2 b^T g + c,

with ``A[v, k] = E(chi_v chi_k)``, ``b[v] = sum_k E(chi_v S_k)`` and
``c = sum_{v,k} E(S_v S_k)``. Its minimisers solve ``A g = b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import COLLECTIVE_BIAS, GLOBAL, UNANIMITY, MeasureSpec, ModelError, UnionSpec, WeightVector
from .oracle import (
    CrossMomentSet,
    MomentSet,
    asymptotic_predictions,
    cross_moments,
    margin_distribution,
    moments,
)

EIGEN_CUTOFF = 1e-10


class NonFiniteInput(ModelError):
    pass


@dataclass(frozen=True)
class QuadraticForm:
    a: np.ndarray
    b: np.ndarray
    c: float

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
            raise ModelError(f"incompatible shapes A{a.shape}, b{b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @classmethod
    def from_cross_moments(cls, cm: CrossMomentSet) -> "QuadraticForm":
        return cls(cm.chi_chi, cm.chi_s.sum(axis=1), float(cm.ss.sum()))

    @classmethod
    def independent_states(cls, moment_sets: Sequence[MomentSet]) -> "QuadraticForm":
        return cls(
            np.eye(len(moment_sets)),
            [s.abs_mean for s in moment_sets],
            sum(s.second_moment for s in moment_sets),
        )

    def value(self, g) -> float:
        g = _values(g)
        return float(g @ self.a @ g - 2.0 * self.b @ g + self.c)

    def scaled(self, s: float) -> "QuadraticForm":
        """Form obtained when every margin is multiplied by ``s``."""
        return QuadraticForm(self.a, s * self.b, s * s * self.c)


@dataclass(frozen=True)
class SolveDiagnostics:
    rank: int
    eigenvalues: np.ndarray
    # columns span the directions along which D is flat
    null_space: np.ndarray = field(repr=False)
    negative_entries: tuple[int, ...] = ()

    @property
    def irrelevant_directions(self) -> int:
        return self.null_space.shape[1]

    @property
    def singular(self) -> bool:
        return self.irrelevant_directions > 0


def _values(g) -> np.ndarray:
    return g.values if isinstance(g, WeightVector) else np.asarray(g, dtype=float)


def optimal_weights_independent_states(moment_sets: Sequence[MomentSet]) -> WeightVector:
    """``g_v = E|S_v|``: the expected winning margin in each state."""
    return WeightVector([s.abs_mean for s in moment_sets])


def optimal_weights_general(q: QuadraticForm) -> tuple[WeightVector, SolveDiagnostics]:
    """Minimum-norm solution of ``A g = b``.

    Eigenvalues below ``1e-10 * max eigenvalue`` are treated as zero; their
    eigenvectors are returned in ``diagnostics.null_space``. Negative entries
    in the solution are reported, not clamped.
    """
    if not (np.all(np.isfinite(q.a)) and np.all(np.isfinite(q.b)) and np.isfinite(q.c)):
        raise NonFiniteInput("quadratic form has non-finite entries")
    a = 0.5 * (q.a + q.a.T)
    lam, vecs = np.linalg.eigh(a)
    lam_max = float(np.max(np.abs(lam))) if len(lam) else 0.0
    keep = lam > EIGEN_CUTOFF * lam_max
    coef = (vecs[:, keep].T @ q.b) / lam[keep]
    g = vecs[:, keep] @ coef
    diag = SolveDiagnostics(
        rank=int(keep.sum()),
        eigenvalues=lam,
        null_space=vecs[:, ~keep],
        negative_entries=tuple(int(i) for i in np.flatnonzero(g < 0)),
    )
    return WeightVector(g), diag


def asymptotic_weights(union: UnionSpec, spec: MeasureSpec) -> WeightVector:
    """Large-population weight law for per-state models.

    Square root of the population for independent voters and subcritical
    Curie-Weiss, proportional to the population for collective bias and
    supercritical Curie-Weiss, ``N**0.75`` at the Curie-Weiss critical
    point (unit constant; only ratios are meaningful there).
    """
    if spec.kind == COLLECTIVE_BIAS and spec.coupling == GLOBAL:
        raise ModelError("asymptotic weight laws assume per-state coupling")
    out = []
    for n in union.populations:
        p = asymptotic_predictions(spec, int(n))
        c = 1.0 if math.isnan(p.constant) else p.constant
        out.append(c * float(n) ** p.exponent)
    return WeightVector(out)


def weight_scheme(union: UnionSpec, scheme: str) -> WeightVector:
    """Named heuristic schemes: ``sqrt``, ``proportional``, ``equal``."""
    pops = union.populations.astype(float)
    if scheme == "sqrt":
        return WeightVector(np.sqrt(pops))
    if scheme == "proportional":
        return WeightVector(pops)
    if scheme == "equal":
        return WeightVector(np.ones(union.m))
    raise ModelError(f"unknown weight scheme {scheme!r}")


def optimal_weights(union: UnionSpec, spec: MeasureSpec) -> tuple[WeightVector, str]:
    """Exact finite-N optimal weights and the method used to get them.

    Per-state models use the closed form; correlated states go through the
    normal equations. Unanimity takes the closed form too: ``g_v = N_v`` makes
    the deficit vanish identically.
    """
    if spec.is_global and spec.kind != UNANIMITY:
        g, _ = optimal_weights_general(QuadraticForm.from_cross_moments(cross_moments(union, spec)))
        return g, "normal-equations"
    ms = [moments(margin_distribution(int(n), spec)) for n in union.populations]
    return optimal_weights_independent_states(ms), "closed-form"
