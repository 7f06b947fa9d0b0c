"""Domain types: federations, bias measures, voting measures and weights.

Everything here is immutable once constructed. Construction validates, so an
object that exists is a valid one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MAX_POPULATION = 2**31 - 1
DEFAULT_QUADRATURE_NODES = 64

PER_STATE = "per_state"
GLOBAL = "global"


class ModelError(ValueError):
    """Base class for invalid model input."""


class EvenPopulation(ModelError):
    def __init__(self, state: str, population: int):
        super().__init__(f"state {state!r} has even population {population}; populations must be odd")
        self.state = state
        self.population = population


class EmptyUnion(ModelError):
    def __init__(self):
        super().__init__("a union needs at least one state")


class AsymmetricBiasMeasure(ModelError):
    pass


# --------------------------------------------------------------------------
# Federation


@dataclass(frozen=True)
class StateSpec:
    name: str
    population: int

    def __post_init__(self):
        pop = self.population
        if isinstance(pop, bool) or int(pop) != pop:
            raise ModelError(f"population of {self.name!r} must be an integer, got {pop!r}")
        object.__setattr__(self, "population", int(pop))
        if self.population < 1:
            raise ModelError(f"population of {self.name!r} must be positive, got {pop}")
        if self.population > MAX_POPULATION:
            raise ModelError(f"population of {self.name!r} exceeds {MAX_POPULATION}")
        if self.population % 2 == 0:
            raise EvenPopulation(self.name, self.population)


@dataclass(frozen=True)
class UnionSpec:
    """A federation of ``M`` states with odd populations."""

    states: tuple[StateSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise EmptyUnion()
        names = [s.name for s in self.states]
        if len(set(names)) != len(names):
            raise ModelError(f"state names must be unique: {names}")

    @classmethod
    def from_populations(cls, populations: Iterable[int], names: Sequence[str] | None = None) -> "UnionSpec":
        populations = list(populations)
        if names is None:
            names = [f"S{i + 1}" for i in range(len(populations))]
        if len(names) != len(populations):
            raise ModelError("names and populations differ in length")
        return cls(tuple(StateSpec(n, p) for n, p in zip(names, populations)))

    @property
    def m(self) -> int:
        return len(self.states)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.states)

    @cached_property
    def populations(self) -> np.ndarray:
        out = np.array([s.population for s in self.states], dtype=np.int64)
        out.flags.writeable = False
        return out

    @property
    def total(self) -> int:
        return int(self.populations.sum())

    @property
    def proportions(self) -> np.ndarray:
        return self.populations / self.total


def validate_union(spec) -> UnionSpec:
    """Return a validated :class:`UnionSpec`.

    Accepts a ``UnionSpec``, a sequence of populations, or a sequence of
    ``(name, population)`` pairs. Raises :class:`EvenPopulation` or
    :class:`EmptyUnion`.
    """
    if isinstance(spec, UnionSpec):
        return UnionSpec(spec.states)
    items = list(spec)
    if not items:
        raise EmptyUnion()
    if all(isinstance(it, StateSpec) for it in items):
        return UnionSpec(tuple(items))
    if all(isinstance(it, (tuple, list)) and len(it) == 2 for it in items):
        return UnionSpec(tuple(StateSpec(str(n), p) for n, p in items))
    return UnionSpec.from_populations(items)


# --------------------------------------------------------------------------
# Bias measures
#
# Every bias measure exposes a half-line representation: nonnegative nodes
# zeta_j with weights w_j such that mu = sum_j w_j * (delta_{zeta_j} +
# delta_{-zeta_j}) / 2. Symmetry is then true by construction.


class BiasMeasure:
    """Symmetric probability measure on [-1, 1]."""

    def half_line(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def moments(self) -> tuple[float, float]:
        return bias_moments(self)

    @property
    def is_point_mass_at_zero(self) -> bool:
        z, w = self.half_line()
        return bool(np.all(z[w > 0] == 0.0))


@dataclass(frozen=True)
class PointMass(BiasMeasure):
    location: float = 0.0

    def __post_init__(self):
        if self.location != 0.0:
            raise AsymmetricBiasMeasure(
                f"a point mass at {self.location} is not sign-symmetric; only PointMass(0) is allowed"
            )

    def half_line(self):
        return np.zeros(1), np.ones(1)

    def sample(self, rng, size):
        return np.zeros(size)


@dataclass(frozen=True)
class Uniform(BiasMeasure):
    """Uniform measure on [-1, 1] (density 1/2).

    Integrals against it use Gauss-Legendre with ``nodes`` points on [0, 1],
    mirrored to [-1, 0]; splitting at zero keeps ``|zeta|`` integrands smooth.
    """

    nodes: int = DEFAULT_QUADRATURE_NODES

    def __post_init__(self):
        if int(self.nodes) != self.nodes or self.nodes < 1:
            raise ModelError(f"quadrature node count must be a positive integer, got {self.nodes!r}")

    def half_line(self):
        return _half_gauss_legendre(int(self.nodes))

    def sample(self, rng, size):
        return rng.uniform(-1.0, 1.0, size)


@dataclass(frozen=True)
class SymmetricAtoms(BiasMeasure):
    """Atoms at ``+-zeta_j`` with total weight ``w_j`` split evenly between them.

    An atom at ``zeta = 0`` puts its whole weight at the origin.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(z), float(w)) for z, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ModelError("SymmetricAtoms needs at least one atom")
        for z, w in atoms:
            if not 0.0 <= z <= 1.0:
                raise ModelError(f"atom location {z} outside [0, 1]")
            if not (w >= 0.0 and np.isfinite(w)):
                raise ModelError(f"atom weight {w} must be nonnegative")
        total = sum(w for _, w in atoms)
        if abs(total - 1.0) > 1e-12:
            raise ModelError(f"atom weights sum to {total}, expected 1")

    @classmethod
    def from_signed(cls, locations: Sequence[float], weights: Sequence[float], tol: float = 1e-12) -> "SymmetricAtoms":
        """Build from a full signed atom list, rejecting asymmetric input."""
        if len(locations) != len(weights):
            raise ModelError("locations and weights differ in length")
        mass: dict[float, float] = {}
        for z, w in zip(locations, weights):
            z = float(z)
            if not -1.0 <= z <= 1.0:
                raise ModelError(f"atom location {z} outside [-1, 1]")
            mass[z] = mass.get(z, 0.0) + float(w)
        half = []
        for z, w in mass.items():
            if z < 0:
                continue
            if z == 0.0:
                half.append((0.0, w))
                continue
            mirror = mass.get(-z, 0.0)
            if abs(mirror - w) > tol:
                raise AsymmetricBiasMeasure(f"mass {w} at {z} but {mirror} at {-z}")
            half.append((z, 2.0 * w))
        for z in mass:
            if z < 0 and -z not in mass:
                raise AsymmetricBiasMeasure(f"atom at {z} has no mirror image")
        return cls(tuple(sorted(half)))

    def half_line(self):
        z = np.array([a[0] for a in self.atoms])
        w = np.array([a[1] for a in self.atoms])
        return z, w

    def sample(self, rng, size):
        z, w = self.half_line()
        idx = rng.choice(len(z), size=size, p=w / w.sum())
        signs = rng.integers(0, 2, size=size) * 2 - 1
        return z[idx] * signs


def _half_gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def bias_moments(mu: BiasMeasure) -> tuple[float, float]:
    """First absolute moment and second moment of ``mu``.

    Exact for atoms; Gauss-Legendre for :class:`Uniform`, which is exact for
    these polynomial integrands.
    """
    z, w = mu.half_line()
    mu1 = float(np.dot(w, z))
    mu2 = float(np.dot(w, z * z))
    return mu1, mu2


UNANIMITY_BIAS = SymmetricAtoms(((1.0, 1.0),))


# --------------------------------------------------------------------------
# Voting measures

INDEPENDENT = "independent"
COLLECTIVE_BIAS = "collective_bias"
CURIE_WEISS = "curie_weiss"
UNANIMITY = "unanimity"
KINDS = (INDEPENDENT, COLLECTIVE_BIAS, CURIE_WEISS, UNANIMITY)


@dataclass(frozen=True)
class MeasureSpec:
    """Which voting measure governs the voters.

    Independent voters are the collective bias model with ``PointMass(0)``
    and unanimity is the one with atoms at +-1; :attr:`bias` exposes that
    equivalence so downstream code handles three cases, not four.
    """

    kind: str
    bias_measure: BiasMeasure | None = None
    coupling: str = PER_STATE
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown measure kind {self.kind!r}; expected one of {KINDS}")
        if self.coupling not in (PER_STATE, GLOBAL):
            raise ModelError(f"coupling must be {PER_STATE!r} or {GLOBAL!r}, got {self.coupling!r}")
        if self.kind == COLLECTIVE_BIAS:
            if not isinstance(self.bias_measure, BiasMeasure):
                raise ModelError("collective bias model needs a bias measure")
        elif self.bias_measure is not None:
            raise ModelError(f"{self.kind} takes no bias measure")
        if self.kind == CURIE_WEISS:
            if self.beta is None or not np.isfinite(self.beta) or self.beta < 0:
                raise ModelError(f"beta must be a finite nonnegative number, got {self.beta!r}")
            if self.coupling != PER_STATE:
                raise ModelError("the Curie-Weiss model is per-state only")
            object.__setattr__(self, "beta", float(self.beta))
        elif self.beta is not None:
            raise ModelError(f"{self.kind} takes no beta")

    @classmethod
    def independent(cls) -> "MeasureSpec":
        return cls(INDEPENDENT)

    @classmethod
    def collective_bias(cls, mu: BiasMeasure, coupling: str = PER_STATE) -> "MeasureSpec":
        return cls(COLLECTIVE_BIAS, bias_measure=mu, coupling=coupling)

    @classmethod
    def curie_weiss(cls, beta: float) -> "MeasureSpec":
        return cls(CURIE_WEISS, beta=beta)

    @classmethod
    def unanimity(cls) -> "MeasureSpec":
        return cls(UNANIMITY)

    @property
    def bias(self) -> BiasMeasure | None:
        """Equivalent bias measure, or ``None`` for Curie-Weiss."""
        if self.kind == INDEPENDENT:
            return PointMass(0.0)
        if self.kind == UNANIMITY:
            return UNANIMITY_BIAS
        return self.bias_measure

    @property
    def is_global(self) -> bool:
        """True when states are correlated with each other.

        Unanimity shares one sign across the whole union, so it is global.
        """
        return self.kind == UNANIMITY or (self.kind == COLLECTIVE_BIAS and self.coupling == GLOBAL)


# --------------------------------------------------------------------------
# Weights


@dataclass(frozen=True)
class WeightVector:
    """Council weights aligned with the union's state order.

    Entries must be finite. Solver output may carry negative entries, which
    are kept (and visible through :attr:`nonnegative`) rather than clamped;
    user-supplied weights go through :func:`as_weights`, which rejects them.
    """

    values: np.ndarray = field(repr=True)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ModelError(f"weights must be finite, got {v}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, WeightVector) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    @property
    def total(self) -> float:
        return float(self.values.sum())

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    def normalized(self) -> "WeightVector":
        """Rescale to total weight 1."""
        if self.total == 0:
            raise ModelError("cannot normalize weights with zero total")
        return WeightVector(self.values / self.total)

    def rescaled(self, total: float) -> "WeightVector":
        return WeightVector(self.normalized().values * total)


def as_weights(g, m: int | None = None) -> WeightVector:
    """Coerce user input to a nonnegative :class:`WeightVector` of length ``m``."""
    w = g if isinstance(g, WeightVector) else WeightVector(np.asarray(g, dtype=float))
    if m is not None and len(w) != m:
        raise ModelError(f"expected {m} weights, got {len(w)}")
    if not w.nonnegative:
        raise ModelError(f"weights must be nonnegative, got {w.values}")
    return w


def council_decision(g, chi) -> np.ndarray:
    """Sign of the weighted council vote ``sum g_nu chi_nu`` (row-wise for 2-D ``chi``)."""
    g = g.values if isinstance(g, WeightVector) else np.asarray(g, dtype=float)
    return np.sign(np.asarray(chi) @ g)
