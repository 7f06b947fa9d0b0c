"""Reproducible sampling of state margins and moment/deficit estimators.

Stream derivation rule (part of the reproducibility contract): samples are
generated in fixed chunks of ``CHUNK_SIZE`` rows. Chunk ``c`` of a batch with
seed ``s`` draws from

    numpy.random.Generator(numpy.random.Philox(numpy.random.SeedSequence(s, spawn_key=(c,))))

which is the same stream as ``SeedSequence(s).spawn(c + 1)[c]``. Chunks are
concatenated in order, so a batch depends only on ``(union, spec, seed, n)``
and never on how many workers produced it.

Margins are drawn directly (exact binomial draws, or inverse-CDF draws from
the exact Curie-Weiss law) rather than voter by voter. ``per_voter=True``
switches to explicit spins for small states, as a cross-check.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import CURIE_WEISS, UNANIMITY, MeasureSpec, ModelError, UnionSpec, WeightVector
from .oracle import MomentSet, margin_distribution_cw

CHUNK_SIZE = 4096
PER_VOTER_MAX = 20


class InsufficientSamples(ValueError):
    pass


@dataclass(frozen=True)
class SampleBatch:
    margins: np.ndarray
    union: UnionSpec
    spec: MeasureSpec
    seed: int
    n_samples: int


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n: int

    def z_score(self, exact: float) -> float:
        diff = self.value - exact
        if self.std_error == 0:
            # a degenerate estimator is either exactly right or infinitely wrong
            return 0.0 if abs(diff) <= 1e-9 * max(1.0, abs(exact)) else float(np.copysign(np.inf, diff))
        return diff / self.std_error


@dataclass(frozen=True)
class MomentEstimate:
    abs_mean: Estimate
    second_moment: Estimate
    abs_variance: Estimate

    def as_dict(self) -> dict[str, Estimate]:
        return {"abs_mean": self.abs_mean, "second_moment": self.second_moment, "abs_variance": self.abs_variance}


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _cw_cdfs(union: UnionSpec, beta: float) -> list[np.ndarray]:
    return [margin_distribution_cw(int(n), beta).cdf() for n in union.populations]


def _sample_chunk(rng, union: UnionSpec, spec: MeasureSpec, size: int, cdfs) -> np.ndarray:
    pops = union.populations
    if spec.kind == CURIE_WEISS:
        out = np.empty((size, union.m), dtype=np.int64)
        for v, (n, cdf) in enumerate(zip(pops, cdfs)):
            j = np.searchsorted(cdf, rng.random(size), side="right")
            out[:, v] = 2 * np.minimum(j, n) - n
        return out
    if spec.kind == UNANIMITY:
        sign = rng.integers(0, 2, size=size) * 2 - 1
        return sign[:, None] * pops[None, :]
    mu = spec.bias
    if mu.is_point_mass_at_zero:
        p = 0.5
    else:
        shape = (size, 1) if spec.is_global else (size, union.m)
        p = (1.0 + mu.sample(rng, shape)) / 2.0
    yes = rng.binomial(pops[None, :], p, size=(size, union.m))
    return 2 * yes - pops[None, :]


def _sample_chunk_per_voter(rng, union: UnionSpec, spec: MeasureSpec, size: int) -> np.ndarray:
    pops = union.populations
    if pops.max() > PER_VOTER_MAX:
        raise ModelError(f"per-voter sampling is limited to states of at most {PER_VOTER_MAX} voters")
    out = np.empty((size, union.m), dtype=np.int64)
    if spec.kind == CURIE_WEISS:
        for v, n in enumerate(pops):
            configs = np.array(list(itertools.product((-1, 1), repeat=int(n))))
            s = configs.sum(axis=1)
            w = np.exp(spec.beta * s * s / (2.0 * n))
            idx = rng.choice(len(configs), size=size, p=w / w.sum())
            out[:, v] = configs[idx].sum(axis=1)
        return out
    if spec.kind == UNANIMITY:
        zeta = np.broadcast_to(rng.integers(0, 2, size=(size, 1)) * 2.0 - 1.0, (size, union.m))
    else:
        shape = (size, 1) if spec.is_global else (size, union.m)
        zeta = np.broadcast_to(spec.bias.sample(rng, shape), (size, union.m))
    for v, n in enumerate(pops):
        p = (1.0 + zeta[:, v : v + 1]) / 2.0
        spins = np.where(rng.random((size, int(n))) < p, 1, -1)
        out[:, v] = spins.sum(axis=1)
    return out


def sample_margins(
    union: UnionSpec,
    spec: MeasureSpec,
    seed: int,
    n: int,
    workers: int = 1,
    per_voter: bool = False,
) -> SampleBatch:
    """Draw ``n`` independent margin vectors ``(S_1, ..., S_M)``.

    Per-state collective bias draws a fresh bias value per state and sample;
    global coupling shares one per sample. Unanimity shares one sign.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    cdfs = _cw_cdfs(union, spec.beta) if spec.kind == CURIE_WEISS and not per_voter else None
    bounds = [(c, min(CHUNK_SIZE, n - c * CHUNK_SIZE)) for c in range((n + CHUNK_SIZE - 1) // CHUNK_SIZE)]

    def work(chunk):
        c, size = chunk
        rng = chunk_rng(seed, c)
        if per_voter:
            return _sample_chunk_per_voter(rng, union, spec, size)
        return _sample_chunk(rng, union, spec, size, cdfs)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    margins = np.concatenate(parts).astype(np.int64)
    margins.flags.writeable = False
    return SampleBatch(margins=margins, union=union, spec=spec, seed=int(seed), n_samples=n)


def _mean_estimate(x: np.ndarray) -> Estimate:
    n = len(x)
    return Estimate(float(x.mean()), float(x.std(ddof=1) / np.sqrt(n)), n)


def estimate_moments(batch: SampleBatch) -> list[MomentEstimate]:
    """Plug-in estimates of ``E|S|``, ``E(S^2)`` and ``Var(|S|)`` per state."""
    if batch.n_samples < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {batch.n_samples}")
    out = []
    for col in batch.margins.T:
        a = np.abs(col).astype(float)
        mean = _mean_estimate(a)
        dev2 = (a - a.mean()) ** 2
        var = Estimate(float(dev2.mean()), float(dev2.std(ddof=1) / np.sqrt(len(a))), len(a))
        out.append(MomentEstimate(mean, _mean_estimate(a * a), var))
    return out


def estimate_deficit(batch: SampleBatch, g) -> Estimate:
    """Mean of ``Delta^2 = (sum g chi - sum S)^2`` over the batch."""
    g = g.values if isinstance(g, WeightVector) else np.asarray(g, dtype=float)
    if len(g) != batch.union.m:
        raise ModelError(f"expected {batch.union.m} weights, got {len(g)}")
    s = batch.margins.astype(float)
    delta = np.sign(s) @ g - s.sum(axis=1)
    return _mean_estimate(delta * delta)


def moment_set(est: MomentEstimate) -> MomentSet:
    return MomentSet(est.abs_mean.value, est.second_moment.value)
