"""Shared test oracles.

``enumerate_*`` walk every voter configuration in {-1, 1}^N and assign it a
probability straight from the model definition, with no binomial
coefficients and no quadrature. Uniform bias integrals use the Beta
function, ``int_0^1 p^j (1-p)^(N-j) dp = j! (N-j)! / (N+1)!``.
"""

from __future__ import annotations

import math
import sys

import numpy as np
import pytest

from twotier.model import CURIE_WEISS, PointMass, SymmetricAtoms, Uniform


def all_configs(n: int) -> np.ndarray:
    bits = (np.arange(2**n, dtype=np.int64)[:, None] >> np.arange(n)) & 1
    return (2 * bits - 1).astype(np.int8)


def _signed_atoms(mu):
    if isinstance(mu, PointMass):
        return [(0.0, 1.0)]
    out = []
    for z, w in mu.atoms:
        if z == 0:
            out.append((0.0, w))
        else:
            out += [(z, w / 2), (-z, w / 2)]
    return out


def config_probabilities(configs: np.ndarray, spec) -> np.ndarray:
    """Probability of each row of ``configs`` (all voters of one state or of the union, bias shared)."""
    n = configs.shape[1]
    if spec.kind == CURIE_WEISS:
        s = configs.sum(axis=1).astype(float)
        w = np.exp(spec.beta * s * s / (2.0 * n))
        return w / w.sum()
    mu = spec.bias
    yes = (configs == 1).sum(axis=1)
    if isinstance(mu, Uniform):
        table = np.array([math.factorial(j) * math.factorial(n - j) / math.factorial(n + 1) for j in range(n + 1)])
        return table[yes]
    probs = np.zeros(len(configs))
    for z, w in _signed_atoms(mu):
        p = (1 + z) / 2
        per_voter = np.where(configs == 1, p, 1 - p)
        probs += w * per_voter.prod(axis=1)
    return probs


def enumerate_margin_law(n: int, spec) -> np.ndarray:
    """``out[j]`` = P(j yes-votes) for one state, by brute force."""
    configs = all_configs(n)
    p = config_probabilities(configs, spec)
    j = (configs == 1).sum(axis=1)
    return np.bincount(j, weights=p, minlength=n + 1)


def enumerate_union(pops, spec):
    """Joint enumeration for a union where all voters share one bias draw.

    Returns (probabilities, margins) with margins of shape (2^N, M).
    """
    configs = all_configs(int(sum(pops)))
    p = config_probabilities(configs, spec)
    edges = np.cumsum([0, *pops])
    margins = np.stack([configs[:, a:b].sum(axis=1) for a, b in zip(edges[:-1], edges[1:])], axis=1)
    return p, margins.astype(float)


@pytest.fixture
def two_point():
    return SymmetricAtoms(((0.6, 1.0),))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
