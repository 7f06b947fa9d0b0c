"""
Proportional law under a collective bias
========================================

When all voters of a state share a random bias drawn from the uniform
measure, E|S| grows linearly in N, so optimal weights become proportional
to population. The per-voter deficit does not vanish.
"""

import numpy as np

from twotier import (
    MeasureSpec,
    Uniform,
    UnionSpec,
    exact_deficit,
    margin_distribution,
    moments,
    optimal_weights,
)

spec = MeasureSpec.collective_bias(Uniform())

print(f"{'N':>8} {'E|S|/N':>10}")
for n in (11, 101, 1001, 10001):
    print(f"{n:>8} {moments(margin_distribution(n, spec)).abs_mean / n:>10.6f}")

# one state: the deficit per voter tends to mu2 - mu1^2 = 1/12
for n in (101, 1001, 10001, 100001):
    u = UnionSpec.from_populations([n])
    g, _ = optimal_weights(u, spec)
    print(f"single state N={n:>6}: deficit/N^2 = {exact_deficit(u, spec, g) / n**2:.6f}")

# several independent states: the constant is weighted by sum of squared shares
u = UnionSpec.from_populations([2001] * 5)
g, _ = optimal_weights(u, spec)
per_voter = exact_deficit(u, spec, g) / u.total**2
print(f"\nfive equal states: deficit/N^2 = {per_voter:.6f}, (1/12) sum a^2 = {(u.proportions**2).sum() / 12:.6f}")
