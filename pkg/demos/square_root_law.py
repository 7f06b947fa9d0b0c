"""
Square-root law for independent voters
======================================

With independent fair-coin voters, the optimal council weight of a state
is its expected absolute margin E|S|, which grows like sqrt(2/pi) sqrt(N).
"""

import numpy as np

from twotier import MeasureSpec, UnionSpec, margin_distribution, moments, optimal_weights

spec = MeasureSpec.independent()

# E|S| / sqrt(N) settles on sqrt(2/pi) = 0.79788
print(f"{'N':>8} {'E|S|':>12} {'E|S|/sqrt(N)':>14}")
for n in (11, 101, 1001, 10001, 100001):
    e = moments(margin_distribution(n, spec)).abs_mean
    print(f"{n:>8} {e:>12.4f} {e / np.sqrt(n):>14.6f}")

# weights for an actual union
union = UnionSpec.from_populations([101, 401, 1601], names=["small", "medium", "large"])
g, method = optimal_weights(union, spec)
print(f"\nweights ({method}):", {k: round(float(v), 3) for k, v in zip(union.names, g.values)})
print("ratios to the smallest state:", np.round(g.values / g.values[0], 4))
print("sqrt(N) ratios:             ", np.round(np.sqrt(union.populations / 101), 4))
