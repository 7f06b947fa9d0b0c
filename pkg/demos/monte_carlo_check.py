"""
Checking the exact oracles by simulation
========================================

Margins are sampled in fixed chunks, each with its own counter-based stream,
so results depend only on the seed. Every estimate is compared with its
exact value through a z-score.
"""

from twotier import (
    MeasureSpec,
    Uniform,
    UnionSpec,
    estimate_deficit,
    estimate_moments,
    exact_deficit,
    margin_distribution,
    moments,
    optimal_weights,
    sample_margins,
)

union = UnionSpec.from_populations([101, 301])
for spec in (MeasureSpec.independent(), MeasureSpec.collective_bias(Uniform()), MeasureSpec.curie_weiss(2.0)):
    batch = sample_margins(union, spec, seed=2024, n=100_000, workers=4)
    print(spec.kind if spec.beta is None else f"{spec.kind} beta={spec.beta}")
    for name, n, est in zip(union.names, union.populations, estimate_moments(batch)):
        exact = moments(margin_distribution(int(n), spec))
        z = est.abs_mean.z_score(exact.abs_mean)
        print(f"  {name}: E|S| exact {exact.abs_mean:.4f} estimate {est.abs_mean.value:.4f} z={z:+.2f}")
    g, _ = optimal_weights(union, spec)
    d = estimate_deficit(batch, g)
    print(f"  deficit exact {exact_deficit(union, spec, g):.2f} estimate {d.value:.2f} z={d.z_score(exact_deficit(union, spec, g)):+.2f}")
