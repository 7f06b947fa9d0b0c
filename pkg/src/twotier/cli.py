"""Command-line front end.

    twotier {weights,deficit,validate,sweep} --config CONFIG.json
            [--out PATH] [--format csv|json] [--seed N] [--workers K]

Exit status: 0 on success, 1 on a configuration error, 2 when ``validate``
finds an estimate more than 4 standard errors from the exact value.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .deficit import exact_deficit, per_voter_report, predicted_per_voter
from .model import MeasureSpec, ModelError, StateSpec, UnionSpec, WeightVector, bias_moments
from .montecarlo import estimate_deficit, estimate_moments, sample_margins
from .oracle import asymptotic_predictions, margin_distribution, moments
from .weights import asymptotic_weights, optimal_weights, weight_scheme

Z_GATE = 4.0

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_GATE = 2


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    status: int = EXIT_OK


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return ""
        return format(float(x), ".17g")
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if math.isnan(x) or math.isinf(x) else x
    if isinstance(x, np.integer):
        return int(x)
    return x


def resolve_weights(cfg: ExperimentConfig, union: UnionSpec, spec: MeasureSpec) -> list[tuple[str, WeightVector, str]]:
    """Turn the configured schemes into ``(label, weights, method)`` triples."""
    out = []
    for s in cfg.schemes:
        if s.explicit is not None:
            g, method = WeightVector(s.explicit), "explicit"
        elif s.name == "optimal":
            g, method = optimal_weights(union, spec)
        elif s.name == "asymptotic":
            g, method = asymptotic_weights(union, spec), "asymptotic"
        else:
            g, method = weight_scheme(union, s.name), "heuristic"
        if cfg.total is not None:
            target = bias_moments(spec.bias)[0] * union.total if cfg.total == "mu1N" else cfg.total
            g = g.rescaled(target)
        out.append((s.label, g, method))
    return out


def run_weights(cfg: ExperimentConfig) -> Table:
    t = Table(["state", "population", "weight_raw", "weight_normalized", "method", "scheme"])
    for label, g, method in resolve_weights(cfg, cfg.union, cfg.measure):
        norm = g.normalized().values if g.total != 0 else np.full(len(g), math.nan)
        for st, raw, nv in zip(cfg.union.states, g.values, norm):
            t.rows.append([st.name, st.population, raw, nv, method, label])
    return t


def run_deficit(cfg: ExperimentConfig) -> Table:
    sampled = cfg.n_samples is not None
    cols = ["scheme", "total_weight", "dd", "per_voter", "predicted_asymptote", "relative_gap"]
    if sampled:
        _need_seed(cfg)
        cols += ["dd_estimate", "std_error"]
        batch = sample_margins(cfg.union, cfg.measure, cfg.seed, cfg.n_samples, workers=cfg.workers)
    t = Table(cols)
    predicted = predicted_per_voter(cfg.union, cfg.measure)
    for label, g, _ in resolve_weights(cfg, cfg.union, cfg.measure):
        dd = exact_deficit(cfg.union, cfg.measure, g)
        rep = per_voter_report(max(dd, 0.0), cfg.union, predicted)
        row = [label, g.total, rep.dd, rep.per_voter, rep.predicted, rep.relative_gap]
        if sampled:
            est = estimate_deficit(batch, g)
            row += [est.value, est.std_error]
        t.rows.append(row)
    return t


def _need_seed(cfg: ExperimentConfig):
    if cfg.seed is None:
        raise ConfigError("experiment.seed", "a seed is required for sampling experiments")
    if cfg.n_samples is None:
        raise ConfigError("experiment.n_samples", "a sample count is required for sampling experiments")


def run_validate(cfg: ExperimentConfig) -> Table:
    """Compare Monte Carlo estimates with exact values; fail on ``|z| > 4``."""
    _need_seed(cfg)
    t = Table(["quantity", "state", "exact", "estimate", "std_error", "z", "pass"])
    batch = sample_margins(cfg.union, cfg.measure, cfg.seed, cfg.n_samples, workers=cfg.workers)
    ests = estimate_moments(batch)
    for st, est in zip(cfg.union.states, ests):
        exact = moments(margin_distribution(st.population, cfg.measure))
        truth = {"abs_mean": exact.abs_mean, "second_moment": exact.second_moment, "abs_variance": exact.abs_variance}
        for q, e in est.as_dict().items():
            z = e.z_score(truth[q])
            t.rows.append([q, st.name, truth[q], e.value, e.std_error, z, abs(z) <= Z_GATE])
    for label, g, _ in resolve_weights(cfg, cfg.union, cfg.measure):
        exact = exact_deficit(cfg.union, cfg.measure, g)
        e = estimate_deficit(batch, g)
        z = e.z_score(exact)
        t.rows.append([f"deficit:{label}", "", exact, e.value, e.std_error, z, abs(z) <= Z_GATE])
    if not all(r[-1] for r in t.rows):
        t.status = EXIT_GATE
    return t


def _nearest_odd(x: float) -> int:
    k = int(round(x))
    if k % 2 == 0:
        k = k + 1 if x >= k else k - 1
    return max(k, 1)


def scaled_union(union: UnionSpec, total: int) -> UnionSpec:
    """Union with the same proportions and total population close to ``total``."""
    props = union.proportions
    return UnionSpec(tuple(StateSpec(s.name, _nearest_odd(a * total)) for s, a in zip(union.states, props)))


def run_sweep(cfg: ExperimentConfig) -> Table:
    if cfg.sweep is None:
        raise ConfigError("experiment.sweep", "a sweep needs an axis and a grid")
    t = Table(["axis_value", "quantity", "exact_or_estimate", "predicted", "relative_gap"])
    axis = cfg.sweep.axis
    series: dict[str, list[tuple[float, float, float]]] = {}
    for x in cfg.sweep.grid:
        union, spec = cfg.union, cfg.measure
        if axis == "N":
            union = scaled_union(cfg.union, int(x))
        else:
            spec = MeasureSpec.curie_weiss(float(x))
        for st in union.states:
            e = moments(margin_distribution(st.population, spec)).abs_mean
            p = asymptotic_predictions(spec, st.population)
            q = f"abs_mean[{st.name}]"
            _add(t, x, q, e, p.abs_mean)
            series.setdefault(q, []).append((st.population, e, p.exponent))
        g, _ = optimal_weights(union, spec)
        rep = per_voter_report(max(exact_deficit(union, spec, g), 0.0), union, predicted_per_voter(union, spec))
        _add(t, x, "per_voter_deficit", rep.per_voter, rep.predicted)
        n = union.total
        _add(t, x, "per_voter_deficit_times_N", rep.per_voter * n, None if rep.predicted is None else rep.predicted * n)
    if axis == "N":
        for q, pts in series.items():
            arr = np.array([(a, b) for a, b, _ in pts], dtype=float)
            slope = float(np.polyfit(np.log(arr[:, 0]), np.log(arr[:, 1]), 1)[0])
            _add(t, "fit", f"loglog_slope:{q}", slope, pts[-1][2])
    return t


def _add(t: Table, x, quantity: str, value: float, predicted: float | None):
    gap = None
    if predicted is not None and not math.isnan(predicted) and predicted != 0:
        gap = abs(value - predicted) / abs(predicted)
    t.rows.append([x, quantity, value, predicted, gap])


COMMANDS = {"weights": run_weights, "deficit": run_deficit, "validate": run_validate, "sweep": run_sweep}


def metadata(cfg: ExperimentConfig, command: str) -> dict[str, Any]:
    return {
        "tool": "twotier",
        "version": __version__,
        "command": command,
        "config_sha256": cfg.digest(),
        "seed": cfg.seed,
    }


def render(table: Table, meta: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        rows = [{c: _json_value(v) for c, v in zip(table.columns, r)} for r in table.rows]
        return json.dumps({"metadata": meta, "rows": rows}, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {'' if v is None else v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twotier", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment configuration (JSON)")
        p.add_argument("--out", default="-", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=None, help="override experiment.seed")
        p.add_argument("--workers", type=int, default=None, help="sampling threads; output does not depend on it")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.kind is not None and cfg.kind != args.command:
            raise ConfigError("experiment.kind", f"config is for {cfg.kind!r}, not {args.command!r}")
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed", "must be a 64-bit unsigned integer")
            cfg = replace(cfg, seed=args.seed)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers", "must be at least 1")
            cfg = replace(cfg, workers=args.workers)
        table = COMMANDS[args.command](cfg)
    except (ConfigError, ModelError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    meta = metadata(cfg, args.command)
    text = render(table, meta, args.format)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return table.status


if __name__ == "__main__":
    sys.exit(main())
