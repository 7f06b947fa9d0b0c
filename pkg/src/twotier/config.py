"""JSON experiment configuration.

Schema (all keys optional unless noted)::

    {
      "union":   {"states": [{"name": "A", "population": 101}, ...]}   # required
                 # or {"populations": [101, 401]}
      "measure": {"kind": "independent"}                               # required
                 {"kind": "collective_bias", "coupling": "per_state" | "global",
                  "bias": {"kind": "uniform", "nodes": 64}
                        | {"kind": "point_mass", "location": 0}
                        | {"kind": "atoms", "atoms": [[zeta, weight], ...]}
                        | {"kind": "signed_atoms", "locations": [...], "weights": [...]}}
                 {"kind": "curie_weiss", "beta": 0.5}
                 {"kind": "unanimity"}
      "weights": "optimal" | "asymptotic" | "sqrt" | "proportional" | "equal"
                 | [g_1, ..., g_M]
                 | {"schemes": [<scheme or {"explicit": [...]}>, ...],
                    "total": null | <number> | "mu1N"}
      "experiment": {"kind": "weights" | "deficit" | "validate" | "sweep",
                     "n_samples": 100000, "seed": 1, "workers": 1,
                     "sweep": {"axis": "N" | "beta", "grid": [...]}}
    }

Errors are raised as :class:`ConfigError` carrying the offending field path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from .model import (
    COLLECTIVE_BIAS,
    CURIE_WEISS,
    GLOBAL,
    INDEPENDENT,
    PER_STATE,
    UNANIMITY,
    BiasMeasure,
    MeasureSpec,
    ModelError,
    PointMass,
    StateSpec,
    SymmetricAtoms,
    Uniform,
    UnionSpec,
)

NAMED_SCHEMES = ("optimal", "asymptotic", "sqrt", "proportional", "equal")
EXPERIMENT_KINDS = ("weights", "deficit", "validate", "sweep")
SWEEP_AXES = ("N", "beta")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class WeightScheme:
    name: str
    explicit: tuple[float, ...] | None = None

    @property
    def label(self) -> str:
        return "explicit" if self.explicit is not None else self.name


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    union: UnionSpec
    measure: MeasureSpec
    schemes: tuple[WeightScheme, ...] = (WeightScheme("optimal"),)
    total: float | str | None = None
    kind: str | None = None
    n_samples: int | None = None
    seed: int | None = None
    workers: int = 1
    sweep: SweepSpec | None = field(default=None)

    def to_dict(self) -> dict[str, Any]:
        exp: dict[str, Any] = {"workers": self.workers}
        if self.kind is not None:
            exp["kind"] = self.kind
        if self.n_samples is not None:
            exp["n_samples"] = self.n_samples
        if self.seed is not None:
            exp["seed"] = self.seed
        if self.sweep is not None:
            exp["sweep"] = {"axis": self.sweep.axis, "grid": list(self.sweep.grid)}
        return {
            "union": {"states": [{"name": s.name, "population": s.population} for s in self.union.states]},
            "measure": _measure_to_dict(self.measure),
            "weights": {
                "schemes": [
                    {"explicit": list(s.explicit)} if s.explicit is not None else s.name for s in self.schemes
                ],
                "total": self.total,
            },
            "experiment": exp,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        """SHA-256 of the canonical config, ignoring the worker count (which never changes results)."""
        d = self.to_dict()
        del d["experiment"]["workers"]
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _bias_to_dict(mu: BiasMeasure) -> dict[str, Any]:
    if isinstance(mu, PointMass):
        return {"kind": "point_mass", "location": mu.location}
    if isinstance(mu, Uniform):
        return {"kind": "uniform", "nodes": mu.nodes}
    if isinstance(mu, SymmetricAtoms):
        return {"kind": "atoms", "atoms": [list(a) for a in mu.atoms]}
    raise TypeError(f"cannot serialise {mu!r}")


def _measure_to_dict(spec: MeasureSpec) -> dict[str, Any]:
    if spec.kind == COLLECTIVE_BIAS:
        return {"kind": spec.kind, "bias": _bias_to_dict(spec.bias_measure), "coupling": spec.coupling}
    if spec.kind == CURIE_WEISS:
        return {"kind": spec.kind, "beta": spec.beta}
    return {"kind": spec.kind}


# --------------------------------------------------------------------------
# parsing


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "required field missing")
    return obj[key]


def _expect(value, types, path: str, what: str):
    if isinstance(value, bool) or not isinstance(value, types):
        raise ConfigError(path, f"expected {what}, got {value!r}")
    return value


def _parse_union(obj, path="union") -> UnionSpec:
    _expect(obj, dict, path, "an object")
    if "states" in obj:
        states = _expect(obj["states"], list, f"{path}.states", "a list")
        out = []
        for i, s in enumerate(states):
            p = f"{path}.states[{i}]"
            _expect(s, dict, p, "an object")
            name = _expect(s.get("name", f"S{i + 1}"), str, f"{p}.name", "a string")
            pop = _expect(_require(s, "population", p), int, f"{p}.population", "an integer")
            try:
                out.append(StateSpec(name, pop))
            except ModelError as exc:
                raise ConfigError(f"{p}.population", str(exc)) from None
    elif "populations" in obj:
        pops = _expect(obj["populations"], list, f"{path}.populations", "a list")
        out = []
        for i, pop in enumerate(pops):
            _expect(pop, int, f"{path}.populations[{i}]", "an integer")
            try:
                out.append(StateSpec(f"S{i + 1}", pop))
            except ModelError as exc:
                raise ConfigError(f"{path}.populations[{i}]", str(exc)) from None
    else:
        raise ConfigError(path, "needs 'states' or 'populations'")
    try:
        return UnionSpec(tuple(out))
    except ModelError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_bias(obj, path) -> BiasMeasure:
    _expect(obj, dict, path, "an object")
    kind = _require(obj, "kind", path)
    try:
        if kind == "uniform":
            return Uniform(_expect(obj.get("nodes", 64), int, f"{path}.nodes", "an integer"))
        if kind == "point_mass":
            return PointMass(float(_expect(obj.get("location", 0.0), (int, float), f"{path}.location", "a number")))
        if kind == "atoms":
            atoms = _expect(_require(obj, "atoms", path), list, f"{path}.atoms", "a list")
            pairs = []
            for i, a in enumerate(atoms):
                if not (isinstance(a, list) and len(a) == 2):
                    raise ConfigError(f"{path}.atoms[{i}]", "expected [location, weight]")
                pairs.append((float(a[0]), float(a[1])))
            return SymmetricAtoms(tuple(pairs))
        if kind == "signed_atoms":
            locs = _expect(_require(obj, "locations", path), list, f"{path}.locations", "a list")
            ws = _expect(_require(obj, "weights", path), list, f"{path}.weights", "a list")
            return SymmetricAtoms.from_signed(locs, ws)
    except ModelError as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.kind", f"unknown bias kind {kind!r}")


def _parse_measure(obj, path="measure") -> MeasureSpec:
    _expect(obj, dict, path, "an object")
    kind = _require(obj, "kind", path)
    if kind == INDEPENDENT:
        return MeasureSpec.independent()
    if kind == UNANIMITY:
        return MeasureSpec.unanimity()
    if kind == CURIE_WEISS:
        beta = _expect(_require(obj, "beta", path), (int, float), f"{path}.beta", "a number")
        try:
            return MeasureSpec.curie_weiss(float(beta))
        except ModelError as exc:
            raise ConfigError(f"{path}.beta", str(exc)) from None
    if kind == COLLECTIVE_BIAS:
        mu = _parse_bias(_require(obj, "bias", path), f"{path}.bias")
        coupling = obj.get("coupling", PER_STATE)
        if coupling not in (PER_STATE, GLOBAL):
            raise ConfigError(f"{path}.coupling", f"expected {PER_STATE!r} or {GLOBAL!r}, got {coupling!r}")
        return MeasureSpec.collective_bias(mu, coupling)
    raise ConfigError(f"{path}.kind", f"unknown measure kind {kind!r}")


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _parse_scheme(item, m: int, path: str) -> WeightScheme:
    if isinstance(item, str):
        if item not in NAMED_SCHEMES:
            raise ConfigError(path, f"unknown weight scheme {item!r}; expected one of {NAMED_SCHEMES}")
        return WeightScheme(item)
    if isinstance(item, dict) and "explicit" in item:
        item = item["explicit"]
        path = f"{path}.explicit"
    if isinstance(item, list):
        if not all(_is_number(x) for x in item):
            raise ConfigError(path, "explicit weights must be numbers")
        if len(item) != m:
            raise ConfigError(path, f"expected {m} weights, got {len(item)}")
        vals = tuple(float(x) for x in item)
        if any(not (v >= 0 and v < float("inf")) for v in vals):
            raise ConfigError(path, f"weights must be finite and nonnegative, got {list(vals)}")
        return WeightScheme("explicit", vals)
    raise ConfigError(path, f"cannot interpret weight scheme {item!r}")


def _parse_weights(obj, m: int, path="weights"):
    total = None
    if isinstance(obj, str) or (isinstance(obj, list) and obj and all(_is_number(x) for x in obj)):
        return (_parse_scheme(obj, m, path),), total
    if isinstance(obj, list):
        items, ipath = obj, path
    elif isinstance(obj, dict):
        items = _expect(_require(obj, "schemes", path), list, f"{path}.schemes", "a list")
        ipath = f"{path}.schemes"
        total = obj.get("total")
        if total is not None and total != "mu1N" and not (_is_number(total) and total > 0):
            raise ConfigError(f"{path}.total", f"expected a positive number or 'mu1N', got {total!r}")
        if _is_number(total):
            total = float(total)
    else:
        raise ConfigError(path, f"cannot interpret {obj!r}")
    if not items:
        raise ConfigError(ipath, "at least one weight scheme is required")
    return tuple(_parse_scheme(it, m, f"{ipath}[{i}]") for i, it in enumerate(items)), total


def _parse_experiment(obj, path="experiment") -> dict[str, Any]:
    _expect(obj, dict, path, "an object")
    out: dict[str, Any] = {}
    kind = obj.get("kind")
    if kind is not None and kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"{path}.kind", f"expected one of {EXPERIMENT_KINDS}, got {kind!r}")
    out["kind"] = kind
    if "n_samples" in obj:
        n = _expect(obj["n_samples"], int, f"{path}.n_samples", "an integer")
        if n < 2:
            raise ConfigError(f"{path}.n_samples", "need at least 2 samples")
        out["n_samples"] = n
    if "seed" in obj:
        seed = _expect(obj["seed"], int, f"{path}.seed", "an integer")
        if not 0 <= seed < 2**64:
            raise ConfigError(f"{path}.seed", "must be a 64-bit unsigned integer")
        out["seed"] = seed
    workers = _expect(obj.get("workers", 1), int, f"{path}.workers", "an integer")
    if workers < 1:
        raise ConfigError(f"{path}.workers", "must be at least 1")
    out["workers"] = workers
    if "sweep" in obj:
        sp = f"{path}.sweep"
        sw = _expect(obj["sweep"], dict, sp, "an object")
        axis = _require(sw, "axis", sp)
        if axis not in SWEEP_AXES:
            raise ConfigError(f"{sp}.axis", f"expected one of {SWEEP_AXES}, got {axis!r}")
        grid = _expect(_require(sw, "grid", sp), list, f"{sp}.grid", "a list")
        if len(grid) < 3:
            raise ConfigError(f"{sp}.grid", "a sweep needs at least 3 grid points")
        for i, x in enumerate(grid):
            _expect(x, (int, float), f"{sp}.grid[{i}]", "a number")
            if axis == "N" and (not isinstance(x, int) or x < 1):
                raise ConfigError(f"{sp}.grid[{i}]", "population grid values must be positive integers")
            if axis == "beta" and x < 0:
                raise ConfigError(f"{sp}.grid[{i}]", "beta must be nonnegative")
        out["sweep"] = SweepSpec(axis, tuple(grid))
    return out


def parse_config(obj: dict[str, Any]) -> ExperimentConfig:
    _expect(obj, dict, "", "a JSON object at top level")
    union = _parse_union(_require(obj, "union", ""))
    measure = _parse_measure(_require(obj, "measure", ""))
    schemes, total = _parse_weights(obj.get("weights", "optimal"), union.m)
    if total == "mu1N" and measure.kind != COLLECTIVE_BIAS:
        raise ConfigError("weights.total", "'mu1N' needs a collective bias measure")
    exp = _parse_experiment(obj.get("experiment", {}))
    if exp.get("sweep") and exp["sweep"].axis == "beta" and measure.kind != CURIE_WEISS:
        raise ConfigError("experiment.sweep.axis", "a beta sweep needs a Curie-Weiss measure")
    return ExperimentConfig(
        union=union,
        measure=measure,
        schemes=schemes,
        total=total,
        kind=exp["kind"],
        n_samples=exp.get("n_samples"),
        seed=exp.get("seed"),
        workers=exp["workers"],
        sweep=exp.get("sweep"),
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return parse_config(obj)
