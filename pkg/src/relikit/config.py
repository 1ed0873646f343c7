"""Run-configuration parsing and validation.

A run config is a single JSON document. It names either a built-in
benchmark or an external evaluator command with its random-variable list,
plus the engine parameters. Presets bundle the benchmark-specific pool
sizes and thresholds; explicit keys always win over preset values, which
win over per-benchmark defaults.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .benchmarks import BENCHMARKS, get_benchmark
from .distributions import RandomVector
from .engines import METHODS, EngineConfig
from .evaluators import SubprocessEvaluator


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


PRESETS: dict[str, dict] = {
    "table2": {
        "benchmark": "series4",
        "n_pool_initial": 100_000,
        "n_pool_increment": 100_000,
        "cov_thr": 0.015,
        "gamma": 20.0,
    },
    "table3": {
        "benchmark": "series4",
        "n_pool_initial": 10_000,
        "n_pool_increment": 10_000,
        "cov_thr": 0.05,
        "gamma": 5.0,
    },
    "table4": {
        "benchmark": "rastrigin2",
        "n_pool_initial": 10_000,
        "n_pool_increment": 10_000,
        "cov_thr": 0.015,
        "gamma": 5.0,
    },
    "table7": {
        "benchmark": "oscillator6",
        "n_pool_initial": 10_000,
        "n_pool_increment": 10_000,
        "cov_thr": 0.022,
        "gamma": 5.0,
    },
    "table10": {
        "benchmark": "tube9",
        "n_pool_initial": 10_000,
        "n_pool_increment": 10_000,
        "cov_thr": 0.05,
        "gamma": 5.0,
    },
}

_ENGINE_INT_KEYS = {
    "n_pool_initial",
    "n_pool_increment",
    "n_initial_train",
    "max_calls",
    "max_pool_size",
    "fit_starts",
    "fit_budget_per_dim",
    "refit_starts",
    "refit_budget_per_dim",
    "full_refit_every",
    "seed",
}
_ENGINE_REAL_KEYS = {
    "eps_thr",
    "cov_thr",
    "eff_stop",
    "gamma",
    "delta_alpha",
    "confidence_q",
}
_OPEN_UNIT_KEYS = {"eps_thr", "confidence_q"}
_POSITIVE_REAL_KEYS = {"cov_thr", "eff_stop", "gamma", "delta_alpha"}

_TOP_KEYS = (
    {"preset", "benchmark", "evaluator", "variables", "method", "repetitions", "seeds", "output_dir", "label"}
    | _ENGINE_INT_KEYS
    | _ENGINE_REAL_KEYS
)


@dataclass
class RunConfig:
    """Validated configuration for one run, sweep or comparison."""

    method: str
    engine: EngineConfig
    benchmark: str | None = None
    evaluator_command: list[str] | None = None
    variables: list[dict] | None = None
    repetitions: int | None = None
    seeds: list[int] | None = None
    output_dir: str | None = None
    label: str = "run"

    def make_problem(self):
        """Instantiate (g, rv, benchmark-or-None) for this configuration."""
        if self.benchmark is not None:
            b = get_benchmark(self.benchmark)
            return b.g, b.rv, b
        rv = RandomVector.from_specs(self.variables)
        g = SubprocessEvaluator(self.evaluator_command, rv.n_r)
        return g, rv, None

    def effective_dict(self) -> dict:
        """Echo of the fully resolved configuration."""
        out = {
            "method": self.method,
            "benchmark": self.benchmark,
            "evaluator": {"command": self.evaluator_command} if self.evaluator_command else None,
            "variables": self.variables,
            "repetitions": self.repetitions,
            "seeds": self.seeds,
            "output_dir": self.output_dir,
            "label": self.label,
        }
        for key in sorted(_ENGINE_INT_KEYS | _ENGINE_REAL_KEYS):
            out[key] = getattr(self.engine, key)
        return out

    def with_method(self, method: str, seed: int | None = None) -> "RunConfig":
        engine_kwargs = {k: getattr(self.engine, k) for k in _ENGINE_INT_KEYS | _ENGINE_REAL_KEYS}
        engine_kwargs["method"] = method
        if seed is not None:
            engine_kwargs["seed"] = seed
        return RunConfig(
            method=method,
            engine=EngineConfig(**engine_kwargs),
            benchmark=self.benchmark,
            evaluator_command=self.evaluator_command,
            variables=self.variables,
            repetitions=self.repetitions,
            seeds=self.seeds,
            output_dir=self.output_dir,
            label=self.label,
        )


def _require_int(data, key, minimum=None):
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key}: expected an integer >= {minimum}, got {v}")
    return v


def _require_real(data, key):
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a real number, got {v!r}")
    v = float(v)
    if key in _OPEN_UNIT_KEYS and not 0.0 < v < 1.0:
        raise ConfigError(f"{key}: expected a real in the open interval (0, 1), got {v}")
    if key in _POSITIVE_REAL_KEYS and v <= 0.0:
        raise ConfigError(f"{key}: expected a positive real, got {v}")
    return v


def validate_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root: expected a JSON object")
    data = dict(data)

    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")

    preset = data.pop("preset", None)
    merged: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"preset: expected one of {sorted(PRESETS)}, got {preset!r}")
        merged.update(PRESETS[preset])
    merged.update(data)

    if "method" not in merged:
        raise ConfigError("method: required, one of " + "|".join(METHODS))
    method = merged.pop("method")
    if method not in METHODS:
        raise ConfigError(f"method: expected one of {'|'.join(METHODS)}, got {method!r}")

    benchmark = merged.pop("benchmark", None)
    evaluator = merged.pop("evaluator", None)
    variables = merged.pop("variables", None)
    if (benchmark is None) == (evaluator is None):
        raise ConfigError("exactly one of 'benchmark' or 'evaluator' must be given")
    command = None
    if benchmark is not None:
        if benchmark not in BENCHMARKS:
            raise ConfigError(f"benchmark: expected one of {sorted(BENCHMARKS)}, got {benchmark!r}")
        if variables is not None:
            raise ConfigError("variables: only valid together with 'evaluator'")
        bench = get_benchmark(benchmark)
        merged.setdefault("cov_thr", bench.default_cov_thr)
        merged.setdefault("gamma", bench.default_gamma)
        merged.setdefault("max_calls", bench.default_max_calls)
    else:
        if not isinstance(evaluator, dict) or "command" not in evaluator:
            raise ConfigError("evaluator: expected an object with a 'command' list")
        command = evaluator["command"]
        if isinstance(command, str):
            command = command.split()
        if not isinstance(command, list) or not all(isinstance(c, str) for c in command):
            raise ConfigError("evaluator.command: expected a string or list of strings")
        if not isinstance(variables, list) or not variables:
            raise ConfigError("variables: expected a nonempty list of marginal specs")
        try:
            RandomVector.from_specs(variables)
        except ValueError as exc:
            raise ConfigError(f"variables: {exc}") from None

    repetitions = merged.pop("repetitions", None)
    if repetitions is not None:
        repetitions = _require_int({"repetitions": repetitions}, "repetitions", minimum=2)
    seeds = merged.pop("seeds", None)
    if seeds is not None:
        if not isinstance(seeds, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
            raise ConfigError("seeds: expected a list of integers")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("seeds: entries must be distinct")
    output_dir = merged.pop("output_dir", None)
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError(f"output_dir: expected a string, got {output_dir!r}")
    label = merged.pop("label", "run")
    if not isinstance(label, str):
        raise ConfigError(f"label: expected a string, got {label!r}")

    engine_kwargs: dict = {"method": method}
    for key in list(merged):
        if key in _ENGINE_INT_KEYS:
            engine_kwargs[key] = _require_int(merged, key, minimum=0)
        elif key in _ENGINE_REAL_KEYS:
            engine_kwargs[key] = _require_real(merged, key)
        else:  # pragma: no cover - guarded by _TOP_KEYS
            raise ConfigError(f"unknown config key {key!r}")
    try:
        engine = EngineConfig(**engine_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    return RunConfig(
        method=method,
        engine=engine,
        benchmark=benchmark,
        evaluator_command=command,
        variables=variables,
        repetitions=repetitions,
        seeds=seeds,
        output_dir=output_dir,
        label=label,
    )


def parse_config(path) -> RunConfig:
    """Load and validate a JSON run configuration."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return validate_config(data)
