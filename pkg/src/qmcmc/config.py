"""Experiment configuration: JSON schema, validation, and resolved defaults."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .models import DEFAULT_MAX_SPINS

MODEL_KINDS = ("ising_chain", "sk", "pspin")
PROPOSAL_KINDS = ("quench", "uniform", "local", "perturbative", "effective_xy")
T_MODES = ("long", "finite")

DEFAULT_H_GRID = [round(0.1 * i, 10) for i in range(1, 31)]
DEFAULT_TIME_GRID = [round(0.5 * i, 10) for i in range(0, 41)]


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    sizes: tuple[int, ...]
    p: int | None = None
    field_halfwidth: float = 0.25


@dataclass(frozen=True)
class ProposalSpec:
    kind: str = "quench"
    h_values: tuple[float, ...] = tuple(DEFAULT_H_GRID)
    t_mode: str = "long"
    t_values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    proposal: ProposalSpec = ProposalSpec()
    beta: float = 5.0
    instances: int = 100
    base_seed: int = 20260801
    max_spins: int = DEFAULT_MAX_SPINS
    threads: int = 1
    output_dir: str = "out"
    cuts_enabled: bool = True
    ipr_window_fraction: float = 0.1
    ipr_dump_vectors: bool = True
    time_grid: tuple[float, ...] = tuple(DEFAULT_TIME_GRID)
    ising_exact_sizes: tuple[int, ...] = (6, 8, 10, 12)
    ising_bound_sizes: tuple[int, ...] = (6, 8, 10, 12, 14, 16, 18, 20, 22, 24)

    def resolved(self) -> dict:
        """Fully defaulted JSON form, written next to every run's outputs."""
        return {
            "model": {
                "type": self.model.kind,
                "sizes": list(self.model.sizes),
                "p": self.model.p,
                "field_halfwidth": self.model.field_halfwidth,
            },
            "proposal": {
                "kind": self.proposal.kind,
                "h_values": list(self.proposal.h_values),
                "t_mode": self.proposal.t_mode,
                "t_values": None if self.proposal.t_values is None else list(self.proposal.t_values),
            },
            "beta": self.beta,
            "instances": self.instances,
            "base_seed": self.base_seed,
            "max_spins": self.max_spins,
            "threads": self.threads,
            "output_dir": self.output_dir,
            "cuts": {"enabled": self.cuts_enabled},
            "ipr": {
                "window_fraction": self.ipr_window_fraction,
                "dump_vectors": self.ipr_dump_vectors,
            },
            "time_trace": {"t_values": list(self.time_grid)},
            "ising_bound": {
                "exact_sizes": list(self.ising_exact_sizes),
                "bound_sizes": list(self.ising_bound_sizes),
            },
        }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _number(value, name: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"{name} must be a number, got {value!r}")
    value = float(value)
    _require(math.isfinite(value), f"{name} must be finite")
    return value


def _int(value, name: str) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool),
             f"{name} must be an integer, got {value!r}")
    return value


def _number_list(value, name: str) -> tuple[float, ...]:
    _require(isinstance(value, (list, tuple)) and len(value) > 0,
             f"{name} must be a nonempty list of numbers")
    return tuple(_number(v, f"{name}[{i}]") for i, v in enumerate(value))


def _parse_model(data: dict) -> ModelSpec:
    _require(isinstance(data, dict), "model section must be an object")
    kind = data.get("type")
    _require(kind in MODEL_KINDS, f"model.type must be one of {MODEL_KINDS}, got {kind!r}")
    sizes = data.get("sizes")
    _require(isinstance(sizes, list) and sizes, "model.sizes must be a nonempty list")
    sizes = tuple(_int(v, "model.sizes entry") for v in sizes)
    _require(all(s >= 1 for s in sizes), "model sizes must be positive")
    if kind == "ising_chain":
        _require(all(s >= 3 for s in sizes), "ising_chain sizes must be >= 3")
    p = data.get("p")
    if kind == "pspin":
        _require(p is not None, "pspin models need model.p")
        p = _int(p, "model.p")
        _require(all(2 <= p <= s for s in sizes), "need 2 <= p <= N for every size")
    fh = _number(data.get("field_halfwidth", 0.25 if kind == "sk" else 0.0),
                 "model.field_halfwidth")
    _require(fh >= 0, "model.field_halfwidth must be nonnegative")
    return ModelSpec(kind=kind, sizes=sizes, p=p if kind == "pspin" else None,
                     field_halfwidth=fh)


def _parse_proposal(data: dict | None) -> ProposalSpec:
    if data is None:
        return ProposalSpec()
    _require(isinstance(data, dict), "proposal section must be an object")
    kind = data.get("kind", "quench")
    _require(kind in PROPOSAL_KINDS, f"proposal.kind must be one of {PROPOSAL_KINDS}")
    h_values = tuple(DEFAULT_H_GRID)
    if "h_values" in data and data["h_values"] is not None:
        h_values = _number_list(data["h_values"], "proposal.h_values")
    t_mode = data.get("t_mode", "long")
    _require(t_mode in T_MODES, f"proposal.t_mode must be one of {T_MODES}")
    t_values = None
    if data.get("t_values") is not None:
        t_values = _number_list(data["t_values"], "proposal.t_values")
        _require(all(t >= 0 for t in t_values), "proposal.t_values must be nonnegative")
    if t_mode == "finite":
        _require(t_values is not None, "finite t_mode needs proposal.t_values")
    return ProposalSpec(kind=kind, h_values=h_values, t_mode=t_mode, t_values=t_values)


def parse_config(data: dict) -> ExperimentConfig:
    _require(isinstance(data, dict), "configuration root must be a JSON object")
    known = {
        "model", "proposal", "beta", "instances", "base_seed", "max_spins",
        "threads", "output_dir", "cuts", "ipr", "time_trace", "ising_bound",
    }
    unknown = set(data) - known
    _require(not unknown, f"unknown configuration keys: {sorted(unknown)}")
    _require("model" in data, "configuration needs a model section")

    model = _parse_model(data["model"])
    proposal = _parse_proposal(data.get("proposal"))

    beta = _number(data.get("beta", 5.0), "beta")
    _require(beta >= 0, "beta must be nonnegative")
    instances = _int(data.get("instances", 100), "instances")
    _require(instances >= 1, "instances must be >= 1")
    base_seed = _int(data.get("base_seed", 20260801), "base_seed")
    _require(0 <= base_seed < 2**64, "base_seed must fit in 64 bits")
    max_spins = _int(data.get("max_spins", DEFAULT_MAX_SPINS), "max_spins")
    _require(max_spins >= 1, "max_spins must be positive")
    threads = _int(data.get("threads", 1), "threads")
    _require(threads >= 1, "threads must be >= 1")
    output_dir = data.get("output_dir", "out")
    _require(isinstance(output_dir, str) and output_dir, "output_dir must be a nonempty string")

    cuts = data.get("cuts", {})
    _require(isinstance(cuts, dict), "cuts section must be an object")
    cuts_enabled = bool(cuts.get("enabled", True))

    ipr_section = data.get("ipr", {})
    _require(isinstance(ipr_section, dict), "ipr section must be an object")
    window_fraction = _number(ipr_section.get("window_fraction", 0.1), "ipr.window_fraction")
    _require(0 < window_fraction <= 1, "ipr.window_fraction must lie in (0, 1]")
    dump_vectors = bool(ipr_section.get("dump_vectors", True))

    trace = data.get("time_trace", {})
    _require(isinstance(trace, dict), "time_trace section must be an object")
    time_grid = tuple(DEFAULT_TIME_GRID)
    if trace.get("t_values") is not None:
        time_grid = _number_list(trace["t_values"], "time_trace.t_values")

    ising = data.get("ising_bound", {})
    _require(isinstance(ising, dict), "ising_bound section must be an object")
    exact_sizes = tuple(
        _int(v, "ising_bound.exact_sizes entry") for v in ising.get("exact_sizes", [6, 8, 10, 12])
    )
    bound_sizes = tuple(
        _int(v, "ising_bound.bound_sizes entry")
        for v in ising.get("bound_sizes", [6, 8, 10, 12, 14, 16, 18, 20, 22, 24])
    )
    _require(all(s % 2 == 0 and s >= 4 for s in exact_sizes + bound_sizes),
             "ising_bound sizes must be even and >= 4")

    return ExperimentConfig(
        model=model,
        proposal=proposal,
        beta=beta,
        instances=instances,
        base_seed=base_seed,
        max_spins=max_spins,
        threads=threads,
        output_dir=output_dir,
        cuts_enabled=cuts_enabled,
        ipr_window_fraction=window_fraction,
        ipr_dump_vectors=dump_vectors,
        time_grid=time_grid,
        ising_exact_sizes=exact_sizes,
        ising_bound_sizes=bound_sizes,
    )


def load_config(path: str) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigError(f"configuration file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fp:
            data = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(data)
