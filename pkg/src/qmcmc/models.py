"""Classical spin Hamiltonians, disorder ensembles, and Boltzmann tables.

Configurations of N ±1 spins are indexed by integers in [0, 2^N). Bit i of
the index encodes spin i, with a cleared bit meaning x_i = +1 and a set bit
meaning x_i = -1. Every matrix-valued object in the package (quench
Hamiltonians, proposals, transition matrices, eigenvector rows) shares this
encoding.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import IO, Union

import numpy as np

from . import _accel
from .errors import DimensionLimitError

DEFAULT_MAX_SPINS = 14


def check_dimension(n_spins: int, max_spins: int = DEFAULT_MAX_SPINS) -> None:
    """Refuse dense 2^N work above the configured spin cap."""
    if n_spins > max_spins:
        raise DimensionLimitError(
            f"n_spins={n_spins} exceeds the dense-storage cap of {max_spins} "
            f"(2^{n_spins} states); raise max_spins explicitly to override"
        )


def spin_basis(n_spins: int) -> np.ndarray:
    """Return the (2^N, N) matrix of spin values; row j holds configuration j."""
    idx = np.arange(1 << n_spins, dtype=np.uint64)
    bits = (idx[:, None] >> np.arange(n_spins, dtype=np.uint64)[None, :]) & np.uint64(1)
    return 1.0 - 2.0 * bits.astype(np.float64)


@dataclass(frozen=True)
class SpinConfiguration:
    """A single classical configuration, addressed by its basis index."""

    index: int
    n_spins: int

    def __post_init__(self):
        if not 0 <= self.index < (1 << self.n_spins):
            raise ValueError(f"index {self.index} out of range for {self.n_spins} spins")

    @property
    def spins(self) -> np.ndarray:
        """Spin values x_i = ±1, least-significant bit first."""
        bits = (self.index >> np.arange(self.n_spins)) & 1
        return 1.0 - 2.0 * bits.astype(np.float64)

    @classmethod
    def from_spins(cls, spins) -> "SpinConfiguration":
        spins = np.asarray(spins)
        if not np.all(np.abs(spins) == 1):
            raise ValueError("spins must be ±1")
        bits = (1 - spins.astype(np.int64)) // 2
        index = int(np.sum(bits << np.arange(len(spins))))
        return cls(index=index, n_spins=len(spins))

    def hamming_distance(self, other: "SpinConfiguration") -> int:
        if self.n_spins != other.n_spins:
            raise ValueError("configurations of different sizes")
        return int(bin(self.index ^ other.index).count("1"))


@dataclass(frozen=True)
class DisorderSeed:
    """Deterministic per-instance random stream key.

    Identical (base_seed, instance_index) pairs reproduce couplings
    bit-for-bit regardless of how instances are scheduled across workers;
    the underlying Philox generator is counter-based.
    """

    base_seed: int
    instance_index: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.base_seed % (1 << 64), self.instance_index % (1 << 64)], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))


def _as_seed(seed) -> DisorderSeed:
    if isinstance(seed, DisorderSeed):
        return seed
    if isinstance(seed, int):
        return DisorderSeed(seed, 0)
    base, index = seed
    return DisorderSeed(int(base), int(index))


@dataclass(frozen=True, eq=False)
class IsingChain:
    """Ferromagnetic ring of N ≥ 3 spins with unit couplings and no fields."""

    n_spins: int

    def __post_init__(self):
        if self.n_spins < 3:
            raise ValueError("the periodic chain needs n_spins >= 3; N=2 double-counts its bond")


@dataclass(frozen=True, eq=False)
class SKModel:
    """Fully connected pairwise glass: couplings J_ij and longitudinal fields h_i."""

    couplings: np.ndarray
    fields: np.ndarray
    seed: DisorderSeed | None = None

    def __post_init__(self):
        J = np.asarray(self.couplings, dtype=np.float64)
        h = np.asarray(self.fields, dtype=np.float64)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("couplings must be a square matrix")
        if h.shape != (J.shape[0],):
            raise ValueError("fields length must match the coupling matrix")
        if not np.array_equal(J, J.T):
            raise ValueError("couplings must be symmetric")
        if np.any(np.diag(J) != 0.0):
            raise ValueError("couplings must have a zero diagonal")
        object.__setattr__(self, "couplings", J)
        object.__setattr__(self, "fields", h)

    @property
    def n_spins(self) -> int:
        return self.couplings.shape[0]


@dataclass(frozen=True, eq=False)
class PSpinModel:
    """p-wise glass: one coupling per strictly increasing index tuple."""

    n_spins: int
    order: int
    tuples: np.ndarray
    couplings: np.ndarray
    fields: np.ndarray | None = None
    seed: DisorderSeed | None = None

    def __post_init__(self):
        tuples = np.asarray(self.tuples, dtype=np.int64).reshape(-1, self.order)
        couplings = np.asarray(self.couplings, dtype=np.float64)
        if couplings.shape != (tuples.shape[0],):
            raise ValueError("one coupling per tuple required")
        if tuples.size and (np.any(np.diff(tuples, axis=1) <= 0) or tuples.min() < 0
                            or tuples.max() >= self.n_spins):
            raise ValueError("tuples must be strictly increasing indices in range")
        fields = self.fields
        if fields is None:
            fields = np.zeros(self.n_spins)
        fields = np.asarray(fields, dtype=np.float64)
        if fields.shape != (self.n_spins,):
            raise ValueError("fields length must match n_spins")
        object.__setattr__(self, "tuples", tuples)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "fields", fields)


ClassicalModel = Union[IsingChain, SKModel, PSpinModel]


# ---------------------------------------------------------------------------
# Energy evaluation
# ---------------------------------------------------------------------------


def energy(model: ClassicalModel, x) -> float:
    """Classical energy of one configuration.

    ``x`` may be a SpinConfiguration or a bare basis index.
    """
    if isinstance(x, SpinConfiguration):
        if x.n_spins != model.n_spins:
            raise ValueError(
                f"configuration has {x.n_spins} spins but the model has {model.n_spins}"
            )
        spins = x.spins
    else:
        spins = SpinConfiguration(int(x), model.n_spins).spins

    if isinstance(model, IsingChain):
        return float(-np.sum(spins * np.roll(spins, -1)))
    if isinstance(model, SKModel):
        quad = -0.5 * spins @ model.couplings @ spins
        return float(quad + model.fields @ spins)
    if isinstance(model, PSpinModel):
        acc = 0.0
        for m in range(model.tuples.shape[0]):
            acc -= model.couplings[m] * np.prod(spins[model.tuples[m]])
        return float(acc + model.fields @ spins)
    raise TypeError(f"unknown model type {type(model)!r}")


def energy_table(model: ClassicalModel, max_spins: int = DEFAULT_MAX_SPINS) -> np.ndarray:
    """Vector of H_c(x) over all 2^N configurations, indexed by basis index."""
    n = model.n_spins
    check_dimension(n, max_spins)
    if isinstance(model, IsingChain):
        return _accel.ising_energy_table(n)
    spins = spin_basis(n)
    if isinstance(model, SKModel):
        return _accel.sk_energy_table(spins, model.couplings, model.fields)
    if isinstance(model, PSpinModel):
        table = _accel.pspin_energy_table(spins, model.tuples, model.couplings)
        if np.any(model.fields):
            table = table + spins @ model.fields
        return table
    raise TypeError(f"unknown model type {type(model)!r}")


# ---------------------------------------------------------------------------
# Boltzmann thermodynamics
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoltzmannTable:
    """Boltzmann weights over the full configuration space at fixed β.

    π is computed through a log-sum-exp shift so that arbitrarily large β
    never overflows; `log_z`, `log_pi` and `log_pi_min` stay finite even when
    the linear-scale `z` / `pi_min` saturate to inf / 0 in double precision.
    """

    beta: float
    energies: np.ndarray
    pi: np.ndarray
    log_pi: np.ndarray
    log_z: float
    f_beta: float

    @property
    def z(self) -> float:
        return float(np.exp(self.log_z))

    @property
    def pi_min(self) -> float:
        return float(np.exp(self.log_pi_min))

    @property
    def log_pi_min(self) -> float:
        return float(np.min(self.log_pi))

    @property
    def n_states(self) -> int:
        return self.energies.shape[0]


def boltzmann(energies: np.ndarray, beta: float) -> BoltzmannTable:
    """Build the Boltzmann distribution π(x) ∝ e^{−βH_c(x)} for β ≥ 0."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    energies = np.asarray(energies, dtype=np.float64)
    logw = -beta * energies
    shift = float(np.max(logw))
    w = np.exp(logw - shift)
    total = float(np.sum(w))
    log_z = shift + math.log(total)
    pi = w / total
    log_pi = (logw - shift) - math.log(total)
    f_beta = -log_z / beta if beta > 0 else float("-inf")
    return BoltzmannTable(
        beta=float(beta), energies=energies, pi=pi, log_pi=log_pi, log_z=log_z, f_beta=f_beta
    )


# ---------------------------------------------------------------------------
# Disorder sampling
# ---------------------------------------------------------------------------


def sample_sk(n_spins: int, seed, field_halfwidth: float = 0.25) -> SKModel:
    """Draw one SK instance: J_ij ~ N(0, 1/N), h_i ~ U(−w, +w).

    The coupling standard deviation is 1/sqrt(N); the default field half-width
    0.25 breaks the global spin-flip symmetry.
    """
    if n_spins < 2:
        raise ValueError("SK needs at least two spins")
    seed = _as_seed(seed)
    rng = seed.generator()
    iu = np.triu_indices(n_spins, k=1)
    values = rng.normal(0.0, 1.0 / math.sqrt(n_spins), size=len(iu[0]))
    J = np.zeros((n_spins, n_spins))
    J[iu] = values
    J = J + J.T
    h = rng.uniform(-field_halfwidth, field_halfwidth, size=n_spins)
    return SKModel(couplings=J, fields=h, seed=seed)


def sample_pspin(n_spins: int, p: int, seed, field_halfwidth: float = 0.0) -> PSpinModel:
    """Draw one p-spin instance: couplings ~ N(0, p!/(2 N^{p−1})) per tuple.

    Longitudinal fields default to zero (couplings only); pass a positive
    ``field_halfwidth`` to add U(−w, +w) symmetry-breaking fields.
    """
    if not 2 <= p <= n_spins:
        raise ValueError(f"order p={p} must satisfy 2 <= p <= n_spins={n_spins}")
    seed = _as_seed(seed)
    rng = seed.generator()
    tuples = np.array(list(itertools.combinations(range(n_spins), p)), dtype=np.int64)
    sd = math.sqrt(math.factorial(p) / (2.0 * n_spins ** (p - 1)))
    couplings = rng.normal(0.0, sd, size=tuples.shape[0])
    fields = None
    if field_halfwidth > 0:
        fields = rng.uniform(-field_halfwidth, field_halfwidth, size=n_spins)
    return PSpinModel(
        n_spins=n_spins, order=p, tuples=tuples, couplings=couplings, fields=fields, seed=seed
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def model_to_json(model: ClassicalModel) -> dict:
    """JSON-serializable description of a model instance."""
    if isinstance(model, IsingChain):
        return {"model": "ising_chain", "N": model.n_spins}
    if isinstance(model, SKModel):
        out = {
            "model": "sk",
            "N": model.n_spins,
            "J": model.couplings.tolist(),
            "h": model.fields.tolist(),
        }
    elif isinstance(model, PSpinModel):
        out = {
            "model": "pspin",
            "N": model.n_spins,
            "p": model.order,
            "tuples": model.tuples.tolist(),
            "J": model.couplings.tolist(),
            "h": model.fields.tolist(),
        }
    else:
        raise TypeError(f"unknown model type {type(model)!r}")
    if model.seed is not None:
        out["seed"] = model.seed.base_seed
        out["index"] = model.seed.instance_index
    return out


def model_from_json(data: dict) -> ClassicalModel:
    kind = data["model"]
    seed = None
    if "seed" in data:
        seed = DisorderSeed(int(data["seed"]), int(data.get("index", 0)))
    if kind == "ising_chain":
        return IsingChain(n_spins=int(data["N"]))
    if kind == "sk":
        return SKModel(
            couplings=np.asarray(data["J"], dtype=np.float64),
            fields=np.asarray(data["h"], dtype=np.float64),
            seed=seed,
        )
    if kind == "pspin":
        return PSpinModel(
            n_spins=int(data["N"]),
            order=int(data["p"]),
            tuples=np.asarray(data["tuples"], dtype=np.int64),
            couplings=np.asarray(data["J"], dtype=np.float64),
            fields=np.asarray(data["h"], dtype=np.float64),
            seed=seed,
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model: ClassicalModel, fp: IO[str]) -> None:
    json.dump(model_to_json(model), fp)


def load_model(fp: IO[str]) -> ClassicalModel:
    return model_from_json(json.load(fp))


def energy_table_to_csv(energies: np.ndarray, fp: IO[str]) -> None:
    """Write an ``index,energy`` table, one row per configuration."""
    fp.write("index,energy\n")
    for i, e in enumerate(energies):
        fp.write(f"{i},{float(e)!r}\n")
