"""Experiment orchestration: seeded disorder sweeps, fits, and CSV emission.

Sweeps are planned as ordered groups of rows keyed deterministically, so runs
are reproducible byte-for-byte, resumable after interruption, and optionally
parallel over instances (ordered process pool; output independent of worker
count). Per-instance failures are logged, counted, and skipped.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import io
from .bottleneck import bound_ladder, energy_threshold_cuts
from .chain import build_chain, spectral_gap
from .config import ExperimentConfig, ModelSpec
from .fits import fit_scaling
from .ising_analytic import bound_finite_n
from .models import (
    DisorderSeed,
    IsingChain,
    boltzmann,
    energy_table,
    sample_pspin,
    sample_sk,
)
from .quench import (
    build_hamiltonian,
    diagonalize,
    effective_large_h_hamiltonian,
    ipr,
    ipr_window_average,
    local_proposal,
    perturbative_local_proposal,
    proposal_at_time,
    proposal_long_time,
    uniform_proposal,
)

GAP_FITS_FILE = "gap_fits.csv"
GAP_MEANS_FILE = "gap_means.csv"
BASELINE_FITS_FILE = "baseline_fits.csv"
IPR_EXPONENTS_FILE = "ipr_exponents.csv"
IPR_EXPONENT_HEADER = ["model", "h", "k", "prefactor_log2", "residual", "n_points"]
FIT_HEADER = ["model", "t_mode", "h", "t", "k", "prefactor_log2", "residual", "n_points"]
GAP_MEANS_HEADER = ["model", "t_mode", "h", "t", "N", "mean_delta", "stderr_delta", "n_instances"]


@dataclass(frozen=True)
class StreamSpec:
    name: str
    path: str
    header: list[str]
    key_columns: list[str]


@dataclass
class Group:
    payload: tuple
    keys: dict[str, list[tuple]] = field(default_factory=dict)


@dataclass
class SweepResult:
    rows: dict[str, int]
    failures: int
    wall_time_s: float

    @property
    def ok(self) -> bool:
        return self.failures == 0


def make_instance(spec: ModelSpec, n_spins: int, instance: int, base_seed: int):
    """Rebuild a disorder instance from its (base_seed, instance) key."""
    if spec.kind == "ising_chain":
        return IsingChain(n_spins)
    seed = DisorderSeed(base_seed, instance)
    if spec.kind == "sk":
        return sample_sk(n_spins, seed, field_halfwidth=spec.field_halfwidth)
    if spec.kind == "pspin":
        return sample_pspin(n_spins, spec.p, seed, field_halfwidth=spec.field_halfwidth)
    raise ValueError(f"unknown model kind {spec.kind!r}")


def _gap_row_values(table, proposal) -> dict:
    chain = build_chain(table, proposal)
    gap = spectral_gap(chain)
    return {
        "delta": gap.delta,
        "lambda2": gap.lambda2_abs,
        "reducible": gap.reducible,
        "db_residual": chain.db_residual,
    }


def _quench_spectrum(model, h: float, kind: str, max_spins: int):
    if kind == "effective_xy":
        ham = effective_large_h_hamiltonian(model, h, max_spins=max_spins)
    else:
        ham = build_hamiltonian(model, h, max_spins=max_spins)
    return diagonalize(ham)


# ---------------------------------------------------------------------------
# Group workers (top level: picklable for the process pool)
# ---------------------------------------------------------------------------


def _compute_group(args):
    kind = args[0]
    try:
        if kind == "gap":
            return _gap_group(*args[1:])
        if kind == "glass":
            return _glass_group(*args[1:])
        if kind == "baseline":
            return _baseline_group(*args[1:])
        if kind == "trace":
            return _trace_group(*args[1:])
        if kind == "ising_exact":
            return _ising_exact_group(*args[1:])
        if kind == "ising_bound":
            return _ising_bound_group(*args[1:])
        if kind == "cuts":
            return _cuts_group(*args[1:])
        raise ValueError(f"unknown group kind {kind!r}")
    except Exception as exc:  # noqa: BLE001 - logged and counted by the runner
        return {"__error__": f"{type(exc).__name__}: {exc}"}


def _gap_group(cfg: ExperimentConfig, n_spins: int, instance: int, h):
    spec = cfg.proposal
    model = make_instance(cfg.model, n_spins, instance, cfg.base_seed)
    table = boltzmann(energy_table(model, max_spins=cfg.max_spins), cfg.beta)
    base = {"model": cfg.model.kind, "N": n_spins, "instance": instance, "beta": cfg.beta}
    rows = []
    if spec.kind in ("uniform", "local"):
        proposal = uniform_proposal(n_spins) if spec.kind == "uniform" else local_proposal(n_spins)
        rows.append(base | {"h": None, "t_mode": spec.kind, "t": None}
                    | _gap_row_values(table, proposal))
    elif spec.kind == "perturbative":
        proposal = perturbative_local_proposal(model, h, max_spins=cfg.max_spins)
        rows.append(base | {"h": h, "t_mode": spec.kind, "t": None}
                    | _gap_row_values(table, proposal))
    else:
        spectrum = _quench_spectrum(model, h, spec.kind, cfg.max_spins)
        mode = spec.kind if spec.kind == "effective_xy" else spec.t_mode
        if spec.t_mode == "long" or spec.kind == "effective_xy":
            rows.append(base | {"h": h, "t_mode": mode, "t": None}
                        | _gap_row_values(table, proposal_long_time(spectrum)))
        else:
            for t in spec.t_values:
                rows.append(base | {"h": h, "t_mode": "finite", "t": t}
                            | _gap_row_values(table, proposal_at_time(spectrum, t)))
    return {"gaps": rows}


def _glass_group(cfg: ExperimentConfig, n_spins: int, instance: int, h, dump_vectors: bool):
    """One diagonalization feeding both the gap row and the IPR window row."""
    model = make_instance(cfg.model, n_spins, instance, cfg.base_seed)
    energies = energy_table(model, max_spins=cfg.max_spins)
    table = boltzmann(energies, cfg.beta)
    spectrum = _quench_spectrum(model, h, cfg.proposal.kind, cfg.max_spins)
    gap_row = {
        "model": cfg.model.kind, "N": n_spins, "instance": instance, "beta": cfg.beta,
        "h": h, "t_mode": "long", "t": None,
    } | _gap_row_values(table, proposal_long_time(spectrum))

    ipr_values = ipr(spectrum)
    lo = float(energies.min())
    hi = lo + cfg.ipr_window_fraction * float(energies.max() - energies.min())
    window_row = {
        "model": cfg.model.kind, "N": n_spins, "instance": instance, "h": h,
        "window_lo": lo, "window_hi": hi,
        "mean_ipr": ipr_window_average(ipr_values, energies, (lo, hi)),
    }
    out = {"gaps": [gap_row], "ipr_windows": [window_row]}
    if dump_vectors:
        out["ipr_vectors"] = [
            {"model": cfg.model.kind, "N": n_spins, "h": h, "index": i,
             "energy": energies[i], "ipr": ipr_values[i]}
            for i in range(len(energies))
        ]
    return out


def _baseline_group(cfg: ExperimentConfig, n_spins: int, instance: int):
    model = make_instance(cfg.model, n_spins, instance, cfg.base_seed)
    table = boltzmann(energy_table(model, max_spins=cfg.max_spins), cfg.beta)
    base = {"model": cfg.model.kind, "N": n_spins, "instance": instance, "beta": cfg.beta,
            "h": None, "t": None}
    return {"gaps": [
        base | {"t_mode": "uniform"} | _gap_row_values(table, uniform_proposal(n_spins)),
        base | {"t_mode": "local"} | _gap_row_values(table, local_proposal(n_spins)),
    ]}


def _trace_group(cfg: ExperimentConfig, n_spins: int, role: str, h: float, long_time_mean: float):
    """Instance-averaged gap trace over the time grid at one transverse field."""
    deltas = np.zeros((cfg.instances, len(cfg.time_grid)))
    for instance in range(cfg.instances):
        model = make_instance(cfg.model, n_spins, instance, cfg.base_seed)
        table = boltzmann(energy_table(model, max_spins=cfg.max_spins), cfg.beta)
        spectrum = _quench_spectrum(model, h, cfg.proposal.kind, cfg.max_spins)
        for j, t in enumerate(cfg.time_grid):
            proposal = proposal_at_time(spectrum, t)
            deltas[instance, j] = spectral_gap(build_chain(table, proposal)).delta
    rows = []
    for j, t in enumerate(cfg.time_grid):
        column = deltas[:, j]
        stderr = float(column.std(ddof=1) / np.sqrt(len(column))) if len(column) > 1 else 0.0
        rows.append({
            "model": cfg.model.kind, "N": n_spins, "h": h, "h_role": role, "t": t,
            "mean_delta": float(column.mean()), "stderr_delta": stderr,
            "long_time_mean": long_time_mean,
        })
    return {"trace": rows}


def _ising_exact_group(cfg: ExperimentConfig, n_spins: int, h: float):
    model = IsingChain(n_spins)
    table = boltzmann(energy_table(model, max_spins=cfg.max_spins), cfg.beta)
    spectrum = diagonalize(build_hamiltonian(model, h, max_spins=cfg.max_spins))
    row = {"model": "ising_chain", "N": n_spins, "instance": 0, "beta": cfg.beta,
           "h": h, "t_mode": "long", "t": None}
    row |= _gap_row_values(table, proposal_long_time(spectrum))
    return {"exact": [row]}


def _ising_bound_group(cfg: ExperimentConfig, n_spins: int):
    rows = []
    for h in cfg.proposal.h_values:
        result = bound_finite_n(n_spins, h, cfg.beta, t=None)
        rows.append({
            "N": n_spins, "h": h, "t_mode": "long", "t": None, "beta": cfg.beta,
            "first_term_log": result.first_term_log,
            "second_term": result.second_term,
            "total": result.total,
        })
    return {"bound": rows}


def _cut_thresholds(cfg: ExperimentConfig, n_spins: int, instance: int) -> list[float]:
    model = make_instance(cfg.model, n_spins, instance, cfg.base_seed)
    energies = energy_table(model, max_spins=cfg.max_spins)
    table = boltzmann(energies, cfg.beta)
    return [cut.threshold for cut in energy_threshold_cuts(energies, table.pi)]


def _cuts_group(cfg: ExperimentConfig, n_spins: int, instance: int, h):
    model = make_instance(cfg.model, n_spins, instance, cfg.base_seed)
    energies = energy_table(model, max_spins=cfg.max_spins)
    table = boltzmann(energies, cfg.beta)
    spectrum = _quench_spectrum(model, h, cfg.proposal.kind, cfg.max_spins)
    chain = build_chain(table, proposal_long_time(spectrum))
    delta = spectral_gap(chain).delta
    ipr_values = ipr(spectrum)
    rows = []
    for cut in energy_threshold_cuts(energies, table.pi):
        report = bound_ladder(spectrum, table, cut, ipr_values=ipr_values, transition=chain)
        rows.append({
            "N": n_spins, "instance": instance, "h": h, "beta": cfg.beta,
            "cut_threshold": cut.threshold, "delta": delta,
            "lambda_B": report.lambda_B, "fg": report.fg_value, "cs": report.cs_bound,
            "ipr_bound": report.ipr_bound, "fe_bound": report.free_energy_bound,
            "S_f": report.renyi2_f, "S_g": report.renyi2_g,
            "E_c": report.mean_complement_energy,
        })
    return {"cuts": rows}


# ---------------------------------------------------------------------------
# Execution engine
# ---------------------------------------------------------------------------


def _planned_keys(streams: list[StreamSpec], groups: list[Group]) -> dict[str, list[tuple]]:
    return {
        s.name: [key for g in groups for key in g.keys.get(s.name, [])] for s in streams
    }


def _execute(
    out_dir: str,
    streams: list[StreamSpec],
    groups: list[Group],
    threads: int,
) -> SweepResult:
    start = time.perf_counter()
    os.makedirs(out_dir, exist_ok=True)
    writers = {
        s.name: io.ResumableWriter(s.path, s.header, s.key_columns) for s in streams
    }
    planned = _planned_keys(streams, groups)
    done = {name: w.begin(planned[name]) for name, w in writers.items()}

    spans: list[dict[str, tuple[int, int]]] = []
    cursor = {s.name: 0 for s in streams}
    for group in groups:
        span = {}
        for name in cursor:
            n_rows = len(group.keys.get(name, []))
            span[name] = (cursor[name], cursor[name] + n_rows)
            cursor[name] += n_rows
        spans.append(span)

    pending = [
        (group, span)
        for group, span in zip(groups, spans)
        if any(span[name][1] > done[name] for name in done)
    ]

    failures = 0

    def handle(result, group: Group, span: dict) -> None:
        nonlocal failures
        if "__error__" in result:
            failures += 1
            io.log(f"[qmcmc] group {group.payload[:1]}... failed: {result['__error__']}")
            return
        for name, writer in writers.items():
            rows = result.get(name, [])
            start_idx, _ = span[name]
            for offset, row in enumerate(rows):
                if start_idx + offset >= done[name]:
                    writer.write_row(row)
            writer.flush()

    if threads > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for (group, span), result in zip(
                pending, pool.map(_compute_group, [g.payload for g, _ in pending], chunksize=1)
            ):
                handle(result, group, span)
    else:
        for group, span in pending:
            handle(_compute_group(group.payload), group, span)

    rows = {
        os.path.basename(spec.path): writers[spec.name].rows_written for spec in streams
    }
    for writer in writers.values():
        writer.close()
    return SweepResult(rows=rows, failures=failures, wall_time_s=time.perf_counter() - start)


def _key_rows(stream: StreamSpec, rows: list[dict]) -> list[tuple]:
    return [io.key_of(row, stream.key_columns) for row in rows]


def _gap_key_dicts(cfg: ExperimentConfig, n_spins: int, instance: int, h):
    spec = cfg.proposal
    base = {"model": cfg.model.kind, "N": n_spins, "instance": instance}
    if spec.kind in ("uniform", "local"):
        return [base | {"h": None, "t_mode": spec.kind, "t": None}]
    if spec.kind == "perturbative":
        return [base | {"h": h, "t_mode": spec.kind, "t": None}]
    if spec.kind == "effective_xy":
        return [base | {"h": h, "t_mode": "effective_xy", "t": None}]
    if spec.t_mode == "long":
        return [base | {"h": h, "t_mode": "long", "t": None}]
    return [base | {"h": h, "t_mode": "finite", "t": t} for t in spec.t_values]


# ---------------------------------------------------------------------------
# Sweep entry points
# ---------------------------------------------------------------------------


def run_gap_grid(cfg: ExperimentConfig, out_dir: str) -> SweepResult:
    """Spectral-gap rows for every (N, instance, h[, t]) of the configured grid."""
    gaps = StreamSpec("gaps", os.path.join(out_dir, "gaps.csv"), io.GAP_HEADER, io.GAP_KEY)
    h_values = cfg.proposal.h_values if cfg.proposal.kind not in ("uniform", "local") else [None]
    groups = []
    for n_spins in cfg.model.sizes:
        for instance in range(cfg.instances):
            for h in h_values:
                group = Group(payload=("gap", cfg, n_spins, instance, h))
                group.keys["gaps"] = _key_rows(gaps, _gap_key_dicts(cfg, n_spins, instance, h))
                groups.append(group)
    return _execute(out_dir, [gaps], groups, cfg.threads)


def run_glass_sweep(cfg: ExperimentConfig, out_dir: str) -> SweepResult:
    """Long-time gap plus IPR window rows from one diagonalization per key.

    Functionally run_gap_grid + run_ipr_scan restricted to the long-time
    quench, sharing the spectra; IPR vectors are dumped for instance 0 at the
    largest configured size when enabled.
    """
    if cfg.proposal.kind != "quench" or cfg.proposal.t_mode != "long":
        raise ValueError("the combined sweep is defined for the long-time quench proposal")
    gaps = StreamSpec("gaps", os.path.join(out_dir, "gaps.csv"), io.GAP_HEADER, io.GAP_KEY)
    windows = StreamSpec(
        "ipr_windows", os.path.join(out_dir, "ipr_windows.csv"),
        io.IPR_WINDOW_HEADER, io.IPR_WINDOW_KEY,
    )
    vectors = StreamSpec(
        "ipr_vectors", os.path.join(out_dir, "ipr_vectors.csv"),
        io.IPR_VECTOR_HEADER, io.IPR_VECTOR_KEY,
    )
    top_size = max(cfg.model.sizes)
    groups = []
    for n_spins in cfg.model.sizes:
        for instance in range(cfg.instances):
            for h in cfg.proposal.h_values:
                dump = cfg.ipr_dump_vectors and instance == 0 and n_spins == top_size
                group = Group(payload=("glass", cfg, n_spins, instance, h, dump))
                group.keys["gaps"] = _key_rows(gaps, _gap_key_dicts(cfg, n_spins, instance, h))
                group.keys["ipr_windows"] = [
                    io.key_of({"model": cfg.model.kind, "N": n_spins,
                               "instance": instance, "h": h}, windows.key_columns)
                ]
                if dump:
                    group.keys["ipr_vectors"] = [
                        io.key_of({"model": cfg.model.kind, "N": n_spins, "h": h, "index": i},
                                  vectors.key_columns)
                        for i in range(1 << n_spins)
                    ]
                groups.append(group)
    result = _execute(out_dir, [gaps, windows, vectors], groups, cfg.threads)
    fit_rows = fit_gaps_csv(gaps.path, os.path.join(out_dir, GAP_FITS_FILE),
                            means_path=os.path.join(out_dir, GAP_MEANS_FILE))
    ipr_rows = fit_ipr_windows(windows.path, os.path.join(out_dir, IPR_EXPONENTS_FILE))
    result.rows[GAP_FITS_FILE] = fit_rows
    result.rows[IPR_EXPONENTS_FILE] = ipr_rows
    return result


def run_ipr_scan(cfg: ExperimentConfig, out_dir: str) -> SweepResult:
    """IPR window averages (and exponents) per (N, instance, h)."""
    windows = StreamSpec(
        "ipr_windows", os.path.join(out_dir, "ipr_windows.csv"),
        io.IPR_WINDOW_HEADER, io.IPR_WINDOW_KEY,
    )
    vectors = StreamSpec(
        "ipr_vectors", os.path.join(out_dir, "ipr_vectors.csv"),
        io.IPR_VECTOR_HEADER, io.IPR_VECTOR_KEY,
    )
    top_size = max(cfg.model.sizes)
    groups = []
    for n_spins in cfg.model.sizes:
        for instance in range(cfg.instances):
            for h in cfg.proposal.h_values:
                dump = cfg.ipr_dump_vectors and instance == 0 and n_spins == top_size
                group = Group(payload=("glass", cfg, n_spins, instance, h, dump))
                group.keys["ipr_windows"] = [
                    io.key_of({"model": cfg.model.kind, "N": n_spins,
                               "instance": instance, "h": h}, windows.key_columns)
                ]
                if dump:
                    group.keys["ipr_vectors"] = [
                        io.key_of({"model": cfg.model.kind, "N": n_spins, "h": h, "index": i},
                                  vectors.key_columns)
                        for i in range(1 << n_spins)
                    ]
                groups.append(group)
    result = _execute(out_dir, [windows, vectors], groups, cfg.threads)
    ipr_rows = fit_ipr_windows(windows.path, os.path.join(out_dir, IPR_EXPONENTS_FILE))
    result.rows[IPR_EXPONENTS_FILE] = ipr_rows
    return result


def classical_baselines(cfg: ExperimentConfig, out_dir: str) -> SweepResult:
    """Uniform and single-flip chains on the same disorder instances, with fits."""
    gaps = StreamSpec("gaps", os.path.join(out_dir, "baseline_gaps.csv"),
                      io.GAP_HEADER, io.GAP_KEY)
    groups = []
    for n_spins in cfg.model.sizes:
        for instance in range(cfg.instances):
            group = Group(payload=("baseline", cfg, n_spins, instance))
            base = {"model": cfg.model.kind, "N": n_spins, "instance": instance,
                    "h": None, "t": None}
            group.keys["gaps"] = [
                io.key_of(base | {"t_mode": "uniform"}, gaps.key_columns),
                io.key_of(base | {"t_mode": "local"}, gaps.key_columns),
            ]
            groups.append(group)
    result = _execute(out_dir, [gaps], groups, cfg.threads)
    rows = baseline_fits(gaps.path, os.path.join(out_dir, BASELINE_FITS_FILE), cfg.beta)
    result.rows[BASELINE_FITS_FILE] = rows
    return result


def run_time_trace(cfg: ExperimentConfig, out_dir: str, gaps_csv: str | None = None) -> SweepResult:
    """Instance-averaged gap vs quench time at the best and worst long-time field."""
    trace = StreamSpec("trace", os.path.join(out_dir, "time_trace.csv"),
                       io.TIME_TRACE_HEADER, io.TIME_TRACE_KEY)
    roles = {}
    if gaps_csv is not None:
        mean_by_nh = _mean_gaps_by_nh(gaps_csv, cfg.model.kind)
    else:
        mean_by_nh = None
    groups = []
    for n_spins in cfg.model.sizes:
        if mean_by_nh is not None and n_spins in mean_by_nh:
            curve = mean_by_nh[n_spins]
            # a reused sweep may cover extra fields (spot checks); the trace
            # roles come from the configured grid only
            curve = {h: curve[h] for h in cfg.proposal.h_values if h in curve}
        else:
            curve = _long_time_curve(cfg, n_spins)
        h_values = sorted(curve)
        means = [curve[h] for h in h_values]
        h_max = h_values[int(np.argmax(means))]
        h_min = h_values[int(np.argmin(means))]
        roles[n_spins] = {"max": (h_max, curve[h_max]), "min": (h_min, curve[h_min])}
        for role in ("max", "min"):
            h, long_mean = roles[n_spins][role]
            group = Group(payload=("trace", cfg, n_spins, role, h, long_mean))
            group.keys["trace"] = [
                io.key_of({"model": cfg.model.kind, "N": n_spins, "h_role": role, "t": t},
                          trace.key_columns)
                for t in cfg.time_grid
            ]
            groups.append(group)
    return _execute(out_dir, [trace], groups, cfg.threads)


def _long_time_curve(cfg: ExperimentConfig, n_spins: int) -> dict[float, float]:
    """Mean long-time gap per h (computed when no sweep CSV is supplied)."""
    curve = {}
    for h in cfg.proposal.h_values:
        values = []
        for instance in range(cfg.instances):
            model = make_instance(cfg.model, n_spins, instance, cfg.base_seed)
            table = boltzmann(energy_table(model, max_spins=cfg.max_spins), cfg.beta)
            spectrum = _quench_spectrum(model, h, cfg.proposal.kind, cfg.max_spins)
            values.append(spectral_gap(build_chain(table, proposal_long_time(spectrum))).delta)
        curve[h] = float(np.mean(values))
    return curve


def run_ising_bound(cfg: ExperimentConfig, out_dir: str) -> SweepResult:
    """Exact gaps at dense-diagonalizable sizes plus the closed-form bound."""
    exact = StreamSpec("exact", os.path.join(out_dir, "ising_exact.csv"),
                       io.GAP_HEADER, io.GAP_KEY)
    bound = StreamSpec("bound", os.path.join(out_dir, "ising_bound.csv"),
                       io.ISING_BOUND_HEADER, io.ISING_BOUND_KEY)
    groups = []
    for n_spins in cfg.ising_exact_sizes:
        for h in cfg.proposal.h_values:
            group = Group(payload=("ising_exact", cfg, n_spins, h))
            group.keys["exact"] = [
                io.key_of({"model": "ising_chain", "N": n_spins, "instance": 0,
                           "h": h, "t_mode": "long", "t": None}, exact.key_columns)
            ]
            groups.append(group)
    for n_spins in cfg.ising_bound_sizes:
        group = Group(payload=("ising_bound", cfg, n_spins))
        group.keys["bound"] = [
            io.key_of({"N": n_spins, "h": h, "t_mode": "long", "t": None}, bound.key_columns)
            for h in cfg.proposal.h_values
        ]
        groups.append(group)
    return _execute(out_dir, [exact, bound], groups, cfg.threads)


def run_cut_reports(cfg: ExperimentConfig, out_dir: str) -> SweepResult:
    """Bound-ladder rows over every energy-superlevel cut of each instance."""
    if not cfg.cuts_enabled:
        raise ValueError("cut sweep requested but cuts.enabled is false")
    cuts = StreamSpec("cuts", os.path.join(out_dir, "cuts.csv"), io.CUT_HEADER, io.CUT_KEY)
    groups = []
    for n_spins in cfg.model.sizes:
        for instance in range(cfg.instances):
            thresholds = _cut_thresholds(cfg, n_spins, instance)
            for h in cfg.proposal.h_values:
                group = Group(payload=("cuts", cfg, n_spins, instance, h))
                group.keys["cuts"] = [
                    io.key_of({"N": n_spins, "instance": instance, "h": h,
                               "cut_threshold": theta}, cuts.key_columns)
                    for theta in thresholds
                ]
                groups.append(group)
    return _execute(out_dir, [cuts], groups, cfg.threads)


# ---------------------------------------------------------------------------
# Fits over emitted CSVs
# ---------------------------------------------------------------------------


def _read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8") as fp:
        lines = [line for line in fp.read().split("\n") if line]
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def _mean_gaps_by_nh(path: str, model_kind: str) -> dict[int, dict[float, float]]:
    header, rows = _read_csv(path)
    col = {name: i for i, name in enumerate(header)}
    acc: dict[int, dict[float, list[float]]] = {}
    for row in rows:
        if row[col["model"]] != model_kind or row[col["t_mode"]] != "long":
            continue
        n_spins = int(row[col["N"]])
        h = float(row[col["h"]])
        acc.setdefault(n_spins, {}).setdefault(h, []).append(float(row[col["delta"]]))
    return {
        n: {h: float(np.mean(vals)) for h, vals in curve.items()} for n, curve in acc.items()
    }


def _grouped_stats(path: str, key_cols: list[str], value_col: str):
    """Per-key per-N mean, standard error, and count of a CSV value column."""
    header, rows = _read_csv(path)
    col = {name: i for i, name in enumerate(header)}
    acc: dict[tuple, dict[int, list[float]]] = {}
    for row in rows:
        key = tuple(row[col[c]] for c in key_cols)
        n_spins = int(row[col["N"]])
        acc.setdefault(key, {}).setdefault(n_spins, []).append(float(row[col[value_col]]))
    out = {}
    for key, per_n in acc.items():
        sizes = sorted(per_n)
        means = np.array([np.mean(per_n[n]) for n in sizes])
        stderr = np.array([
            np.std(per_n[n], ddof=1) / np.sqrt(len(per_n[n])) if len(per_n[n]) > 1 else 0.0
            for n in sizes
        ])
        counts = [len(per_n[n]) for n in sizes]
        out[key] = (np.array(sizes, dtype=float), means, stderr, counts)
    return out


def fit_gaps_csv(gaps_path: str, out_path: str, means_path: str | None = None) -> int:
    """Fit 2^{−kN} to per-(model, t_mode, h, t) mean gaps; returns fit row count.

    When ``means_path`` is given, the per-size means/standard errors behind the
    fits are emitted too (the figures layer displays, never recomputes).
    """
    stats = _grouped_stats(gaps_path, ["model", "t_mode", "h", "t"], "delta")
    rows = []
    mean_rows = []
    for key in sorted(stats):
        model, t_mode, h, t = key
        sizes, means, stderr, counts = stats[key]
        for n, m, se, c in zip(sizes, means, stderr, counts):
            mean_rows.append({
                "model": model, "t_mode": t_mode, "h": h, "t": t, "N": int(n),
                "mean_delta": float(m), "stderr_delta": float(se), "n_instances": c,
            })
        if len(sizes) < 3 or np.any(means <= 0):
            continue
        fit = fit_scaling(sizes, means, stderr if np.all(stderr > 0) else None)
        rows.append({
            "model": model, "t_mode": t_mode, "h": h, "t": t,
            "k": fit.k, "prefactor_log2": fit.prefactor_log2,
            "residual": fit.residual, "n_points": len(sizes),
        })
    rows.sort(key=lambda r: (r["model"], r["t_mode"], float(r["h"] or 0), float(r["t"] or 0)))
    if means_path is not None:
        mean_rows.sort(key=lambda r: (r["model"], r["t_mode"], float(r["h"] or 0),
                                      float(r["t"] or 0), r["N"]))
        io.plain_csv(means_path, GAP_MEANS_HEADER, mean_rows)
    return io.plain_csv(out_path, FIT_HEADER, rows)


def fit_ipr_windows(windows_path: str, out_path: str) -> int:
    """Fit 2^{−kN} to per-(model, h) mean window IPRs."""
    stats = _grouped_stats(windows_path, ["model", "h"], "mean_ipr")
    rows = []
    for key in sorted(stats):
        model, h = key
        sizes, means, stderr, _ = stats[key]
        if len(sizes) < 3 or np.any(means <= 0):
            continue
        fit = fit_scaling(sizes, means, stderr if np.all(stderr > 0) else None)
        rows.append({
            "model": model, "h": h, "k": fit.k,
            "prefactor_log2": fit.prefactor_log2,
            "residual": fit.residual, "n_points": len(sizes),
        })
    rows.sort(key=lambda r: (r["model"], float(r["h"])))
    return io.plain_csv(out_path, IPR_EXPONENT_HEADER, rows)


def baseline_fits(gaps_path: str, out_path: str, beta: float) -> int:
    """Exponents of the uniform, local, and N×local classical strategies."""
    stats = _grouped_stats(gaps_path, ["model", "t_mode"], "delta")
    rows = []
    for key in sorted(stats):
        model, strategy = key
        sizes, means, stderr, _ = stats[key]
        if len(sizes) < 3 or np.any(means <= 0):
            continue
        fit = fit_scaling(sizes, means, stderr if np.all(stderr > 0) else None)
        rows.append({"model": model, "strategy": strategy, "beta": beta, "k": fit.k,
                     "prefactor_log2": fit.prefactor_log2, "residual": fit.residual})
        if strategy == "local":
            scaled = fit_scaling(sizes, sizes * means, None)
            rows.append({"model": model, "strategy": "local_times_n", "beta": beta,
                         "k": scaled.k, "prefactor_log2": scaled.prefactor_log2,
                         "residual": scaled.residual})
    return io.plain_csv(out_path, io.BASELINE_FIT_HEADER, rows)
