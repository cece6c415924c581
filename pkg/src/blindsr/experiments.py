"""Experiment harness: phase transitions, convergence traces and noise sweeps.

Every trial derives its generator from (master seed, cell coordinates, trial
index), so results are independent of scheduling order and re-runs with the
same master seed reproduce every numeric CSV field byte for byte (wall-clock
columns excluded).
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import pgd_solver as solver
from .measurement_ops import SensingOperator
from .signal_model import (
    ProblemDims,
    add_noise,
    build_target_matrix,
    measure,
    sample_point_sources,
    sample_subspace,
)

__all__ = [
    "ExperimentSpec",
    "CellResult",
    "run_trial",
    "phase_transition",
    "convergence_study",
    "noise_study",
]

CELLS_HEADER = [
    "n", "s", "r", "sigma", "trials", "successes", "success_rate",
    "mean_rel_err", "median_rel_err", "mean_iters", "mean_millis",
]

NOISE_HEADER = [
    "n", "sigma", "snr_db", "trials", "mean_rel_err", "median_rel_err",
    "mean_iters", "mean_millis",
]


@dataclass
class ExperimentSpec:
    kind: str
    n_values: tuple = (64,)
    s_values: tuple = (4,)
    r_values: tuple = (4,)
    sigma_values: tuple = (0.0,)
    trials: int = 20
    seed: int = 0
    threshold: float = 1e-3
    separation: str = "none"  # or "1overn"
    subspace_kind: str = "dft-rows"
    max_iters: int = 1000
    solver_overrides: dict = field(default_factory=dict)


@dataclass
class CellResult:
    n: int
    s: int
    r: int
    sigma: float
    trials: int
    successes: int
    mean_rel_err: float
    median_rel_err: float
    mean_iters: float
    mean_millis: float

    @property
    def success_rate(self):
        return self.successes / self.trials if self.trials else float("nan")

    def row(self):
        return [
            self.n, self.s, self.r,
            _f(self.sigma), self.trials, self.successes,
            _f(self.success_rate), _f(self.mean_rel_err), _f(self.median_rel_err),
            _f(self.mean_iters), _f(self.mean_millis),
        ]


def _f(v):
    return format(float(v), ".17g")


def _trial_rng(master_seed, cell_key, trial):
    return np.random.default_rng(np.random.SeedSequence([master_seed, *cell_key, trial]))


def _solver_config(spec):
    return solver.SolverConfig(max_iters=spec.max_iters, **spec.solver_overrides)


def cell_is_valid(n, s, r):
    if not (1 <= s < n):
        return False
    n1 = (n + 2) // 2
    return 1 <= r <= min(s * n1, n + 1 - n1)


def run_trial(spec, cell_key, n, s, r, sigma_e, trial):
    """One seeded trial; solver failures are recorded, never raised."""
    rng = _trial_rng(spec.seed, cell_key, trial)
    t0 = time.perf_counter()
    try:
        dims = ProblemDims(n=n, s=s, r=r)
        min_sep = 1.0 / n if spec.separation == "1overn" else None
        src = sample_point_sources(r, rng, min_sep=min_sep, s=s)
        X = build_target_matrix(src, dims)
        sub = sample_subspace(dims, spec.subspace_kind, rng)
        op = SensingOperator(sub, dims)
        m = measure(X, sub, op.weights)
        if sigma_e > 0:
            m = add_noise(m, sigma_e, rng, op.weights)
        pair, trace = solver.solve(m, op, r, _solver_config(spec), truth={"X": X})
        rel_err = trace.rel_err[-1]
        iters = trace.iterations
    except Exception:
        rel_err, iters = float("inf"), 0
    millis = (time.perf_counter() - t0) * 1e3
    return {
        "rel_err": float(rel_err),
        "iters": int(iters),
        "success": bool(rel_err <= spec.threshold),
        "millis": millis,
    }


def _run_cell(spec, cell_key, n, s, r, sigma_e, pool=None):
    args = [(spec, cell_key, n, s, r, sigma_e, t) for t in range(spec.trials)]
    if pool is None:
        recs = [run_trial(*a) for a in args]
    else:
        recs = list(pool.map(_trial_star, args))
    errs = np.array([rec["rel_err"] for rec in recs])
    finite = errs[np.isfinite(errs)]
    return CellResult(
        n=n, s=s, r=r, sigma=sigma_e,
        trials=len(recs),
        successes=sum(rec["success"] for rec in recs),
        mean_rel_err=float(np.mean(finite)) if len(finite) else float("inf"),
        median_rel_err=float(np.median(finite)) if len(finite) else float("inf"),
        mean_iters=float(np.mean([rec["iters"] for rec in recs])),
        mean_millis=float(np.mean([rec["millis"] for rec in recs])),
    )


def _trial_star(args):
    return run_trial(*args)


def _open_pool(workers):
    return ProcessPoolExecutor(max_workers=workers) if workers > 1 else None


def phase_transition(spec, out_dir, workers=1):
    """Sweep the (n, s, r) grid and write one cells.csv row per valid cell.

    Rows are flushed as cells finish, so an interrupted sweep keeps its
    partial results.
    """
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "cells.csv")
    results = []
    pool = _open_pool(workers)
    try:
        with open(path, "w") as fh:
            fh.write("# blindsr cells schema=1\n")
            fh.write(",".join(CELLS_HEADER) + "\n")
            for ni, n in enumerate(spec.n_values):
                for si, s in enumerate(spec.s_values):
                    for ri, r in enumerate(spec.r_values):
                        if not cell_is_valid(n, s, r):
                            continue
                        cell = _run_cell(spec, (ni, si, ri, 0), n, s, r, 0.0, pool)
                        results.append(cell)
                        fh.write(",".join(str(v) for v in cell.row()) + "\n")
                        fh.flush()
    finally:
        if pool is not None:
            pool.shutdown()
    return results, path


def convergence_study(spec, out_dir):
    """Per-iteration error traces for each n; one trace_<n>.csv per size."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for ni, n in enumerate(spec.n_values):
        s, r = spec.s_values[0], spec.r_values[0]
        rng = _trial_rng(spec.seed, (ni, 0, 0, 0), 0)
        dims = ProblemDims(n=n, s=s, r=r)
        min_sep = 1.0 / n if spec.separation == "1overn" else None
        src = sample_point_sources(r, rng, min_sep=min_sep, s=s)
        X = build_target_matrix(src, dims)
        sub = sample_subspace(dims, spec.subspace_kind, rng)
        op = SensingOperator(sub, dims)
        m = measure(X, sub, op.weights)
        _, trace = solver.solve(m, op, r, _solver_config(spec), truth={"X": X})
        path = os.path.join(out_dir, f"trace_{n}.csv")
        trace.to_csv(path)
        paths.append(path)
    return paths


def noise_study(spec, out_dir, workers=1):
    """Noise sweep: mean relative error per (n, sigma_e) point."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "noise.csv")
    results = []
    pool = _open_pool(workers)
    try:
        with open(path, "w") as fh:
            fh.write("# blindsr noise schema=1\n")
            fh.write(",".join(NOISE_HEADER) + "\n")
            for ni, n in enumerate(spec.n_values):
                for gi, sigma_e in enumerate(spec.sigma_values):
                    s, r = spec.s_values[0], spec.r_values[0]
                    cell = _run_cell(spec, (ni, 0, 0, gi), n, s, r, sigma_e, pool)
                    results.append(cell)
                    snr = -20.0 * np.log10(sigma_e) if sigma_e > 0 else float("inf")
                    fh.write(
                        ",".join(
                            [str(n), _f(sigma_e), _f(snr), str(cell.trials),
                             _f(cell.mean_rel_err), _f(cell.median_rel_err),
                             _f(cell.mean_iters), _f(cell.mean_millis)]
                        )
                        + "\n"
                    )
                    fh.flush()
    finally:
        if pool is not None:
            pool.shutdown()
    return results, path
