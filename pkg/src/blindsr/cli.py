"""Command-line entry points for the experiment harness.

Subcommands: phase-sr, phase-ns, phase-nr, converge, noise, solve.
"""

from __future__ import annotations

import argparse
import json
import os

import numpy as np

from . import experiments as ex
from . import pgd_solver as solver
from .measurement_ops import SensingOperator
from .postprocess import RecoveryResult, music_locations, solve_weights
from .signal_model import add_noise, load_instance, measure, sample_subspace


def _parse_values(text):
    """Parse '64', '1,2,3' or '1:12' (inclusive range, optional :step)."""
    vals = []
    for part in str(text).split(","):
        if ":" in part:
            pieces = [int(p) for p in part.split(":")]
            lo, hi = pieces[0], pieces[1]
            step = pieces[2] if len(pieces) > 2 else 1
            vals.extend(range(lo, hi + 1, step))
        else:
            vals.append(int(part))
    return tuple(vals)


def _parse_floats(text):
    return tuple(float(p) for p in str(text).split(","))


def _add_common(p):
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sep", choices=["none", "1overn"], default="none")
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--threads", type=int, default=1, metavar="K")
    p.add_argument("--config", default=None, metavar="FILE",
                   help="JSON file with solver config overrides")


def _overrides(args):
    if args.config is None:
        return {}, None
    with open(args.config) as fh:
        doc = json.load(fh)
    max_iters = doc.pop("max_iters", None)
    return doc, max_iters


def build_parser():
    ap = argparse.ArgumentParser(prog="blindsr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase-sr", help="success-rate grid over (s, r) at fixed n")
    p.add_argument("--n", default="64")
    p.add_argument("--s", default="1:12")
    p.add_argument("--r", default="1:12")
    _add_common(p)

    p = sub.add_parser("phase-ns", help="success-rate grid over (n, s) at fixed r")
    p.add_argument("--n", default="8:64:4")
    p.add_argument("--s", default="1:12")
    p.add_argument("--r", default="4")
    _add_common(p)

    p = sub.add_parser("phase-nr", help="success-rate grid over (n, r) at fixed s")
    p.add_argument("--n", default="8:64:4")
    p.add_argument("--s", default="4")
    p.add_argument("--r", default="1:12")
    _add_common(p)

    p = sub.add_parser("converge", help="per-iteration error traces")
    p.add_argument("--n", default="256,512,1024")
    p.add_argument("--s", default="4")
    p.add_argument("--r", default="4")
    _add_common(p)

    p = sub.add_parser("noise", help="relative error vs noise level")
    p.add_argument("--n", default="64,128")
    p.add_argument("--s", default="4")
    p.add_argument("--r", default="4")
    p.add_argument("--sigma", default="0.001,0.00316,0.01,0.0316,0.1,0.316,1.0")
    _add_common(p)

    p = sub.add_parser("solve", help="solve one instance from a JSON file")
    p.add_argument("--in", dest="infile", required=True, metavar="FILE")
    _add_common(p)

    return ap


def _spec_from_args(args, kind, default_trials):
    overrides, max_iters = _overrides(args)
    spec = ex.ExperimentSpec(
        kind=kind,
        n_values=_parse_values(args.n),
        s_values=_parse_values(args.s),
        r_values=_parse_values(args.r),
        trials=args.trials if args.trials is not None else default_trials,
        seed=args.seed,
        separation=args.sep,
        solver_overrides=overrides,
    )
    if max_iters is not None:
        spec.max_iters = max_iters
    if kind == "noise":
        spec.sigma_values = _parse_floats(args.sigma)
        spec.solver_overrides.setdefault("tol_stagnation", 1e-7)
    return spec


def run_solve(args):
    dims, kind, seed, sources, noise_level = load_instance(args.infile)
    from .signal_model import build_target_matrix

    rng = np.random.default_rng(seed)
    X = build_target_matrix(sources, dims)
    sub = sample_subspace(dims, kind, rng)
    op = SensingOperator(sub, dims)
    m = measure(X, sub, op.weights)
    if noise_level > 0:
        m = add_noise(m, noise_level, rng, op.weights)
    overrides, max_iters = _overrides(args)
    cfg = solver.SolverConfig(**overrides)
    if max_iters is not None:
        cfg.max_iters = max_iters
    pair, trace = solver.solve(m, op, dims.r, cfg, truth={"X": X})
    X_hat = solver.recover_X(pair, op)
    taus_hat, deficient = music_locations(X_hat, dims, dims.r)
    if len(taus_hat) and not deficient:
        V, lsq_deficient = solve_weights(taus_hat, m, sub)
        deficient = deficient or lsq_deficient
    else:
        V = np.zeros((dims.s, len(taus_hat)), dtype=complex)
    result = RecoveryResult(
        X_hat=X_hat,
        taus_hat=taus_hat,
        weights_hat=V,
        residual=float(np.linalg.norm(m.y - op.apply(X_hat))),
        deficient=deficient,
    )
    os.makedirs(args.out, exist_ok=True)
    doc = result.to_dict()
    doc["rel_err"] = float(np.linalg.norm(X_hat - X) / np.linalg.norm(X))
    with open(os.path.join(args.out, "result.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
    trace.to_csv(os.path.join(args.out, "trace.csv"))
    return doc


def main(argv=None):
    args = build_parser().parse_args(argv)
    cmd = args.command
    if cmd == "solve":
        doc = run_solve(args)
        print(f"rel_err={doc['rel_err']:.3e} residual={doc['residual']:.3e}")
        return 0
    if cmd in ("phase-sr", "phase-ns", "phase-nr"):
        spec = _spec_from_args(args, cmd, default_trials=20)
        _, path = ex.phase_transition(spec, args.out, workers=args.threads)
        print(f"wrote {path}")
        return 0
    if cmd == "converge":
        spec = _spec_from_args(args, cmd, default_trials=1)
        paths = ex.convergence_study(spec, args.out)
        print("wrote " + ", ".join(paths))
        return 0
    if cmd == "noise":
        spec = _spec_from_args(args, cmd, default_trials=10)
        _, path = ex.noise_study(spec, args.out, workers=args.threads)
        print(f"wrote {path}")
        return 0
    raise SystemExit(f"unknown command {cmd}")


if __name__ == "__main__":
    raise SystemExit(main())
