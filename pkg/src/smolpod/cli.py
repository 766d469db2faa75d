"""Command-line harness.

Subcommands: solve-full, build-basis, reduce, solve-reduced, compare,
pipeline, bench.  Exit codes: 0 success, 2 validation error,
3 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import pipeline as pl
from .integrator import IntegratorConfig, Trajectory, integrate
from .kernel import build_kernel, dense_kernel
from .pod import project
from .podio import load_config, read_matrix
from .rhs import FastRHS, rhs_direct
from .runconfig import resolve_config
from .validation import DivergenceError, ValidationError

EXIT_VALIDATION = 2
EXIT_DIVERGENCE = 3


def _common_args(p):
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry (repeatable)",
    )


def _load(args):
    cfg = resolve_config(load_config(args.config, args.override))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pl.save_resolved_config(out, cfg)
    return cfg, out


def _read_trajectory(states_path: Path) -> Trajectory:
    states = read_matrix(states_path)  # columns are snapshots
    times_path = states_path.with_name(states_path.stem + "_times.csv")
    lines = times_path.read_text(encoding="utf-8").splitlines()[1:]
    times = np.array([float(x) for x in lines])
    return Trajectory(times=times, states=states.T)


def cmd_solve_full(args):
    cfg, out = _load(args)
    try:
        res = pl.solve_full(cfg)
    except DivergenceError as exc:
        _save_divergence(out, exc)
        raise
    pl.save_full_result(out, res)
    summary = {
        "status": "ok",
        "wall_time": res.wall_time,
        "max_mass_residual": res.max_mass_residual,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    print(f"solve-full: N={cfg.N} t_end={cfg.t_end} wall={res.wall_time:.2f}s")


def _save_divergence(out: Path, exc: DivergenceError):
    info = {"status": "diverged", "step": exc.step, "t": exc.t, "error": str(exc)}
    (out / "summary.json").write_text(json.dumps(info, indent=2), encoding="utf-8")
    if exc.last_state is not None:
        from .podio import write_matrix

        write_matrix(out / "last_finite_state.podmat", np.asarray(exc.last_state).reshape(-1, 1))


def cmd_build_basis(args):
    cfg, out = _load(args)
    res = pl.run_greedy(cfg)
    pl.save_greedy_result(out, res)
    print(
        f"build-basis: R={res.basis_size} t_basis={res.t_basis} "
        f"terminated={res.terminated} windows={len(res.trace)}"
    )


def cmd_reduce(args):
    cfg, out = _load(args)
    basis_dir = Path(args.basis_dir)
    V = read_matrix(basis_dir / "basis.podmat")
    t_basis = None
    meta_path = basis_dir / "basis_meta.json"
    if meta_path.exists():
        t_basis = json.loads(meta_path.read_text(encoding="utf-8")).get("t_basis")
    sys_red = pl.build_reduced(cfg, V, t_basis)
    pl.save_reduced_system(out, sys_red)
    print(f"reduce: N={cfg.N} R={sys_red.R}")


def cmd_solve_reduced(args):
    cfg, out = _load(args)
    sys_red = pl.load_reduced_system(Path(args.reduced_dir))
    V = sys_red.basis
    if cfg.reduced_mode == "continuation":
        if args.basis_dir is None:
            raise ValidationError("continuation mode needs --basis-dir for the terminal state")
        terminal = read_matrix(Path(args.basis_dir) / "terminal_state.podmat").reshape(-1)
        t_basis = sys_red.meta.get("t_basis")
        if t_basis is None:
            raise ValidationError("reduced system metadata lacks t_basis")
        x0 = project(V, terminal)
        traj = pl.solve_reduced_traj(cfg, sys_red, x0, float(t_basis), cfg.reduced_t_end)
    else:
        x0 = project(V, cfg.n0)
        traj = pl.solve_reduced_traj(cfg, sys_red, x0, 0.0, cfg.reduced_t_end)
    pl.save_trajectory(out, "reduced_states", traj)
    if not args.no_reconstruct:
        recon = Trajectory(times=traj.times, states=traj.states @ V.T)
        pl.save_trajectory(out, "reconstructed", recon)
    print(f"solve-reduced: R={sys_red.R} steps={len(traj.times)} mode={cfg.reduced_mode}")


def cmd_compare(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    full = _read_trajectory(Path(args.full))
    recon = _read_trajectory(Path(args.recon))
    result = pl.compare_trajectories(full, recon, t_split=args.t_split)
    pl.save_comparison(out, result)
    print(f"compare: {result.summary()}")


def cmd_pipeline(args):
    cfg, out = _load(args)
    try:
        res = pl.run_pipeline(cfg)
    except DivergenceError as exc:
        _save_divergence(out, exc)
        raise
    pl.save_greedy_result(out, res.greedy)
    pl.save_reduced_system(out, res.reduced)
    pl.save_full_result(out, res.full)
    pl.save_trajectory(out, "reduced_states", res.reduced_trajectory)
    pl.save_trajectory(out, "reconstructed", res.reconstructed)
    pl.save_comparison(out, res.comparison)
    (out / "summary.json").write_text(json.dumps(res.summary, indent=2), encoding="utf-8")
    print(f"pipeline: {json.dumps(res.summary)}")


def cmd_bench(args):
    cfg, out = _load(args)
    from dataclasses import replace

    rng = np.random.default_rng(0)
    rows = []
    for scale in (1, 2, 4):
        N = cfg.N * scale
        spec = replace(cfg.kernel_spec, N=N)
        K = build_kernel(spec)
        J = np.zeros(N)
        J[0] = 1.0
        n = rng.random(N)
        ev = FastRHS(K, J)
        ev(n)  # warm-up
        reps = max(1, args.reps)
        tic = time.perf_counter()
        for _ in range(reps):
            ev(n)
        rows.append(["rhs_fast", N, (time.perf_counter() - tic) / reps])
        if N <= 4096:
            C = dense_kernel(spec)
            tic = time.perf_counter()
            rhs_direct(C, J, n)
            rows.append(["rhs_direct", N, time.perf_counter() - tic])
    pl._write_csv(out / "bench.csv", ["method", "N", "seconds"], rows)
    for method, N, secs in rows:
        print(f"bench: {method} N={N} {secs:.4g}s")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="smolpod",
        description="Aggregation-equation solver with POD model reduction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-full", help="integrate the full system")
    _common_args(p)
    p.set_defaults(func=cmd_solve_full)

    p = sub.add_parser("build-basis", help="greedy windowed basis construction")
    _common_args(p)
    p.set_defaults(func=cmd_build_basis)

    p = sub.add_parser("reduce", help="build the projected source and tensor")
    _common_args(p)
    p.add_argument("--basis-dir", required=True, help="build-basis output directory")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve-reduced", help="integrate the reduced system")
    _common_args(p)
    p.add_argument("--reduced-dir", required=True, help="reduce output directory")
    p.add_argument("--basis-dir", help="build-basis output (continuation mode)")
    p.add_argument("--no-reconstruct", action="store_true")
    p.set_defaults(func=cmd_solve_reduced)

    p = sub.add_parser("compare", help="per-time relative error between trajectories")
    p.add_argument("--full", required=True, help="full trajectory .podmat")
    p.add_argument("--recon", required=True, help="reconstructed trajectory .podmat")
    p.add_argument("--out", required=True)
    p.add_argument("--t-split", type=float, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="end-to-end basis/reduce/solve/compare")
    _common_args(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("bench", help="RHS cost scaling measurements")
    _common_args(p)
    p.add_argument("--reps", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    threads = os.environ.get("THREADS")
    if threads:
        os.environ.setdefault("OMP_NUM_THREADS", threads)
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    return 0


if __name__ == "__main__":
    sys.exit(main())
