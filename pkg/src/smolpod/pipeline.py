"""High-level experiment drivers shared by the CLI and the test suite.

Each driver is a pure function of its configuration and inputs; file
persistence is separated into small ``save_*`` helpers so results can
be checked in-process without touching disk.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .greedy import GreedyResult, build_basis
from .integrator import GRID_TOL, IntegratorConfig, Trajectory, integrate
from .kernel import build_kernel
from .pod import project
from .podio import dump_config, write_matrix
from .reduced import ReducedSystem, build_reduced_system
from .rhs import FastRHS, moment
from .runconfig import RunConfig
from .validation import ValidationError


def record_grid(t0: float, t1: float, stride: float) -> list[float]:
    """Multiples of ``stride`` inside [t0, t1], plus t0 itself."""
    k0 = int(np.ceil(t0 / stride - GRID_TOL))
    k1 = int(np.floor(t1 / stride + GRID_TOL))
    times = {t0}
    times.update(k * stride for k in range(k0, k1 + 1))
    return sorted(times)


@dataclass
class FullSolveResult:
    trajectory: Trajectory
    moments0: np.ndarray
    moments1: np.ndarray
    flux: np.ndarray
    mass_residual: np.ndarray  # |M(t) - (M(0) + Jm*t - outflow)| per record time
    wall_time: float

    @property
    def max_mass_residual(self) -> float:
        scale = max(1.0, float(np.max(np.abs(self.moments1))))
        return float(np.max(self.mass_residual)) / scale


def solve_full(cfg: RunConfig, t_end: float | None = None,
               n0: np.ndarray | None = None, t0: float = 0.0) -> FullSolveResult:
    """Integrate the full system with the fast RHS and a mass ledger.

    The ledger uses the flux evaluated at each step's midpoint stage,
    for which the discrete mass update of the midpoint scheme is exact;
    any residual beyond rounding signals an implementation bug.
    """
    t_end = cfg.t_end if t_end is None else t_end
    n0 = cfg.n0 if n0 is None else n0
    K = build_kernel(cfg.kernel_spec)
    ev = FastRHS(K, cfg.source)
    icfg = IntegratorConfig(dt=cfg.dt, t0=t0, t1=t_end)
    record = record_grid(t0, t_end, cfg.record_stride)

    outflow = np.zeros(icfg.n_steps + 1)

    def observer(k, t, y, y_mid):
        # last RHS call inside the step was at the midpoint stage
        outflow[k] = outflow[k - 1] + cfg.dt * ev.last_flux

    tic = time.perf_counter()
    traj = integrate(ev, n0, icfg, record, observer=observer)
    wall = time.perf_counter() - tic

    j_mass = moment(cfg.source, 1)
    m0 = np.array([moment(y, 0) for y in traj.states])
    m1 = np.array([moment(y, 1) for y in traj.states])
    flux = np.array([ev.rhs_and_flux(y)[1] for y in traj.states])
    steps = np.rint((traj.times - t0) / cfg.dt).astype(int)
    predicted = m1[0] + j_mass * (traj.times - t0) - outflow[steps]
    residual = np.abs(m1 - predicted)

    return FullSolveResult(
        trajectory=traj,
        moments0=m0,
        moments1=m1,
        flux=flux,
        mass_residual=residual,
        wall_time=wall,
    )


def run_greedy(cfg: RunConfig) -> GreedyResult:
    K = build_kernel(cfg.kernel_spec)
    ev = FastRHS(K, cfg.source)
    return build_basis(ev, cfg.n0, cfg.greedy, cfg.dt)


def build_reduced(cfg: RunConfig, V: np.ndarray, t_basis: float | None = None) -> ReducedSystem:
    if V.shape[1] == 0:
        raise ValidationError("cannot build a reduced system from an empty basis")
    K = build_kernel(cfg.kernel_spec)
    meta = {
        "N": cfg.N,
        "R": int(V.shape[1]),
        "kernel": {k: v for k, v in cfg.raw.items() if k.startswith("kernel.")},
        "eps": cfg.greedy.eps,
        "eps_prime": cfg.greedy.eps_prime,
        "delta": cfg.greedy.sv_tol,
    }
    if t_basis is not None:
        meta["t_basis"] = t_basis
    return build_reduced_system(K, V, cfg.source, meta)


def solve_reduced_traj(cfg: RunConfig, sys: ReducedSystem, x0: np.ndarray,
                       t0: float, t_end: float) -> Trajectory:
    icfg = IntegratorConfig(dt=cfg.reduced_dt, t0=t0, t1=t_end)
    record = record_grid(t0, t_end, cfg.record_stride)
    return integrate(sys.rhs, x0, icfg, record)


@dataclass
class CompareResult:
    times: np.ndarray
    rel_error: np.ndarray
    t_split: float | None = None

    def _mask(self, interp: bool):
        if self.t_split is None:
            return np.ones_like(self.times, dtype=bool)
        if interp:
            return self.times <= self.t_split + GRID_TOL
        return self.times > self.t_split + GRID_TOL

    def summary(self) -> dict:
        out = {
            "max_rel_error": float(np.max(self.rel_error)),
            "mean_rel_error": float(np.mean(self.rel_error)),
        }
        if self.t_split is not None:
            for label, interp in (("interpolation", True), ("extrapolation", False)):
                mask = self._mask(interp)
                if np.any(mask):
                    out[f"{label}_max"] = float(np.max(self.rel_error[mask]))
                    out[f"{label}_mean"] = float(np.mean(self.rel_error[mask]))
        return out


def compare_trajectories(full: Trajectory, recon: Trajectory,
                         t_split: float | None = None) -> CompareResult:
    """Per-time relative Euclidean error between two aligned trajectories."""
    if full.times.shape != recon.times.shape or np.max(
        np.abs(full.times - recon.times)
    ) > GRID_TOL * max(1.0, float(np.max(np.abs(full.times)))):
        raise ValidationError("trajectories are on different time grids")
    norms = np.linalg.norm(full.states, axis=1)
    # relative error is undefined where the reference state is zero
    # (e.g. the t = 0 record of a run started from the empty system)
    keep = norms > 0
    if not np.any(keep):
        raise ValidationError("full trajectory is identically zero; relative error undefined")
    err = np.linalg.norm(full.states[keep] - recon.states[keep], axis=1) / norms[keep]
    return CompareResult(times=full.times[keep].copy(), rel_error=err, t_split=t_split)


@dataclass
class PipelineResult:
    greedy: GreedyResult
    reduced: ReducedSystem
    full: FullSolveResult
    reduced_trajectory: Trajectory
    reconstructed: Trajectory
    comparison: CompareResult
    summary: dict = field(default_factory=dict)


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """End-to-end experiment: greedy basis, projection, reduced solve,
    and comparison against an independently computed full reference."""
    tic = time.perf_counter()
    greedy = run_greedy(cfg)
    t_basis_wall = time.perf_counter() - tic
    if greedy.basis.shape[1] == 0:
        raise ValidationError("greedy run produced an empty basis; lower eps")

    tic = time.perf_counter()
    reduced = build_reduced(cfg, greedy.basis, greedy.t_basis)
    t_tensor_wall = time.perf_counter() - tic

    full = solve_full(cfg)

    tic = time.perf_counter()
    if cfg.reduced_mode == "re-solve":
        x0 = project(greedy.basis, cfg.n0)
        red_traj = solve_reduced_traj(cfg, reduced, x0, 0.0, cfg.reduced_t_end)
    else:
        x0 = project(greedy.basis, greedy.terminal_state)
        red_traj = solve_reduced_traj(cfg, reduced, x0, greedy.t_basis, cfg.reduced_t_end)
    t_red_wall = time.perf_counter() - tic

    recon = Trajectory(times=red_traj.times, states=red_traj.states @ greedy.basis.T)
    if cfg.reduced_mode == "re-solve":
        full_for_compare = full.trajectory
    else:
        keep = full.trajectory.times >= greedy.t_basis - GRID_TOL
        full_for_compare = Trajectory(
            times=full.trajectory.times[keep], states=full.trajectory.states[keep]
        )
    comparison = compare_trajectories(full_for_compare, recon, t_split=greedy.t_basis)

    summary = {
        "N": cfg.N,
        "basis_size": int(greedy.basis.shape[1]),
        "t_basis": greedy.t_basis,
        "terminated": greedy.terminated,
        "mode": cfg.reduced_mode,
        "wall_time_full_solve": full.wall_time,
        "wall_time_basis_build": t_basis_wall,
        "wall_time_tensor_build": t_tensor_wall,
        "wall_time_reduced_solve": t_red_wall,
        "max_mass_residual": full.max_mass_residual,
        "errors": comparison.summary(),
    }
    return PipelineResult(
        greedy=greedy,
        reduced=reduced,
        full=full,
        reduced_trajectory=red_traj,
        reconstructed=recon,
        comparison=comparison,
        summary=summary,
    )


# ---------------------------------------------------------------------------
# persistence helpers


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def save_resolved_config(out: Path, cfg: RunConfig):
    (out / "resolved_config.txt").write_text(dump_config(cfg.raw), encoding="utf-8")


def save_trajectory(out: Path, name: str, traj: Trajectory):
    # states stored column-per-snapshot
    write_matrix(out / f"{name}.podmat", traj.states.T)
    _write_csv(out / f"{name}_times.csv", ["t"], [[repr(float(t))] for t in traj.times])


def save_full_result(out: Path, res: FullSolveResult):
    save_trajectory(out, "full_states", res.trajectory)
    _write_csv(
        out / "moments.csv",
        ["t", "moment0", "moment1", "mass_flux_out", "mass_residual"],
        [
            [repr(float(t)), repr(float(a)), repr(float(b)), repr(float(c)), repr(float(d))]
            for t, a, b, c, d in zip(
                res.trajectory.times, res.moments0, res.moments1, res.flux, res.mass_residual
            )
        ],
    )


def save_greedy_result(out: Path, res: GreedyResult):
    write_matrix(out / "basis.podmat", res.basis)
    write_matrix(out / "terminal_state.podmat", res.terminal_state.reshape(-1, 1))
    _write_csv(
        out / "greedy_trace.csv",
        ["window_index", "t_end", "projection_error", "basis_size", "merged"],
        [
            [r.window, repr(float(r.t_end)), repr(float(r.projection_error)), r.basis_size, int(r.merged)]
            for r in res.trace
        ],
    )
    (out / "basis_meta.json").write_text(
        json.dumps(
            {
                "t_basis": res.t_basis,
                "terminated": res.terminated,
                "basis_size": res.basis_size,
            },
            indent=2,
        ),
        encoding="utf-8",
    )


def save_reduced_system(out: Path, sys: ReducedSystem):
    R = sys.R
    write_matrix(out / "reduced_basis.podmat", sys.basis)
    write_matrix(out / "reduced_source.podmat", sys.J_red.reshape(-1, 1))
    write_matrix(out / "reduced_tensor.podmat", sys.S_red.reshape(R, R * R))
    (out / "reduced_meta.json").write_text(json.dumps(sys.meta, indent=2), encoding="utf-8")


def load_reduced_system(out: Path) -> ReducedSystem:
    from .podio import read_matrix, read_vector

    V = read_matrix(out / "reduced_basis.podmat")
    J_red = read_vector(out / "reduced_source.podmat")
    R = J_red.shape[0]
    S_red = read_matrix(out / "reduced_tensor.podmat").reshape(R, R, R)
    meta = json.loads((out / "reduced_meta.json").read_text(encoding="utf-8"))
    return ReducedSystem(J_red=J_red, S_red=S_red, basis=V, meta=meta)


def save_comparison(out: Path, cmp_res: CompareResult):
    _write_csv(
        out / "compare.csv",
        ["t", "rel_error"],
        [[repr(float(t)), repr(float(e))] for t, e in zip(cmp_res.times, cmp_res.rel_error)],
    )
    (out / "compare_summary.json").write_text(
        json.dumps(cmp_res.summary(), indent=2), encoding="utf-8"
    )
