"""Greedy windowed construction of a reduction basis.

The full system is solved one time window of width tau at a time.  Each
window yields a snapshot-POD basis; the window basis is compared with
the accumulated basis via the spectral projection error e_k:

* e_k <= eps          -> the accumulated basis already captures new
                         windows: stop and return it.
* e_k >  eps_prime    -> merge the window basis in.
* otherwise           -> keep going without merging (the slack band
                         between eps and eps_prime stops the basis from
                         over-fitting an initial transient).

Termination is not guaranteed; a max_windows cap bounds the run and is
reported via the ``terminated`` flag rather than an exception.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .integrator import GRID_TOL, IntegratorConfig, integrate
from .pod import (
    empty_basis,
    merge_bases,
    orthonormality_defect,
    projection_error,
    snapshot_basis,
)
from .validation import ValidationError, check_vector


@dataclass(frozen=True)
class GreedyConfig:
    tau: float
    m: int
    eps: float
    eps_prime: float
    sv_tol: float
    max_windows: int = 256
    snapshot_sv_tol: float | None = None

    def __post_init__(self):
        if self.tau <= 0:
            raise ValidationError(f"window width must be positive, got {self.tau}")
        if self.m < 2:
            raise ValidationError(f"need at least 2 snapshots per window, got {self.m}")
        if not (self.eps_prime > self.eps > 0):
            raise ValidationError(
                f"need eps_prime > eps > 0, got eps={self.eps}, eps_prime={self.eps_prime}"
            )
        if self.sv_tol <= 0:
            raise ValidationError(f"sv_tol must be positive, got {self.sv_tol}")
        if self.max_windows < 1:
            raise ValidationError("max_windows must be >= 1")
        if self.snapshot_sv_tol is not None and self.snapshot_sv_tol <= 0:
            raise ValidationError("snapshot_sv_tol must be positive")

    @property
    def snapshot_tol(self) -> float:
        """Singular-value cutoff for per-window snapshot bases.

        Defaults to sqrt(sv_tol): the method of snapshots thresholds
        Gram-matrix eigenvalues, i.e. squared singular values, so the
        shared tolerance lives on the eigenvalue scale there.  Keeping
        raw singular values all the way down to sv_tol would retain
        modes whose directions are dominated by integration roundoff
        (direction noise grows like roundoff / sigma), which puts a
        ~1e-6 floor under the projection error and stops the epsilon
        criterion from ever firing.
        """
        if self.snapshot_sv_tol is not None:
            return self.snapshot_sv_tol
        return float(np.sqrt(self.sv_tol))


@dataclass
class WindowRecord:
    window: int
    t_end: float
    projection_error: float
    basis_size: int
    merged: bool
    ortho_defect: float
    merge_residual: float
    wall_time: float


@dataclass
class GreedyResult:
    basis: np.ndarray
    trace: list[WindowRecord] = field(default_factory=list)
    t_basis: float = 0.0
    terminal_state: np.ndarray | None = None
    terminated: bool = False

    @property
    def basis_size(self) -> int:
        return self.basis.shape[1]


def window_snapshots(f, y_start, k, cfg: GreedyConfig, dt: float):
    """Integrate window k and sample m uniformly spaced snapshots.

    Window k spans [(k-1) tau, k tau]; snapshots include both endpoints.
    Returns the (N, m) snapshot matrix and the state at the window end.
    """
    y_start = check_vector(y_start, name="window start state")
    spacing = cfg.tau / (cfg.m - 1)
    ratio = spacing / dt
    if abs(ratio - round(ratio)) > GRID_TOL * max(1.0, ratio):
        raise ValidationError(
            f"dt={dt} does not divide the snapshot spacing tau/(m-1)={spacing}"
        )
    t0 = (k - 1) * cfg.tau
    icfg = IntegratorConfig(dt=dt, t0=t0, t1=t0 + cfg.tau)
    record = [t0 + j * spacing for j in range(cfg.m)]
    traj = integrate(f, y_start, icfg, record)
    return traj.states.T.copy(), traj.final_state.copy()


def build_basis(f, n0, cfg: GreedyConfig, dt: float) -> GreedyResult:
    """Run the greedy windowed algorithm from state n0 at t = 0."""
    y = check_vector(n0, name="initial state").copy()
    N = y.shape[0]
    V = empty_basis(N)
    trace: list[WindowRecord] = []

    for k in range(1, cfg.max_windows + 1):
        tic = time.perf_counter()
        snaps, y_end = window_snapshots(f, y, k, cfg, dt)
        V_hat = snapshot_basis(snaps, cfg.snapshot_tol)
        err = projection_error(V, V_hat)

        if err <= cfg.eps:
            trace.append(
                WindowRecord(
                    window=k,
                    t_end=k * cfg.tau,
                    projection_error=err,
                    basis_size=V.shape[1],
                    merged=False,
                    ortho_defect=orthonormality_defect(V_hat),
                    merge_residual=0.0,
                    wall_time=time.perf_counter() - tic,
                )
            )
            return GreedyResult(
                basis=V,
                trace=trace,
                t_basis=k * cfg.tau,
                terminal_state=y_end,
                terminated=True,
            )

        merged = err > cfg.eps_prime
        merge_residual = 0.0
        if merged:
            V = merge_bases(V, V_hat, cfg.sv_tol)
            merge_residual = projection_error(V, V_hat)

        trace.append(
            WindowRecord(
                window=k,
                t_end=k * cfg.tau,
                projection_error=err,
                basis_size=V.shape[1],
                merged=merged,
                ortho_defect=max(
                    orthonormality_defect(V), orthonormality_defect(V_hat)
                ),
                merge_residual=merge_residual,
                wall_time=time.perf_counter() - tic,
            )
        )
        y = y_end

    return GreedyResult(
        basis=V,
        trace=trace,
        t_basis=cfg.max_windows * cfg.tau,
        terminal_state=y,
        terminated=False,
    )


class GreedyPODBasis(BaseEstimator):
    """Estimator wrapper around the greedy windowed basis builder.

    ``fit`` takes the full-system RHS callable and the initial state
    instead of a data matrix: the training data here is the trajectory
    the estimator generates itself, window by window.

    Attributes after fit: ``basis_`` (N, R), ``components_`` (R, N),
    ``trace_``, ``t_basis_``, ``terminal_state_``, ``terminated_``.
    """

    def __init__(self, tau=2.0, m=65, eps=1e-13, eps_prime=1e-10,
                 sv_tol=1e-13, dt=2.0**-12, max_windows=256, snapshot_sv_tol=None):
        self.tau = tau
        self.m = m
        self.eps = eps
        self.eps_prime = eps_prime
        self.sv_tol = sv_tol
        self.dt = dt
        self.max_windows = max_windows
        self.snapshot_sv_tol = snapshot_sv_tol

    def _config(self) -> GreedyConfig:
        return GreedyConfig(
            tau=self.tau,
            m=self.m,
            eps=self.eps,
            eps_prime=self.eps_prime,
            sv_tol=self.sv_tol,
            max_windows=self.max_windows,
            snapshot_sv_tol=self.snapshot_sv_tol,
        )

    def fit(self, rhs, n0):
        result = build_basis(rhs, n0, self._config(), self.dt)
        self.basis_ = result.basis
        self.components_ = result.basis.T
        self.trace_ = result.trace
        self.t_basis_ = result.t_basis
        self.terminal_state_ = result.terminal_state
        self.terminated_ = result.terminated
        self.n_features_in_ = result.basis.shape[0]
        return self

    def transform(self, X):
        return np.asarray(X, dtype=np.float64) @ self.basis_

    def inverse_transform(self, X_reduced):
        return np.asarray(X_reduced, dtype=np.float64) @ self.components_
