"""Fixed-step explicit midpoint integration with snapshot recording.

The stepper is deliberately minimal: autonomous RHS, fixed dt, no
interpolation.  Time is never accumulated in floating point; step k
lives at t0 + k * dt, which keeps requested record times exactly on the
grid over ~1e6 steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import DivergenceError, ValidationError

GRID_TOL = 1e-9


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t0: float
    t1: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not self.t0 < self.t1:
            raise ValidationError(f"need t0 < t1, got [{self.t0}, {self.t1}]")
        steps = (self.t1 - self.t0) / self.dt
        if abs(steps - round(steps)) > GRID_TOL * max(1.0, steps):
            raise ValidationError(
                f"(t1 - t0)/dt = {steps} is not an integer step count"
            )

    @property
    def n_steps(self) -> int:
        return int(round((self.t1 - self.t0) / self.dt))

    def time_at(self, k: int) -> float:
        return self.t0 + k * self.dt


@dataclass
class Trajectory:
    """Recorded states at a strictly increasing subset of grid times."""

    times: np.ndarray
    states: np.ndarray  # shape (len(times), state_dim)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.states = np.asarray(self.states, dtype=np.float64)
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("trajectory times must be strictly increasing")
        if self.states.shape[0] != self.times.shape[0]:
            raise ValidationError("times/states length mismatch")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def midpoint_step(f, y, dt):
    """One explicit midpoint step: y + dt * f(y + dt/2 * f(y))."""
    y_mid = y + (0.5 * dt) * f(y)
    return y + dt * f(y_mid)


def _record_steps(cfg: IntegratorConfig, record_times) -> list[int]:
    steps = []
    for t in record_times:
        if t < cfg.t0 - GRID_TOL or t > cfg.t1 + GRID_TOL:
            raise ValidationError(f"record time {t} outside [{cfg.t0}, {cfg.t1}]")
        k = (t - cfg.t0) / cfg.dt
        if abs(k - round(k)) > GRID_TOL * max(1.0, abs(k)):
            raise ValidationError(f"record time {t} is not on the dt={cfg.dt} grid")
        steps.append(int(round(k)))
    steps.append(cfg.n_steps)  # final state always recorded
    return sorted(set(steps))


def integrate(f, y0, cfg: IntegratorConfig, record_times=(), observer=None) -> Trajectory:
    """March the midpoint scheme from t0 to t1, recording requested states.

    Parameters
    ----------
    f : callable
        Autonomous RHS, vector -> vector.
    observer : callable, optional
        Called after every step as ``observer(step_index, t_next, y_next,
        y_mid)`` with the accepted state and the midpoint stage state;
        used for per-step diagnostics without re-evaluating the RHS.

    Raises
    ------
    DivergenceError
        On the first non-finite state, carrying the last finite state
        and its time.
    """
    y = np.array(y0, dtype=np.float64)
    record_at = _record_steps(cfg, record_times)
    rec_times, rec_states = [], []

    pos = 0
    if record_at[0] == 0:
        rec_times.append(cfg.t0)
        rec_states.append(y.copy())
        pos = 1

    half = 0.5 * cfg.dt
    for k in range(1, cfg.n_steps + 1):
        y_mid = y + half * f(y)
        y_next = y + cfg.dt * f(y_mid)
        if not np.all(np.isfinite(y_next)):
            raise DivergenceError(
                f"non-finite state at step {k} (t = {cfg.time_at(k)})",
                step=k,
                t=cfg.time_at(k - 1),
                last_state=y,
            )
        y = y_next
        if observer is not None:
            observer(k, cfg.time_at(k), y, y_mid)
        if pos < len(record_at) and record_at[pos] == k:
            rec_times.append(cfg.time_at(k))
            rec_states.append(y.copy())
            pos += 1

    return Trajectory(times=np.array(rec_times), states=np.array(rec_states))
