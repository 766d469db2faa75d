"""Typed run configuration assembled from flat key=value settings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .greedy import GreedyConfig
from .kernel import KernelSpec
from .podio import read_vector
from .validation import ValidationError

DEFAULTS = {
    "kernel.form": "brownian",
    "kernel.a": "0.8",
    "kernel.nu": "0.0",
    "kernel.mu": "0.0",
    "kernel.c": "0.0",
    "source.kind": "monomer",
    "source.j0": "1.0",
    "system.n0": "zero",
    "integrator.dt": str(2.0**-12),
    "greedy.tau": "2.0",
    "greedy.m": "65",
    "greedy.eps": "1e-13",
    "greedy.eps_prime": "1e-10",
    "greedy.delta": "1e-13",
    "greedy.max_windows": "256",
    "reduced.mode": "re-solve",
    "output.record_stride": str(2.0**-4),
}

REQUIRED = ("system.N", "integrator.t_end")


@dataclass
class RunConfig:
    kernel_spec: KernelSpec
    source: np.ndarray
    n0: np.ndarray
    dt: float
    t_end: float
    greedy: GreedyConfig
    reduced_mode: str
    reduced_dt: float
    reduced_t_end: float
    record_stride: float
    raw: dict

    @property
    def N(self) -> int:
        return self.kernel_spec.N


def _get(values, key, cast):
    try:
        return cast(values[key])
    except (KeyError, TypeError):
        raise ValidationError(f"missing config key {key!r}") from None
    except ValueError as exc:
        raise ValidationError(f"bad value for {key!r}: {exc}") from None


def resolve_config(values: dict[str, str]) -> RunConfig:
    """Validate and materialize a RunConfig from flat string settings."""
    for key in REQUIRED:
        if key not in values:
            raise ValidationError(f"missing required config key {key!r}")
    merged = {**DEFAULTS, **values}

    N = _get(merged, "system.N", int)
    form = merged["kernel.form"]
    if form == "brownian":
        spec = KernelSpec(form="brownian", N=N, a=_get(merged, "kernel.a", float))
    elif form == "generalized":
        spec = KernelSpec(
            form="generalized",
            N=N,
            nu=_get(merged, "kernel.nu", float),
            mu=_get(merged, "kernel.mu", float),
            c=_get(merged, "kernel.c", float),
        )
    else:
        raise ValidationError(f"unknown kernel.form {form!r}")

    kind = merged["source.kind"]
    if kind == "monomer":
        J = np.zeros(N)
        J[0] = _get(merged, "source.j0", float)
    elif kind == "file":
        J = read_vector(_get(merged, "source.path", str))
        if J.shape[0] != N:
            raise ValidationError(f"source file length {J.shape[0]} != N={N}")
    else:
        raise ValidationError(f"unknown source.kind {kind!r}")
    if np.any(J < 0):
        raise ValidationError("source vector must be non-negative")

    n0_kind = merged["system.n0"]
    if n0_kind == "zero":
        n0 = np.zeros(N)
    elif n0_kind == "file":
        n0 = read_vector(_get(merged, "system.n0_path", str))
        if n0.shape[0] != N:
            raise ValidationError(f"n0 file length {n0.shape[0]} != N={N}")
    else:
        raise ValidationError(f"unknown system.n0 {n0_kind!r}")

    dt = _get(merged, "integrator.dt", float)
    t_end = _get(merged, "integrator.t_end", float)
    snapshot_tol = None
    if "greedy.snapshot_tol" in merged:
        snapshot_tol = _get(merged, "greedy.snapshot_tol", float)
    greedy = GreedyConfig(
        tau=_get(merged, "greedy.tau", float),
        m=_get(merged, "greedy.m", int),
        eps=_get(merged, "greedy.eps", float),
        eps_prime=_get(merged, "greedy.eps_prime", float),
        sv_tol=_get(merged, "greedy.delta", float),
        max_windows=_get(merged, "greedy.max_windows", int),
        snapshot_sv_tol=snapshot_tol,
    )

    mode = merged["reduced.mode"]
    if mode not in ("re-solve", "continuation"):
        raise ValidationError(f"reduced.mode must be re-solve or continuation, got {mode!r}")

    return RunConfig(
        kernel_spec=spec,
        source=J,
        n0=n0,
        dt=dt,
        t_end=t_end,
        greedy=greedy,
        reduced_mode=mode,
        reduced_dt=float(merged.get("reduced.dt", dt)),
        reduced_t_end=float(merged.get("reduced.t_end", t_end)),
        record_stride=_get(merged, "output.record_stride", float),
        raw=dict(merged),
    )
