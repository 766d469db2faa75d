"""Galerkin-reduced aggregation model.

The truncated system can be written as dn_k/dt = J_k + sum_ij S_ijk n_i n_j
with the structural tensor

    S_ijk = 1/2 * (delta_{i+j,k} - delta_{i,k} - delta_{j,k}) * C_ij.

Projecting onto an orthonormal basis V (n ~ V x) gives an R-dimensional
quadratic ODE

    dx_a/dt = Jr_a + sum_{b,g} Sr_{a b g} x_b x_g,

where Jr = V^T J and Sr contracts the state indices (i, j) of S with
the second and third axes and the mass index k with the first:

    Sr_{a b g} = sum_{ijk} S_ijk V_{k a} V_{i b} V_{j g}.

With this layout Sr is symmetric in its last two indices and the
reduced RHS agrees exactly with V^T applied to the full RHS whenever
n = V x.  ``build_reduced_tensor`` assembles Sr without ever forming S,
using the kernel's separable factors and FFT convolutions; the dense
tensor is kept only as a small-N oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .integrator import IntegratorConfig, Trajectory, integrate
from .kernel import KernelSpec, LowRankKernel, dense_kernel
from .validation import ValidationError, check_matrix, check_vector

DENSE_TENSOR_CAP = 64


def dense_tensor(spec: KernelSpec) -> np.ndarray:
    """Explicit N x N x N structural tensor; oracle, N <= 64 only."""
    if spec.N > DENSE_TENSOR_CAP:
        raise ValidationError(
            f"dense tensor refused for N={spec.N} > cap {DENSE_TENSOR_CAP}"
        )
    N = spec.N
    C = dense_kernel(spec)
    S = np.zeros((N, N, N))
    for i in range(N):
        for j in range(N):
            half_c = 0.5 * C[i, j]
            k = i + j + 1  # mass (i+1) + (j+1) at offset i + j + 1
            if k < N:
                S[i, j, k] += half_c
            S[i, j, i] -= half_c
            S[i, j, j] -= half_c
    return S


def project_source(V: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Reduced source Jr = V^T J."""
    V = check_matrix(V, name="basis")
    J = check_vector(J, V.shape[0], "source")
    return V.T @ J


def build_reduced_tensor(K: LowRankKernel, V: np.ndarray) -> np.ndarray:
    """Assemble the reduced tensor Sr in O(R_K R^2 N log N + R^3 N).

    Gain part: for each factor pair (u, v) and each column pair (b, g),
    the coefficient of x_b x_g in dn_k/dt is half the linear convolution
    of u*V[:, b] with v*V[:, g], restricted to masses <= N; contracting
    that with V gives the first axis.  Loss part: the delta_{i,k} and
    delta_{j,k} terms collapse to products of R x R Gram-like matrices
    with projected factor vectors.
    """
    V = check_matrix(V, rows=K.N, name="basis")
    N, R = V.shape
    if R == 0:
        return np.zeros((0, 0, 0))
    pad = 1 << int(np.ceil(np.log2(2 * N)))

    Sr = np.zeros((R, R, R))
    FU = [np.fft.rfft(u[:, None] * V, n=pad, axis=0) for u, _ in K.factors]
    FV = [np.fft.rfft(v[:, None] * V, n=pad, axis=0) for _, v in K.factors]

    gain_cols = np.zeros((N, R))
    for g in range(R):
        spec = np.zeros((pad // 2 + 1, R), dtype=np.complex128)
        for FUp, FVp in zip(FU, FV):
            spec += FUp * FVp[:, g : g + 1]
        conv = np.fft.irfft(spec, n=pad, axis=0)
        gain_cols[0, :] = 0.0
        gain_cols[1:, :] = conv[: N - 1, :]  # conv row s <-> mass s + 2
        Sr[:, :, g] = 0.5 * (V.T @ gain_cols)

    for u, v in K.factors:
        Gu = V.T @ (u[:, None] * V)
        Gv = V.T @ (v[:, None] * V)
        uV = u @ V
        vV = v @ V
        Sr -= 0.5 * Gu[:, :, None] * vV[None, None, :]
        Sr -= 0.5 * Gv[:, None, :] * uV[None, :, None]

    # exact symmetry in the contracted indices, inherited from C_ij = C_ji
    return 0.5 * (Sr + Sr.transpose(0, 2, 1))


@dataclass
class ReducedSystem:
    """Projected source and tensor defining the reduced quadratic ODE."""

    J_red: np.ndarray
    S_red: np.ndarray
    basis: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.J_red = check_vector(self.J_red, name="reduced source")
        R = self.J_red.shape[0]
        self.S_red = np.asarray(self.S_red, dtype=np.float64)
        if self.S_red.shape != (R, R, R):
            raise ValidationError(
                f"reduced tensor shape {self.S_red.shape} incompatible with R={R}"
            )
        # flattened view used by the hot RHS path
        self._S_flat = np.ascontiguousarray(self.S_red.reshape(R * R, R))

    @property
    def R(self) -> int:
        return self.J_red.shape[0]

    def rhs(self, x: np.ndarray) -> np.ndarray:
        R = self.R
        quad = (self._S_flat @ x).reshape(R, R) @ x
        return self.J_red + quad


def build_reduced_system(K: LowRankKernel, V: np.ndarray, J: np.ndarray,
                         meta: dict | None = None) -> ReducedSystem:
    """Project source and dynamics onto the basis V."""
    return ReducedSystem(
        J_red=project_source(V, J),
        S_red=build_reduced_tensor(K, V),
        basis=check_matrix(V, name="basis"),
        meta=dict(meta or {}),
    )


def rhs_reduced(sys: ReducedSystem, x: np.ndarray) -> np.ndarray:
    """Reduced RHS f_a = Jr_a + sum_{b,g} Sr_{a b g} x_b x_g; O(R^3)."""
    x = check_vector(x, sys.R, "reduced state")
    return sys.rhs(x)


def solve_reduced(sys: ReducedSystem, x0: np.ndarray, cfg: IntegratorConfig,
                  record_times=()) -> Trajectory:
    """Midpoint integration of the reduced system."""
    x0 = check_vector(x0, sys.R, "reduced initial state")
    return integrate(sys.rhs, x0, cfg, record_times)
