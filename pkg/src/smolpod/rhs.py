"""Right-hand side of the truncated aggregation system with a source.

For concentrations n_k (mass k, k = 1..N, stored at offset k - 1):

    dn_k/dt = J_k + 1/2 * sum_{i+j=k} C_ij n_i n_j - n_k sum_j C_jk n_j

``rhs_direct`` evaluates this by explicit summation against a dense
kernel matrix (the O(N^2) test oracle).  ``FastRHS`` evaluates the same
expression in O(R_K * N log N) using the kernel's separable factors:
the gain term becomes a linear convolution of weighted copies of n,
done with zero-padded FFTs, and the loss term collapses to R_K inner
products.

The convolution tail (masses N+1 .. 2N) is not discarded: its
mass-weighted sum is the flux of mass leaving the truncated system,
exposed as ``mass_flux_out``.
"""

from __future__ import annotations

import numpy as np

from .kernel import DENSE_ORACLE_CAP, LowRankKernel
from .validation import ValidationError, check_vector


def rhs_direct(C: np.ndarray, J: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Brute-force O(N^2) evaluation against the dense kernel matrix."""
    N = C.shape[0]
    if C.shape != (N, N):
        raise ValidationError(f"kernel matrix must be square, got {C.shape}")
    if N > DENSE_ORACLE_CAP:
        raise ValidationError(f"rhs_direct refused for N={N} > cap {DENSE_ORACLE_CAP}")
    J = check_vector(J, N, "source")
    n = check_vector(n, N, "state")

    loss = n * (C @ n)
    gain = np.zeros(N)
    # pair (i, j): product mass i + j lands at offset i + j - 1
    for i in range(1, N + 1):
        jmax = N - i
        if jmax >= 1:
            gain[i:] += 0.5 * n[i - 1] * C[i - 1, :jmax] * n[:jmax]
    return J + gain - loss


def moment(n: np.ndarray, order: int) -> float:
    """k-th order moment sum_k k**order * n_k; order 1 is total mass."""
    if not (0 <= order <= 3):
        raise ValidationError(f"moment order must be in 0..3, got {order}")
    n = check_vector(n, name="state")
    k = np.arange(1, n.shape[0] + 1, dtype=np.float64)
    return float(np.dot(k**order, n))


class FastRHS:
    """Fast convolution-based RHS evaluator for a fixed kernel and source.

    The instance owns the padded-FFT workspace sizes and the per-kernel
    bookkeeping (which factor vectors coincide), so repeated calls on
    the same system reuse them.  Evaluation itself is pure: calling with
    the same state always returns the identical array.
    """

    def __init__(self, kernel: LowRankKernel, J: np.ndarray):
        self.kernel = kernel
        self.N = kernel.N
        self.J = check_vector(J, self.N, "source")
        if np.any(self.J < 0):
            raise ValidationError("source vector must be non-negative")
        # exact linear convolution needs length >= 2N - 1; round up to a
        # power of two for transform speed
        self.pad = 1 << int(np.ceil(np.log2(2 * self.N)))

        # Deduplicate factor vectors so each distinct weighted copy of n
        # is transformed once (the brownian kernel shares both vectors
        # between its two pairs).
        vecs: list[np.ndarray] = []
        pairs = []
        for u, v in kernel.factors:
            pairs.append((self._vec_index(vecs, u), self._vec_index(vecs, v)))
        self._vecs = vecs
        self._pairs = pairs
        self._last_flux = 0.0
        self._masses_tail = np.arange(self.N + 1, 2 * self.N + 1, dtype=np.float64)

    @staticmethod
    def _vec_index(vecs, w):
        for idx, seen in enumerate(vecs):
            if seen is w or np.array_equal(seen, w):
                return idx
        vecs.append(w)
        return len(vecs) - 1

    def _gain_spectrum(self, n):
        F = [np.fft.rfft(w * n, self.pad) for w in self._vecs]
        spec = np.zeros(self.pad // 2 + 1, dtype=np.complex128)
        for iu, iv in self._pairs:
            spec += F[iu] * F[iv]
        return np.fft.irfft(spec, self.pad)

    def _loss(self, n):
        loss = np.zeros(self.N)
        for u, v in self.kernel.factors:
            loss += v * np.dot(u, n)
        return n * loss

    def __call__(self, n: np.ndarray) -> np.ndarray:
        return self.rhs_and_flux(n)[0]

    @property
    def last_flux(self) -> float:
        """Outgoing mass flux of the most recent evaluation.

        The flux falls out of the same convolution as the RHS, so it is
        stashed on every call; integration drivers read it after a step
        to account mass without re-evaluating.
        """
        return self._last_flux

    def rhs_and_flux(self, n: np.ndarray) -> tuple[np.ndarray, float]:
        """Evaluate the RHS and the outgoing mass flux in one pass.

        Both come from the same convolution: entries for masses 2..N
        form the gain term, the tail (masses N+1..2N) carries the mass
        leaving the truncated system.
        """
        n = check_vector(n, self.N, "state")
        N = self.N
        conv = self._gain_spectrum(n)
        # conv[s] = sum over i + j = s + 2 of weighted products
        f = self.J.copy()
        f[1:] += 0.5 * conv[: N - 1]
        f -= self._loss(n)
        flux = 0.5 * float(np.dot(self._masses_tail, conv[N - 1 : 2 * N - 1]))
        self._last_flux = flux
        return f, flux


def rhs_fast(K: LowRankKernel, J: np.ndarray, n: np.ndarray) -> np.ndarray:
    """One-shot fast RHS evaluation (constructs a FastRHS internally)."""
    return FastRHS(K, J)(n)


def mass_flux_out(K: LowRankKernel, n: np.ndarray) -> float:
    """Rate of mass lost to aggregates heavier than N:

    Phi = 1/2 * sum_{i,j<=N, i+j>N} (i+j) C_ij n_i n_j
    """
    evaluator = FastRHS(K, np.zeros(K.N))
    return evaluator.rhs_and_flux(n)[1]
