"""Coagulation kernels and their separable low-rank factorizations.

Supported kernel families:

* ``brownian(a)``:    C_ij = i**a * j**(-a) + i**(-a) * j**a
* ``generalized(nu, mu, c)``: C_ij = i**nu * j**mu + i**mu * j**nu + c

Both are symmetric and separable: C_ij = sum_p u_i^(p) v_j^(p) with a
small number of rank-1 factor pairs (2 for brownian, 3 for generalized).
The factorization is what makes the O(N log N) convolution-based
right-hand side and the fast reduced-tensor build possible.

Indexing convention: particle mass k runs from 1 to N, stored at array
offset k - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import ValidationError

#: Largest N for which dense N x N kernel matrices may be materialized.
DENSE_ORACLE_CAP = 4096


@dataclass(frozen=True)
class KernelSpec:
    """Symbolic description of a coagulation kernel.

    Parameters
    ----------
    form : {"brownian", "generalized"}
    N : int
        Truncation size of the system (masses 1..N).
    a : float
        Exponent of the brownian form (ignored for generalized).
    nu, mu, c : float
        Parameters of the generalized form (ignored for brownian).
    """

    form: str
    N: int
    a: float = 0.0
    nu: float = 0.0
    mu: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.form not in ("brownian", "generalized"):
            raise ValidationError(f"unknown kernel form {self.form!r}")
        if self.N < 2:
            raise ValidationError(f"kernel needs N >= 2, got N={self.N}")
        params = (self.a,) if self.form == "brownian" else (self.nu, self.mu, self.c)
        if not all(np.isfinite(p) for p in params):
            raise ValidationError("kernel exponents must be finite")
        if self.form == "generalized" and self.c < 0:
            raise ValidationError(f"constant term must be non-negative, got c={self.c}")


@dataclass(frozen=True)
class LowRankKernel:
    """Separable factorization C_ij = sum_p u_i^(p) v_j^(p).

    ``factors`` is an ordered list of (u, v) pairs of length-N vectors.
    """

    N: int
    factors: tuple = field(default_factory=tuple)

    @property
    def rank(self) -> int:
        return len(self.factors)


def _mass_powers(N: int, exponent: float) -> np.ndarray:
    """Vector (1**e, 2**e, ..., N**e) via exp(e * log k); k=1 set exactly."""
    k = np.arange(1, N + 1, dtype=np.float64)
    out = np.exp(exponent * np.log(k))
    out[0] = 1.0
    return out


def build_kernel(spec: KernelSpec) -> LowRankKernel:
    """Precompute the separable factor pairs of the kernel."""
    N = spec.N
    if spec.form == "brownian":
        w_pos = _mass_powers(N, spec.a)
        w_neg = _mass_powers(N, -spec.a)
        factors = ((w_pos, w_neg), (w_neg, w_pos))
    else:
        w_nu = _mass_powers(N, spec.nu)
        w_mu = _mass_powers(N, spec.mu)
        sqrt_c = np.full(N, np.sqrt(spec.c))
        factors = ((w_nu, w_mu), (w_mu, w_nu), (sqrt_c, sqrt_c.copy()))
    for u, v in factors:
        u.setflags(write=False)
        v.setflags(write=False)
    return LowRankKernel(N=N, factors=factors)


def kernel_entry(spec: KernelSpec, i: int, j: int) -> float:
    """Closed-form kernel entry C_ij for masses 1 <= i, j <= N."""
    if not (1 <= i <= spec.N and 1 <= j <= spec.N):
        raise IndexError(f"kernel index ({i}, {j}) out of range 1..{spec.N}")
    fi, fj = float(i), float(j)
    if spec.form == "brownian":
        return fi**spec.a * fj**-spec.a + fi**-spec.a * fj**spec.a
    return fi**spec.nu * fj**spec.mu + fi**spec.mu * fj**spec.nu + spec.c


def dense_kernel(spec: KernelSpec) -> np.ndarray:
    """Full N x N kernel matrix; test oracle, refuses large N."""
    if spec.N > DENSE_ORACLE_CAP:
        raise ValidationError(
            f"dense kernel refused for N={spec.N} > cap {DENSE_ORACLE_CAP}"
        )
    K = build_kernel(spec)
    C = np.zeros((spec.N, spec.N))
    for u, v in K.factors:
        C += np.outer(u, v)
    return C
