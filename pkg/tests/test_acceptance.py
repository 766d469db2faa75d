"""End-to-end acceptance suite.

Each test prints a single ``[PASS]``/``[FAIL]`` line for its criterion.
The desk-scale pipeline fixtures (N = 2048) are module-scoped because they
take minutes; everything downstream of the greedy run reuses them.
"""

import time

import numpy as np
import pytest

from smolpod import (
    FastRHS,
    IntegratorConfig,
    KernelSpec,
    Trajectory,
    build_kernel,
    build_reduced_system,
    build_reduced_tensor,
    dense_kernel,
    dense_tensor,
    integrate,
    moment,
    rhs_direct,
    rhs_fast,
    rhs_reduced,
)
from smolpod.pipeline import (
    build_reduced,
    compare_trajectories,
    run_greedy,
    solve_full,
    solve_reduced_traj,
)
from smolpod.runconfig import resolve_config


def check(num, desc, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {desc}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def desk_config(a=0.8, **extra):
    values = {
        "system.N": "2048",
        "kernel.a": str(a),
        "integrator.dt": str(2.0**-10),
        "integrator.t_end": "64",
        "greedy.tau": "2",
        "greedy.m": "65",
        "greedy.eps": "1e-13",
        "greedy.eps_prime": "1e-10",
        "greedy.delta": "1e-13",
        "greedy.max_windows": "128",
    }
    values.update(extra)
    return resolve_config(values)


def random_orthonormal(N, R, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((N, R)))
    return Q


@pytest.fixture(scope="module")
def desk_greedy():
    return run_greedy(desk_config())


@pytest.fixture(scope="module")
def desk_full(desk_greedy):
    cfg = desk_config()
    return solve_full(cfg, t_end=2.0 * desk_greedy.t_basis)


@pytest.fixture(scope="module")
def desk_compare(desk_greedy, desk_full):
    cfg = desk_config()
    V = desk_greedy.basis
    sys_red = build_reduced(cfg, V, t_basis=desk_greedy.t_basis)
    x0 = V.T @ cfg.n0  # re-solve mode: start the reduced system from t = 0
    red = solve_reduced_traj(cfg, sys_red, x0, 0.0, 2.0 * desk_greedy.t_basis)
    recon = Trajectory(times=red.times, states=red.states @ V.T)
    return compare_trajectories(desk_full.trajectory, recon,
                                t_split=desk_greedy.t_basis)


def test_criterion_01_fast_rhs_matches_direct_oracle():
    worst = 0.0
    for N in (256, 1024, 4096):
        for a in (0.2, 0.6, 0.8):
            spec = KernelSpec("brownian", N=N, a=a)
            K = build_kernel(spec)
            C = dense_kernel(spec)
            J = np.zeros(N)
            J[0] = 1.0
            rng = np.random.default_rng(hash((N, int(a * 10))) % 2**32)
            for _ in range(10):
                n = rng.random(N)
                ref = rhs_direct(C, J, n)
                got = rhs_fast(K, J, n)
                worst = max(worst, np.linalg.norm(got - ref) / np.linalg.norm(ref))
    check(1, "fast RHS matches direct-summation oracle", worst <= 1e-10,
          f"worst rel err {worst:.3e}")


def test_criterion_02_tensor_form_matches_rhs():
    spec = KernelSpec("brownian", N=16, a=0.7)
    S = dense_tensor(spec)
    C = dense_kernel(spec)
    rng = np.random.default_rng(2)
    J = np.zeros(16)
    J[0] = 1.0
    worst = 0.0
    for _ in range(10):
        n = rng.random(16)
        ref = rhs_direct(C, J, n)
        got = J + np.einsum("ijk,i,j->k", S, n, n)
        scale = max(1.0, float(np.max(np.abs(ref))))
        worst = max(worst, float(np.max(np.abs(got - ref))) / scale)
    check(2, "structural-tensor form reproduces the RHS", worst <= 1e-12,
          f"worst err {worst:.3e}")


def test_criterion_03_reduced_tensor_matches_dense_contraction():
    spec = KernelSpec("brownian", N=64, a=0.6)
    K = build_kernel(spec)
    S = dense_tensor(spec)
    worst = 0.0
    for R in (1, 4, 8):
        V = random_orthonormal(64, R, R)
        fast = build_reduced_tensor(K, V)
        oracle = np.einsum("ijk,ka,ib,jg->abg", S, V, V, V)
        worst = max(worst, np.linalg.norm(fast - oracle) / np.linalg.norm(oracle))
    check(3, "fast reduced tensor matches dense triple contraction",
          worst <= 1e-10, f"worst rel Frobenius err {worst:.3e}")


def test_criterion_04_galerkin_consistency():
    spec = KernelSpec("brownian", N=64, a=0.7)
    K = build_kernel(spec)
    C = dense_kernel(spec)
    V = random_orthonormal(64, 8, 4)
    J = np.zeros(64)
    J[0] = 1.0
    sys_red = build_reduced_system(K, V, J)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(10):
        x = rng.standard_normal(8)
        lhs = rhs_reduced(sys_red, x)
        ref = V.T @ rhs_direct(C, J, V @ x)
        worst = max(worst, np.linalg.norm(lhs - ref) / np.linalg.norm(ref))
    check(4, "reduced RHS equals projected full RHS on the subspace",
          worst <= 1e-10, f"worst rel err {worst:.3e}")


def test_criterion_05_integrator_second_order():
    # global error ratio under dt halving on y' = -y
    def err(dt):
        traj = integrate(lambda y: -y, np.array([1.0]),
                         IntegratorConfig(dt=dt, t0=0.0, t1=1.0))
        return abs(traj.final_state[0] - np.exp(-1.0))

    ratio = err(0.1) / err(0.05)

    # self-convergence on an aggregation run
    spec = KernelSpec("brownian", N=64, a=0.7)
    ev = FastRHS(build_kernel(spec), np.eye(64)[0])
    ends = []
    for dt in (2.0**-5, 2.0**-6, 2.0**-7):
        traj = integrate(ev, np.zeros(64), IntegratorConfig(dt=dt, t0=0.0, t1=1.0))
        ends.append(traj.final_state)
    d1 = np.linalg.norm(ends[0] - ends[1])
    d2 = np.linalg.norm(ends[1] - ends[2])
    order = np.log2(d1 / d2)

    check(5, "midpoint integrator is second order",
          3.5 <= ratio <= 4.5 and order >= 1.9,
          f"error ratio {ratio:.3f}, self-convergence order {order:.3f}")


def test_criterion_06_greedy_terminates_with_decreasing_trace(desk_greedy):
    res = desk_greedy
    errs = np.array([r.projection_error for r in res.trace])
    eps = desk_config().greedy.eps
    starts_at_one = errs[0] == pytest.approx(1.0)
    crosses_eps = res.terminated and errs[-1] <= eps
    before = errs[: max(1, len(errs) // 4)]
    after = errs[-max(1, len(errs) // 4):]
    decreasing = float(np.median(after)) < 1e-3 * float(np.median(before))

    sizes = {0.8: res.basis_size}
    for a in (0.6, 0.7):
        sizes[a] = run_greedy(desk_config(a=a)).basis_size
    ordered = sizes[0.6] > sizes[0.7] > sizes[0.8]

    check(6, "greedy terminates via the projection-error threshold, trace "
             "decreases from 1, basis grows for smaller exponents",
          starts_at_one and crosses_eps and decreasing and ordered,
          f"R={res.basis_size}, t_basis={res.t_basis}, sizes={sizes}, "
          f"final err {errs[-1]:.3e}")


def test_criterion_07_interpolation_extrapolation_split(desk_compare):
    s = desk_compare.summary()
    interp, extrap = s["interpolation_max"], s["extrapolation_max"]
    check(7, "reconstruction error small in training window, bounded and "
             "larger beyond it",
          interp <= 1e-6 and extrap <= 1e-1 and extrap > interp,
          f"interp max {interp:.3e}, extrap max {extrap:.3e}")


def test_criterion_08_reduced_cost_independent_of_full_dimension():
    R = 50
    times = {}
    for N in (4096, 16384):
        spec = KernelSpec("brownian", N=N, a=0.8)
        K = build_kernel(spec)
        V = random_orthonormal(N, R, N)
        J = np.zeros(N)
        J[0] = 1.0
        sys_red = build_reduced_system(K, V, J)
        x = np.random.default_rng(8).standard_normal(R)
        best = np.inf
        for _ in range(7):
            tic = time.perf_counter()
            for _ in range(2000):
                sys_red.rhs(x)
            best = min(best, time.perf_counter() - tic)
        times[N] = best
    ratio = max(times.values()) / min(times.values())
    check(8, "reduced RHS wall time is independent of the full dimension",
          ratio < 2.0, f"per-2000-call times {times}, ratio {ratio:.3f}")


def test_criterion_09_orthonormality_and_merge_residuals(desk_greedy):
    delta = desk_config().greedy.sv_tol
    defects = [r.ortho_defect for r in desk_greedy.trace]
    residuals = [r.merge_residual for r in desk_greedy.trace if r.merged]
    ok = max(defects) <= 1e-12 and max(residuals) <= delta + 1e-12
    check(9, "bases stay orthonormal and merges retain their inputs",
          ok, f"max defect {max(defects):.3e}, max merge residual "
              f"{max(residuals):.3e}")


def test_criterion_10_mass_balance(desk_full):
    cfg = desk_config()
    ev = FastRHS(build_kernel(cfg.kernel_spec), cfg.source)
    j_mass = moment(cfg.source, 1)
    worst = 0.0
    for y in desk_full.trajectory.states[::16]:
        f, flux = ev.rhs_and_flux(y)
        lhs = moment(f, 1)
        rhs = j_mass - flux
        scale = max(1.0, abs(j_mass) + abs(flux))
        worst = max(worst, abs(lhs - rhs) / scale)
    ledger = desk_full.max_mass_residual
    check(10, "mass identity holds per RHS call and along the trajectory",
          worst <= 1e-10 and ledger <= 1e-6,
          f"per-call {worst:.3e}, trajectory ledger {ledger:.3e}")
