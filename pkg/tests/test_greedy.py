import numpy as np
import pytest

from smolpod import GreedyConfig, GreedyPODBasis, ValidationError, build_basis, window_snapshots


def small_cfg(**kw):
    base = dict(tau=1.0, m=5, eps=1e-13, eps_prime=1e-10, sv_tol=1e-13, max_windows=8)
    base.update(kw)
    return GreedyConfig(**base)


def test_config_threshold_ordering():
    with pytest.raises(ValidationError):
        small_cfg(eps=1e-8, eps_prime=1e-10)
    with pytest.raises(ValidationError):
        small_cfg(m=1)


def test_snapshot_tol_defaults_to_sqrt():
    cfg = small_cfg(sv_tol=1e-12)
    assert cfg.snapshot_tol == pytest.approx(1e-6)
    cfg = small_cfg(snapshot_sv_tol=1e-4)
    assert cfg.snapshot_tol == 1e-4


def test_window_snapshots_endpoints_for_m2():
    cfg = small_cfg(m=2)
    f = lambda y: np.zeros_like(y)
    y0 = np.array([1.0, 2.0])
    snaps, y_end = window_snapshots(f, y0, 1, cfg, 0.25)
    assert snaps.shape == (2, 2)
    assert np.array_equal(snaps[:, 0], y0)
    assert np.array_equal(snaps[:, -1], y_end)


def test_window_snapshots_match_analytic_exponentials():
    lam = np.array([-1.0, -2.0])
    f = lambda y: lam * y
    cfg = small_cfg(m=5, tau=1.0)
    y0 = np.array([1.0, 1.0])
    dt = 2.0**-10
    snaps, _ = window_snapshots(f, y0, 1, cfg, dt)
    times = np.linspace(0.0, 1.0, 5)
    exact = np.exp(np.outer(lam, times))
    assert np.max(np.abs(snaps - exact)) <= 1e-6  # second-order accurate


def test_window_grid_mismatch_rejected():
    cfg = small_cfg(m=4)  # spacing 1/3 incompatible with dt = 1/4
    with pytest.raises(ValidationError):
        window_snapshots(lambda y: y, np.ones(2), 1, cfg, 0.25)


def test_first_window_always_merges():
    f = lambda y: -y + np.array([1.0, 0.0, 0.0])
    res = build_basis(f, np.zeros(3), small_cfg(max_windows=1), 0.125)
    assert len(res.trace) == 1
    assert res.trace[0].merged
    assert res.trace[0].projection_error == pytest.approx(1.0)


def test_one_dimensional_dynamics_terminate_quickly():
    # trajectory confined to span{e1}: y' = -y * |y| along the first axis
    def f(y):
        out = np.zeros_like(y)
        out[0] = -y[0] * abs(y[0])
        return out

    y0 = np.array([1.0, 0.0, 0.0, 0.0])
    res = build_basis(f, y0, small_cfg(max_windows=8), 0.0625)
    assert res.terminated
    assert res.basis.shape[1] == 1
    assert len(res.trace) == 2  # window 2's basis lies in window 1's span


def test_epsilon_above_one_terminates_immediately_with_empty_basis():
    f = lambda y: -y
    cfg = small_cfg(eps=1.5, eps_prime=2.0)
    res = build_basis(f, np.array([1.0, 0.5]), cfg, 0.125)
    assert res.terminated
    assert res.basis.shape[1] == 0
    assert res.t_basis == cfg.tau


def test_max_windows_cap_returns_not_terminated():
    # 40-dim state cannot be spanned by 3 windows of 5 snapshots each
    rng = np.random.default_rng(0)
    A = rng.standard_normal((40, 40)) * 0.5

    def f(y):
        return A @ y + np.ones(40) * 0.1

    res = build_basis(f, np.zeros(40), small_cfg(max_windows=3), 0.125)
    assert not res.terminated
    assert len(res.trace) == 3
    assert res.t_basis == 3.0


def test_trace_invariants():
    rng = np.random.default_rng(1)
    A = -np.eye(5) + 0.1 * rng.standard_normal((5, 5))

    def f(y):
        return A @ y + np.arange(1.0, 6.0) * 0.01

    res = build_basis(f, np.zeros(5), small_cfg(max_windows=6), 0.125)
    sizes = [r.basis_size for r in res.trace]
    assert sizes == sorted(sizes)  # monotone growth
    for r in res.trace:
        assert r.merged == (r.projection_error > 1e-10)
        assert r.ortho_defect <= 1e-12
        if r.merged:
            assert r.merge_residual <= 1e-13 + 1e-12
    assert [r.window for r in res.trace] == list(range(1, len(res.trace) + 1))


def test_estimator_wrapper():
    def f(y):
        out = np.zeros_like(y)
        out[0] = -y[0] * abs(y[0])
        return out

    est = GreedyPODBasis(tau=1.0, m=5, eps=1e-13, eps_prime=1e-10,
                         sv_tol=1e-13, dt=0.0625, max_windows=8)
    est.fit(f, np.array([1.0, 0.0, 0.0]))
    assert est.terminated_
    assert est.basis_.shape == (3, 1)
    X = np.array([[2.0, 0.0, 0.0]])
    assert np.allclose(est.inverse_transform(est.transform(X)), X)
    assert est.get_params()["tau"] == 1.0
