import json

import numpy as np
import pytest

from mfg_newton.fd_scheme import fd_drift
from mfg_newton.grid import GridSpec
from mfg_newton.newton_driver import (
    NewtonConfig,
    NewtonHistory,
    STATUS_BREAKDOWN,
    STATUS_CONVERGED,
    STATUS_MAX_ITERS,
    fixed_point_residual,
    global_newton,
    grid_for,
    initial_guess,
    local_newton,
    merit,
    newton_direction,
    newton_drift,
    rate_fit,
    solve,
)
from mfg_newton.problems import (
    Coupling,
    Hamiltonian,
    MfgProblem,
    builtin_problem,
    sample,
)
from mfg_newton.sl_scheme import mollified_drift


def _history_with_e_m(values):
    h = NewtonHistory()
    h.e_m = list(values)
    h.e_u = list(values)
    return h


class TestRateFit:
    def test_exactly_quadratic_sequence_gives_slope_two(self):
        h = _history_with_e_m([1e-1, 1e-2, 1e-4, 1e-8])
        assert abs(rate_fit(h) - 2.0) < 1e-10

    def test_exactly_linear_contraction_gives_slope_one(self):
        h = _history_with_e_m([1.0, 0.5, 0.25, 0.125, 0.0625])
        assert abs(rate_fit(h) - 1.0) < 1e-10

    def test_u_field_selectable(self):
        h = NewtonHistory()
        h.e_m = [1.0, 0.5, 0.25]
        h.e_u = [1e-1, 1e-2, 1e-4]
        assert abs(rate_fit(h, "u") - 2.0) < 1e-10
        assert abs(rate_fit(h, "m") - 1.0) < 1e-10

    def test_constant_sequence_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            rate_fit(_history_with_e_m([1.0, 1.0, 1.0]))

    def test_too_few_points_raises(self):
        with pytest.raises(ValueError, match="3 iterations"):
            rate_fit(_history_with_e_m([1.0, 0.5]))

    def test_zero_errors_are_dropped(self):
        with pytest.raises(ValueError, match="positive"):
            rate_fit(_history_with_e_m([1.0, 0.0, 0.0, 0.0]))


def _linear_problem(nu=0.3):
    """H identically zero and no coupling: both residuals are linear maps."""
    ham = Hamiltonian(kind="separable_quadratic", quad_coeff=0.0)
    coup = Coupling(
        f=lambda m, x=None: np.zeros_like(m),
        f_prime=lambda m, x=None: np.zeros_like(m),
        monotone=False,
        label="zero",
    )
    return MfgProblem(
        dim=1,
        horizon=0.5,
        nu=nu,
        hamiltonian=ham,
        coupling=coup,
        m0=lambda x: np.zeros(x.shape[0]),
        terminal_g=lambda x: np.zeros(x.shape[0]),
        label="linear-test",
    )


class TestMerit:
    def test_zero_fields_of_zero_problem_give_zero(self):
        p = _linear_problem()
        g = GridSpec(1, 16, 4, p.horizon)
        z = np.zeros((g.n_time + 1, g.n_nodes))
        assert merit(z, z, p, g) == 0.0

    def test_doubling_fields_quadruples_merit_when_residual_is_linear(self):
        p = _linear_problem()
        g = GridSpec(1, 16, 4, p.horizon)
        rng = np.random.default_rng(7)
        u = rng.standard_normal((g.n_time + 1, g.n_nodes))
        m = rng.standard_normal((g.n_time + 1, g.n_nodes))
        base = merit(u, m, p, g)
        assert base > 0
        assert merit(2 * u, 2 * m, p, g) == pytest.approx(4 * base, rel=1e-12)

    def test_terminal_mismatch_contributes_exactly(self):
        p = _linear_problem(nu=0.2)
        g = GridSpec(1, 8, 5, p.horizon)
        a = 0.37
        u = np.zeros((g.n_time + 1, g.n_nodes))
        u[g.n_time] = a
        m = np.zeros_like(u)
        # interior: only r_HJB at k = nt-1 is nonzero, equal to -a/dt at
        # every node (the Laplacian of a constant level vanishes)
        dt = g.dt
        expected = 0.5 * (
            g.n_nodes * (a / dt) ** 2 * g.h * dt + g.n_nodes * a**2 * g.h
        )
        assert merit(u, m, p, g) == pytest.approx(expected, rel=1e-12)

    def test_broadcast_guess_has_no_boundary_penalty(self):
        p = builtin_problem("test2a")
        g = GridSpec(1, 32, 6, p.horizon)
        u, m = initial_guess(p, g)
        th = merit(u, m, p, g)
        u2 = u.copy()
        u2[g.n_time] += 1.0
        assert merit(u2, m, p, g) > th


class TestInitialGuess:
    def test_broadcast_on_test1_gives_zero_u_and_tiled_m0(self):
        p = builtin_problem("test1")
        g = GridSpec(1, 40, 10, p.horizon)
        u, m = initial_guess(p, g)
        assert np.all(u == 0.0)
        m0 = sample(p.m0, g)
        assert np.array_equal(m, np.tile(m0, (11, 1)))

    def test_zero_u_keeps_terminal_data(self):
        p = builtin_problem("test2a")
        g = GridSpec(1, 32, 5, p.horizon)
        u, m = initial_guess(p, g, "zero_u")
        assert np.all(u[:-1] == 0.0)
        assert np.array_equal(u[-1], sample(p.terminal_g, g))

    def test_uniform_m_pins_initial_level(self):
        p = builtin_problem("test2a")
        g = GridSpec(1, 32, 5, p.horizon)
        u, m = initial_guess(p, g, "uniform_m")
        assert np.all(m[1:] == 1.0)
        assert np.array_equal(m[0], sample(p.m0, g))

    def test_unknown_option_rejected(self):
        p = builtin_problem("test2a")
        g = GridSpec(1, 8, 2, p.horizon)
        with pytest.raises(ValueError, match="unknown init"):
            initial_guess(p, g, "bogus")


class TestConfig:
    def test_dt_policy_defaults_to_scheme(self):
        assert NewtonConfig(scheme="sl").dt_policy == "sl"
        assert NewtonConfig(scheme="fd").dt_policy == "fd"

    def test_grid_for_reproduces_benchmark_level_counts(self):
        p = builtin_problem("test1")
        assert grid_for(p, 40, NewtonConfig(scheme="sl")).n_time == 25
        assert grid_for(p, 80, NewtonConfig(scheme="sl")).n_time == 72
        assert grid_for(p, 40, NewtonConfig(scheme="fd")).n_time == 8
        assert grid_for(p, 160, NewtonConfig(scheme="fd")).n_time == 32

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"tolerance": 0.0},
            {"beta": 1.0},
            {"c": 0.5},
            {"scheme": "spectral"},
            {"globalization": "sometimes"},
            {"init": "warm"},
        ],
    )
    def test_invalid_config_rejected(self, kwargs):
        with pytest.raises(ValueError):
            NewtonConfig(**kwargs)


class TestDrift:
    def test_sl_drift_is_mapped_mollified_gradient(self):
        p = builtin_problem("test2a")
        g = GridSpec(1, 64, 4, p.horizon)
        rng = np.random.default_rng(3)
        u = rng.standard_normal((5, 64))
        m = np.abs(rng.standard_normal((5, 64))) + 0.5
        cfg = NewtonConfig(scheme="sl")
        q = newton_drift(u, m, p, g, cfg)
        x = g.nodes()
        pgrad = mollified_drift(u[:-1], eps=2.0 * g.h, grid=g)
        expected = np.stack(
            [p.hamiltonian.grad_p(x, m[k], pgrad[k]) for k in range(4)]
        )
        assert np.allclose(q, expected, atol=1e-14)
        assert q.shape == (4, 1, 64)

    def test_fd_drift_drops_terminal_level(self):
        p = builtin_problem("test2a")
        g = GridSpec(1, 32, 3, p.horizon)
        rng = np.random.default_rng(4)
        u = rng.standard_normal((4, 32))
        m = np.ones((4, 32))
        cfg = NewtonConfig(scheme="fd")
        q = newton_drift(u, m, p, g, cfg)
        assert np.allclose(q, fd_drift(u, g)[:3], atol=1e-14)


class TestLocalNewton:
    def test_converges_on_mild_problem_and_satisfies_status_invariant(self):
        p = builtin_problem("test2a")
        cfg = NewtonConfig(scheme="sl")
        g = grid_for(p, 32, cfg)
        u, m, hist = local_newton(p, g, cfg)
        assert hist.status == STATUS_CONVERGED
        assert hist.e_u[-1] < cfg.tolerance
        assert hist.e_m[-1] < cfg.tolerance
        assert len(hist.e_u) == hist.iterations
        assert all(w >= 0 for w in hist.wall_time)

    def test_max_iters_status(self):
        p = builtin_problem("test2a")
        cfg = NewtonConfig(scheme="sl", max_newton_iters=2, tolerance=1e-300)
        g = grid_for(p, 32, cfg)
        _, _, hist = local_newton(p, g, cfg)
        assert hist.status == STATUS_MAX_ITERS
        assert hist.iterations == 2

    def test_mass_conserved_along_iterates(self):
        p = builtin_problem("test2a")
        cfg = NewtonConfig(scheme="fd")
        g = grid_for(p, 64, cfg)
        _, _, hist = local_newton(p, g, cfg)
        assert hist.status == STATUS_CONVERGED
        assert max(hist.mass_drift) < 1e-8

    def test_low_viscosity_fd_reports_breakdown(self):
        p = builtin_problem("test2b")
        cfg = NewtonConfig(scheme="fd")
        g = grid_for(p, 160, cfg)
        _, _, hist = local_newton(p, g, cfg)
        assert hist.status == STATUS_BREAKDOWN
        assert hist.iterations <= 10
        assert min(hist.min_density) < -cfg.breakdown_tol

    def test_negative_transient_heals_without_breakdown(self):
        p = builtin_problem("test4")
        cfg = NewtonConfig(scheme="sl")
        g = grid_for(p, 8, cfg)
        _, m, hist = local_newton(p, g, cfg)
        assert hist.status == STATUS_CONVERGED
        assert hist.min_density[0] < -1.0
        assert m.min() >= -cfg.breakdown_tol

    def test_fixed_point_residual_small_after_convergence(self):
        p = builtin_problem("test2a")
        cfg = NewtonConfig(scheme="sl")
        g = grid_for(p, 32, cfg)
        u, m, hist = local_newton(p, g, cfg)
        assert fixed_point_residual(u, m, p, g, cfg) < 10 * cfg.tolerance

    def test_refeeding_converged_pair_moves_less_than_delta(self):
        p = builtin_problem("test2a")
        cfg = NewtonConfig(scheme="fd")
        g = grid_for(p, 32, cfg)
        u, m, hist = local_newton(p, g, cfg)
        u2, m2, _, _ = newton_direction(u, m, p, g, cfg)
        assert float(np.abs(u2 - u).max()) < cfg.gs_delta
        assert float(np.abs(m2 - m).max()) < cfg.gs_delta

    def test_history_serializes_to_json(self):
        p = builtin_problem("test2a")
        cfg = NewtonConfig(scheme="sl")
        g = grid_for(p, 32, cfg)
        _, _, hist = local_newton(p, g, cfg)
        payload = json.dumps(hist.to_dict())
        assert json.loads(payload)["status"] == "converged"


class TestGlobalNewton:
    def test_trajectory_matches_local_when_full_steps_accepted(self):
        p = builtin_problem("test2a")
        cfg = NewtonConfig(scheme="fd", globalization="always")
        g = grid_for(p, 32, cfg)
        u_g, m_g, hist_g = global_newton(p, g, cfg)
        u_l, m_l, hist_l = local_newton(p, g, NewtonConfig(scheme="fd"))
        assert hist_g.status == STATUS_CONVERGED
        assert all(a == 1.0 for a in hist_g.alpha)
        assert hist_g.iterations == hist_l.iterations
        assert np.allclose(u_g, u_l, atol=1e-12)
        assert np.allclose(m_g, m_l, atol=1e-12)

    def test_armijo_inequality_holds_on_every_accepted_step(self):
        p = builtin_problem("test2b")
        cfg = NewtonConfig(scheme="fd", globalization="always")
        g = grid_for(p, 160, cfg)
        _, _, hist = global_newton(p, g, cfg)
        assert hist.status == STATUS_CONVERGED
        assert len(hist.armijo) == hist.iterations
        for rec in hist.armijo:
            assert rec["theta_new"] <= (1 - 2 * cfg.c * rec["alpha"]) * rec["theta_old"]
        assert any(a < 1.0 for a in hist.alpha)

    def test_damped_steps_decrease_merit(self):
        p = builtin_problem("test2b")
        cfg = NewtonConfig(scheme="fd", globalization="always")
        g = grid_for(p, 160, cfg)
        _, _, hist = global_newton(p, g, cfg)
        for rec in hist.armijo:
            assert rec["theta_new"] < rec["theta_old"]


class TestSolveDispatch:
    def test_off_returns_local_result(self):
        p = builtin_problem("test2b")
        cfg = NewtonConfig(scheme="fd", globalization="off")
        g = grid_for(p, 160, cfg)
        _, _, hist = solve(p, g, cfg)
        assert hist.status == STATUS_BREAKDOWN
        assert not hist.globalized

    def test_fallback_restarts_globally_after_breakdown(self):
        p = builtin_problem("test2b")
        cfg = NewtonConfig(scheme="fd")
        g = grid_for(p, 160, cfg)
        u, m, hist = solve(p, g, cfg)
        assert hist.status == STATUS_CONVERGED
        assert hist.globalized
        assert hist.local_attempt is not None
        assert hist.local_attempt["status"] == STATUS_BREAKDOWN
        assert float(np.asarray(m).min()) > -1e-6

    def test_always_skips_local(self):
        p = builtin_problem("test2a")
        cfg = NewtonConfig(scheme="sl", globalization="always")
        g = grid_for(p, 32, cfg)
        _, _, hist = solve(p, g, cfg)
        assert hist.globalized
        assert hist.local_attempt is None
