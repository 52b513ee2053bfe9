"""Outer Newton loops over the linearized steps of either scheme.

The local loop re-solves the linearized system around each iterate until
both sup-norm iterate changes fall below tolerance. The global loop damps
each update by an Armijo line search on the squared residual merit of the
coupled system, which buys convergence from poor starting points at the
price of more iterations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .fd_scheme import build_fd_system, fd_drift
from .grid import GridSpec
from .linear_solver import SolverError, forward_backward_sweeps, monolithic_solve
from .operators import div_h, grad_h, laplace_h
from .problems import MfgProblem, sample
from .sl_scheme import build_sl_system, mollified_drift

STATUS_CONVERGED = "converged"
STATUS_BREAKDOWN = "breakdown_negative_density"
STATUS_MAX_ITERS = "max_iters"
STATUS_LINEAR_FAILURE = "linear_solver_failure"
STATUS_LINE_SEARCH_FAILURE = "line_search_failure"


@dataclass
class NewtonConfig:
    tolerance: float = 1e-4
    max_newton_iters: int = 50
    scheme: str = "sl"
    globalization: str = "on_fallback"
    beta: float = 0.5
    c: float = 1.0 / 3.0
    gs_delta: float = 1e-4
    dt_policy: str = ""
    breakdown_tol: float = 1e-8
    breakdown_frac: float = 0.05
    init: str = "broadcast"
    z_form: str = "divergence"
    stencil: str = "compact"
    drift_eps_factor: float = 2.0
    cache_limit_mb: float = 256.0
    max_sweeps: int = 500

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.c < 0.5:
            raise ValueError("c must lie in (0, 1/2)")
        if self.scheme not in ("sl", "fd"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.globalization not in ("off", "on_fallback", "always"):
            raise ValueError(f"unknown globalization {self.globalization!r}")
        if self.init not in ("broadcast", "zero_u", "uniform_m"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.breakdown_frac <= 0:
            raise ValueError("breakdown_frac must be positive")
        if not self.dt_policy:
            self.dt_policy = self.scheme

    def dt_target(self, h: float) -> float:
        if self.dt_policy == "sl":
            return 0.5 * h**1.5
        if self.dt_policy == "fd":
            return 0.25 * h
        raise ValueError(f"unknown dt policy {self.dt_policy!r}")


def grid_for(problem: MfgProblem, n_space: int, config: NewtonConfig) -> GridSpec:
    """Grid at the config's time-step policy, rounded to divide the horizon."""
    n_time = max(1, round(problem.horizon / config.dt_target(1.0 / n_space)))
    return GridSpec(
        dim=problem.dim, n_space=n_space, n_time=n_time, horizon=problem.horizon
    )


@dataclass
class NewtonHistory:
    e_u: list = field(default_factory=list)
    e_m: list = field(default_factory=list)
    theta: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    sweeps: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)
    min_density: list = field(default_factory=list)
    mass_drift: list = field(default_factory=list)
    used_fallback: list = field(default_factory=list)
    armijo: list = field(default_factory=list)
    status: str = STATUS_MAX_ITERS
    globalized: bool = False
    local_attempt: dict | None = None

    @property
    def iterations(self) -> int:
        return len(self.e_u)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "globalized": self.globalized,
            "e_u": self.e_u,
            "e_m": self.e_m,
            "theta": self.theta,
            "alpha": self.alpha,
            "sweeps": self.sweeps,
            "wall_time": self.wall_time,
            "min_density": self.min_density,
            "mass_drift": self.mass_drift,
            "used_fallback": self.used_fallback,
            "armijo": self.armijo,
            "local_attempt": self.local_attempt,
        }


def initial_guess(problem: MfgProblem, grid: GridSpec, option: str = "broadcast"):
    """Starting fields: data levels pinned, interior levels per option."""
    g = sample(problem.terminal_g, grid)
    m0 = sample(problem.m0, grid)
    u = np.tile(g, (grid.n_time + 1, 1))
    m = np.tile(m0, (grid.n_time + 1, 1))
    if option == "zero_u":
        u[:-1] = 0.0
    elif option == "uniform_m":
        m[1:] = 1.0
    elif option != "broadcast":
        raise ValueError(f"unknown init {option!r}")
    return u, m


def newton_drift(u, m, problem: MfgProblem, grid: GridSpec, config: NewtonConfig):
    """Scheme-specific drift of the current iterate, one field per interval."""
    x = grid.nodes()
    if config.scheme == "sl":
        p = mollified_drift(u[:-1], eps=config.drift_eps_factor * grid.h, grid=grid)
        return np.stack(
            [
                problem.hamiltonian.grad_p(x, m[k], p[k])
                for k in range(grid.n_time)
            ]
        )
    return fd_drift(u, grid)[: grid.n_time]


def _build_system(u, m, q, problem, grid, config: NewtonConfig):
    if config.scheme == "sl":
        return build_sl_system(
            u,
            m,
            q,
            problem,
            grid,
            z_form=config.z_form,
            cache_limit_mb=config.cache_limit_mb,
        )
    return build_fd_system(
        u, m, q, problem, grid, z_form=config.z_form, stencil=config.stencil
    )


def newton_direction(u, m, problem, grid, config: NewtonConfig):
    """One linearized solve around (u, m): sweeps first, direct on stall.

    Returns (u_hat, m_hat, sweep_count, used_fallback).
    """
    q = newton_drift(u, m, problem, grid, config)
    system = _build_system(u, m, q, problem, grid, config)
    u_hat, m_hat, report = forward_backward_sweeps(
        system,
        delta=config.gs_delta,
        max_sweeps=config.max_sweeps,
        u_start=u,
        m_start=m,
    )
    if report.converged:
        return u_hat, m_hat, report.sweeps, False
    u_hat, m_hat = monolithic_solve(system)
    return u_hat, m_hat, report.sweeps, True


def merit(u, m, problem: MfgProblem, grid: GridSpec) -> float:
    """Squared residual norm of the coupled system plus data mismatches.

    Residuals are formed with the compact Laplacian and centered gradient
    for both schemes so that values are comparable across schemes.
    """
    nt = grid.n_time
    n = grid.n_nodes
    u = np.asarray(u, dtype=float).reshape(nt + 1, n)
    m = np.asarray(m, dtype=float).reshape(nt + 1, n)
    x = grid.nodes()
    dt = grid.dt
    cell = grid.h**grid.dim
    ham = problem.hamiltonian
    total = 0.0
    for k in range(nt):
        du = grad_h(u[k], grid)
        m_next = m[k + 1]
        r_hjb = (
            -(u[k + 1] - u[k]) / dt
            - problem.nu * laplace_h(u[k], grid)
            + ham.value(x, m_next, du)
            - problem.coupling.value(m_next, x)
        )
        flux = m_next * ham.grad_p(x, m_next, du)
        r_fp = (
            (m_next - m[k]) / dt
            - problem.nu * laplace_h(m_next, grid)
            - div_h(flux, grid)
        )
        total += float(np.sum(r_hjb**2 + r_fp**2)) * cell * dt
    g = sample(problem.terminal_g, grid)
    m0 = sample(problem.m0, grid)
    total += float(np.sum((u[nt] - g) ** 2)) * cell
    total += float(np.sum((m[0] - m0) ** 2)) * cell
    return 0.5 * total


def _mass_drift(m, grid: GridSpec) -> float:
    masses = m.sum(axis=1) * grid.h**grid.dim
    scale = max(abs(float(masses[0])), 1e-300)
    return float(np.abs(masses - masses[0]).max()) / scale


def _record(history, e_u, e_m, th, alpha, sweeps, t0, m_new, grid, fallback):
    history.e_u.append(float(e_u))
    history.e_m.append(float(e_m))
    history.theta.append(float(th))
    history.alpha.append(float(alpha))
    history.sweeps.append(int(sweeps))
    history.wall_time.append(time.perf_counter() - t0)
    history.min_density.append(float(m_new.min()))
    history.mass_drift.append(_mass_drift(m_new, grid))
    history.used_fallback.append(bool(fallback))


def _neg_frac(m: np.ndarray) -> float:
    """Worst negative node as a fraction of the density's positive scale."""
    top = float(m.max())
    bottom = float(m.min())
    if bottom >= 0.0:
        return 0.0
    return -bottom / top if top > 0.0 else np.inf


def local_newton(problem: MfgProblem, grid: GridSpec, config: NewtonConfig):
    """Full-step Newton iteration with breakdown detection.

    An iterate briefly dipping below zero is normal early in the iteration
    and heals on its own, so a single negative snapshot is not treated as
    failure. Breakdown is declared only when the negativity is substantial
    relative to the density scale on two consecutive iterates while the
    density increments grow, which is the signature of the linearization
    feeding on its own sign defect.
    """
    u, m = initial_guess(problem, grid, config.init)
    history = NewtonHistory()
    prev_e_m = np.inf
    prev_neg = 0.0
    for _ in range(config.max_newton_iters):
        t0 = time.perf_counter()
        try:
            u_new, m_new, sweeps, fallback = newton_direction(
                u, m, problem, grid, config
            )
        except SolverError:
            history.status = STATUS_LINEAR_FAILURE
            return u, m, history
        e_u = float(np.abs(u_new - u).max())
        e_m = float(np.abs(m_new - m).max())
        th = merit(u_new, m_new, problem, grid)
        _record(history, e_u, e_m, th, 1.0, sweeps, t0, m_new, grid, fallback)
        u, m = u_new, m_new
        if e_u < config.tolerance and e_m < config.tolerance:
            history.status = STATUS_CONVERGED
            return u, m, history
        neg = _neg_frac(m)
        if (
            m.min() < -config.breakdown_tol
            and neg > config.breakdown_frac
            and prev_neg > config.breakdown_frac
            and e_m > prev_e_m
        ):
            history.status = STATUS_BREAKDOWN
            return u, m, history
        prev_e_m = e_m
        prev_neg = neg
    history.status = STATUS_MAX_ITERS
    return u, m, history


def global_newton(problem: MfgProblem, grid: GridSpec, config: NewtonConfig):
    """Damped Newton iteration: backtracking line search on the merit."""
    u, m = initial_guess(problem, grid, config.init)
    history = NewtonHistory(globalized=True)
    for _ in range(config.max_newton_iters):
        t0 = time.perf_counter()
        try:
            u_hat, m_hat, sweeps, fallback = newton_direction(
                u, m, problem, grid, config
            )
        except SolverError:
            history.status = STATUS_LINEAR_FAILURE
            return u, m, history
        d_u = u_hat - u
        d_m = m_hat - m
        theta_old = merit(u, m, problem, grid)
        alpha = 1.0
        i_n = 0
        while True:
            theta_new = merit(u + alpha * d_u, m + alpha * d_m, problem, grid)
            if theta_new <= (1.0 - 2.0 * config.c * alpha) * theta_old:
                break
            i_n += 1
            if i_n > 40:
                history.status = STATUS_LINE_SEARCH_FAILURE
                return u, m, history
            alpha *= config.beta
        history.armijo.append(
            {
                "backtracks": i_n,
                "alpha": alpha,
                "theta_old": theta_old,
                "theta_new": theta_new,
            }
        )
        u = u + alpha * d_u
        m = m + alpha * d_m
        e_u = float(np.abs(alpha * d_u).max())
        e_m = float(np.abs(alpha * d_m).max())
        _record(history, e_u, e_m, theta_new, alpha, sweeps, t0, m, grid, fallback)
        if e_u < config.tolerance and e_m < config.tolerance:
            history.status = STATUS_CONVERGED
            return u, m, history
    history.status = STATUS_MAX_ITERS
    return u, m, history


def solve(problem: MfgProblem, grid: GridSpec, config: NewtonConfig):
    """Newton solve with the configured globalization policy."""
    if config.globalization == "always":
        return global_newton(problem, grid, config)
    u, m, history = local_newton(problem, grid, config)
    if config.globalization == "on_fallback" and history.status != STATUS_CONVERGED:
        u, m, g_history = global_newton(problem, grid, config)
        g_history.local_attempt = history.to_dict()
        return u, m, g_history
    return u, m, history


def rate_fit(history: NewtonHistory, which: str = "m") -> float:
    """Least-squares slope of log E against log of the previous E."""
    errors = np.asarray(history.e_m if which == "m" else history.e_u, dtype=float)
    pairs = [
        (np.log(a), np.log(b))
        for a, b in zip(errors[:-1], errors[1:])
        if a > 0 and b > 0
    ]
    if len(pairs) < 2 or len(errors) < 3:
        raise ValueError("rate fit needs at least 3 iterations with positive errors")
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    if np.ptp(xs) == 0.0:
        raise ValueError("rate fit undefined for a constant error sequence")
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def fixed_point_residual(u, m, problem: MfgProblem, grid: GridSpec, config: NewtonConfig):
    """Sup-norm defect of (u, m) in its own scheme's nonlinear recurrences.

    The linearized system is rebuilt around (u, m) itself, so the backward
    and forward level maps reduce to the scheme's nonlinear updates; the
    returned value is the largest level-wise recurrence mismatch.
    """
    q = newton_drift(u, m, problem, grid, config)
    system = _build_system(u, m, q, problem, grid, config)
    worst = 0.0
    for k in range(grid.n_time):
        r_b = u[k] - system.backward_level(k, u[k + 1], m)
        r_f = m[k + 1] - system.forward_level(k, m[k], u)
        worst = max(worst, float(np.abs(r_b).max()), float(np.abs(r_f).max()))
    return worst
