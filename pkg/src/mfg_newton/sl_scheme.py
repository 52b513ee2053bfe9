"""Semi-Lagrangian assembly of one linearized forward-backward step.

The backward value recurrence averages the next time level over 2*dim
characteristic feet and adds the coupling source; the forward density
recurrence is its exact transpose plus a divergence-form source, which is
what makes the discrete mass constant in time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .grid import GridSpec, interp_weights, periodic_project
from .linear_solver import LevelBlocks, SolverError, forward_backward_sweeps
from .operators import d1, d2, grad_matrices, laplace_h
from .problems import MfgProblem


def noise_radius(dt: float, sigma: float, dim: int) -> float:
    # each axis gets hit by 2 of the 2*dim feet with weight 1/(2*dim), so
    # radius^2/dim must equal the per-axis variance sigma^2 dt
    return float(np.sqrt(dim * dt) * sigma)


def characteristic_feet(x, q, dt: float, sigma: float, dim: int) -> np.ndarray:
    """Feet of the 2*dim-point noise rule for one state point.

    Returns shape (2*dim, dim): project(x + dt*q + r*e) over the signed unit
    vectors e, with r the noise radius.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    x = np.asarray(x, dtype=float).reshape(dim)
    q = np.asarray(q, dtype=float).reshape(dim)
    center = x + dt * q
    r = noise_radius(dt, sigma, dim)
    offsets = np.concatenate([np.eye(dim), -np.eye(dim)]) * r
    order = np.empty((2 * dim, dim))
    # interleave +e_a, -e_a per axis
    order[0::2] = offsets[:dim]
    order[1::2] = offsets[dim:]
    return periodic_project(center[None, :] + order)


@dataclass
class TransportStencil:
    """Gather indices and weights of one transport matrix, row-major.

    idx[r, e] and w[r, e] over e enumerate the averaged interpolation
    stencils of row r; apply computes A v, apply_transpose computes A^T v.
    """

    idx: np.ndarray
    w: np.ndarray
    n_nodes: int

    def apply(self, v: np.ndarray) -> np.ndarray:
        return np.sum(np.asarray(v)[self.idx] * self.w, axis=1)

    def apply_transpose(self, v: np.ndarray) -> np.ndarray:
        contrib = self.w * np.asarray(v)[:, None]
        return np.bincount(self.idx.ravel(), weights=contrib.ravel(), minlength=self.n_nodes)

    def matrix(self) -> sp.csr_matrix:
        rows = np.repeat(np.arange(self.idx.shape[0]), self.idx.shape[1])
        A = sp.coo_matrix(
            (self.w.ravel(), (rows, self.idx.ravel())),
            shape=(self.n_nodes, self.n_nodes),
        )
        return A.tocsr()


def transport_stencil(q: np.ndarray, grid: GridSpec, sigma: float) -> TransportStencil:
    """Stencil of the transport average at drift q (applied as given)."""
    d = grid.dim
    n = grid.n_nodes
    q = np.asarray(q, dtype=float).reshape(d, n)
    centers = grid.nodes() + grid.dt * q.T
    r = noise_radius(grid.dt, sigma, d)
    idx_parts = []
    w_parts = []
    for a in range(d):
        for s in (1.0, -1.0):
            shift = np.zeros(d)
            shift[a] = s * r
            idx, w = interp_weights(grid, centers + shift)
            idx_parts.append(idx)
            w_parts.append(w)
    idx = np.concatenate(idx_parts, axis=1).astype(np.int32)
    w = np.concatenate(w_parts, axis=1) / (2.0 * d)
    return TransportStencil(idx=idx, w=w, n_nodes=n)


def build_transport(q: np.ndarray, grid: GridSpec, sigma: float) -> sp.csr_matrix:
    """Sparse transport matrix: rows average interpolation weights at feet."""
    return transport_stencil(q, grid, sigma).matrix()


def _gaussian_kernels(eps: float, grid: GridSpec):
    h = grid.h
    n = grid.n_space
    radius = min(int(np.ceil(4.0 * eps / h)), n // 2)
    offs = np.arange(-radius, radius + 1) * h
    bump = np.exp(-(offs**2) / (2.0 * eps**2)) / (np.sqrt(2.0 * np.pi) * eps)
    smooth = bump * h
    smooth /= smooth.sum()
    deriv = (-offs / eps**2) * bump * h
    deriv -= deriv.mean()
    full_smooth = np.zeros(n)
    full_deriv = np.zeros(n)
    np.add.at(full_smooth, np.arange(-radius, radius + 1) % n, smooth)
    np.add.at(full_deriv, np.arange(-radius, radius + 1) % n, deriv)
    return np.fft.rfft(full_deriv), np.fft.rfft(full_smooth)


def mollified_drift(u: np.ndarray, eps: float, grid: GridSpec) -> np.ndarray:
    """Per-level smoothed gradient: circular convolution with a Gaussian
    derivative kernel (de-meaned so constants give zero drift).

    Input (levels, n_nodes) or (n_nodes,); output gains an axis of size dim
    in front of the node axis.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    levels = u[None, :] if single else u
    if levels.shape[-1] != grid.n_nodes:
        raise ValueError(f"field has {levels.shape[-1]} nodes, grid has {grid.n_nodes}")
    deriv_hat, smooth_hat = _gaussian_kernels(eps, grid)
    n = grid.n_space
    if grid.dim == 1:
        out = np.fft.irfft(np.fft.rfft(levels, axis=-1) * deriv_hat, n=n, axis=-1)
        q = out[:, None, :]
    else:
        arr = levels.reshape(levels.shape[0], n, n)
        hat = np.fft.rfft(arr, axis=-1)
        q1 = np.fft.irfft(hat * deriv_hat, n=n, axis=-1)
        q1 = np.fft.irfft(np.fft.rfft(q1, axis=-2) * smooth_hat[:, None], n=n, axis=-2)
        q2 = np.fft.irfft(hat * smooth_hat, n=n, axis=-1)
        q2 = np.fft.irfft(np.fft.rfft(q2, axis=-2) * deriv_hat[:, None], n=n, axis=-2)
        q = np.stack([q1, q2], axis=1).reshape(levels.shape[0], 2, grid.n_nodes)
    return q[0] if single else q


def build_coupling_blocks(m_prev, q, problem: MfgProblem, grid: GridSpec):
    """Diagonal coupling W and source B of one backward level.

    W collects every coefficient of the unknown density in the linearized
    value equation: the coupling derivative plus (for density-dependent
    Hamiltonians) minus the density derivative of H. B is the remainder of
    the right-hand side evaluated at the previous iterate, q.p - H + F - W m.
    """
    x = grid.nodes()
    m_prev = np.asarray(m_prev, dtype=float)
    q = np.asarray(q, dtype=float).reshape(grid.dim, grid.n_nodes)
    ham = problem.hamiltonian
    p = ham.p_from_drift(q, m_prev)
    w = problem.coupling.derivative(m_prev, x) - ham.dm(x, m_prev, p)
    b = (
        np.sum(q * p, axis=0)
        - ham.value(x, m_prev, p)
        + problem.coupling.value(m_prev, x)
        - w * m_prev
    )
    return w, b


def apply_fp_operator(coef, v, grid: GridSpec, z_form: str = "divergence") -> np.ndarray:
    """Matrix-free action of the density-weighted diffusion block."""
    if z_form == "divergence":
        out = d1(coef * d1(v, grid), grid)
        if grid.dim == 2:
            out = out + d2(coef * d2(v, grid), grid)
        return out
    if z_form == "product_rule":
        out = coef * laplace_h(v, grid, stencil="composed") + d1(coef, grid) * d1(v, grid)
        if grid.dim == 2:
            out = out + d2(coef, grid) * d2(v, grid)
        return out
    raise ValueError(f"unknown z_form {z_form!r}")


def fp_operator_matrix(coef, grid: GridSpec, z_form: str = "divergence") -> sp.csr_matrix:
    coef = np.asarray(coef, dtype=float)
    mats = grad_matrices(grid)
    if z_form == "divergence":
        out = sum(D @ sp.diags(coef) @ D for D in mats)
        return out.tocsr()
    if z_form == "product_rule":
        out = sp.diags(coef) @ sum(D @ D for D in mats)
        for D in mats:
            out = out + sp.diags(D @ coef) @ D
        return out.tocsr()
    raise ValueError(f"unknown z_form {z_form!r}")


def build_fp_blocks(m_prev, u_prev, grid: GridSpec, z_form: str = "divergence"):
    """Density-diffusion block Z and its source C = -Z u_prev.

    The default divergence form D_a diag(m_prev) D_a sums to zero along
    columns, which is what keeps the forward recurrence mass-exact; the
    product-rule expansion differs by O(h^2) and is kept for comparison.
    """
    Z = fp_operator_matrix(np.asarray(m_prev, dtype=float), grid, z_form)
    C = -(Z @ np.asarray(u_prev, dtype=float))
    return Z, C


@dataclass
class SlSystem:
    """One linearized step in recurrence form, level blocks on demand.

    Backward: u^k = A^k u^{k+1} + dt (W^k m^k + B^k), k descending.
    Forward: m^{k+1} = (A^k)^T m^k + dt Z^{k+1} (u^{k+1} - u_prev^{k+1}).
    The transport stencils are either cached per level or rebuilt from the
    stored velocity on every application, trading time for memory on big
    2d runs.
    """

    grid: GridSpec
    problem: MfgProblem
    terminal: np.ndarray
    initial: np.ndarray
    velocity: np.ndarray  # advection velocity per level, shape (n_time, dim, n)
    w: np.ndarray
    b: np.ndarray
    zeta: np.ndarray  # Z coefficient for level k+1, stored at index k
    u_prev: np.ndarray
    z_form: str = "divergence"
    stencils: list[TransportStencil] | None = None
    scheme: str = field(default="sl", init=False)

    def _stencil(self, k: int) -> TransportStencil:
        if self.stencils is not None:
            return self.stencils[k]
        return transport_stencil(self.velocity[k], self.grid, self.problem.sigma)

    def backward_level(self, k: int, u_next: np.ndarray, m: np.ndarray) -> np.ndarray:
        dt = self.grid.dt
        return self._stencil(k).apply(u_next) + dt * (self.w[k] * m[k] + self.b[k])

    def forward_level(self, k: int, m_k: np.ndarray, u: np.ndarray) -> np.ndarray:
        dt = self.grid.dt
        source = apply_fp_operator(
            self.zeta[k], u[k + 1] - self.u_prev[k + 1], self.grid, self.z_form
        )
        return self._stencil(k).apply_transpose(m_k) + dt * source

    def level_blocks(self, k: int) -> LevelBlocks:
        dt = self.grid.dt
        n = self.grid.n_nodes
        A = self._stencil(k).matrix()
        Z = fp_operator_matrix(self.zeta[k], self.grid, self.z_form)
        eye = sp.identity(n, format="csr")
        return LevelBlocks(
            bu=eye,
            bu_next=-A,
            bm=sp.diags(-dt * self.w[k]).tocsr(),
            bm_level=k,
            b_rhs=dt * self.b[k],
            fm_next=eye,
            fm=(-A.T).tocsr(),
            fu=(-dt * Z).tocsr(),
            fu_level=k + 1,
            f_rhs=-dt * (Z @ self.u_prev[k + 1]),
        )


def build_sl_system(
    u_prev: np.ndarray,
    m_prev: np.ndarray,
    q: np.ndarray,
    problem: MfgProblem,
    grid: GridSpec,
    z_form: str = "divergence",
    cache_limit_mb: float = 256.0,
) -> SlSystem:
    """Assemble the per-level blocks of one step around (u_prev, m_prev, q)."""
    nt = grid.n_time
    n = grid.n_nodes
    u_prev = np.asarray(u_prev, dtype=float).reshape(nt + 1, n)
    m_prev = np.asarray(m_prev, dtype=float).reshape(nt + 1, n)
    q = np.asarray(q, dtype=float).reshape(nt, grid.dim, n)
    w = np.empty((nt, n))
    b = np.empty((nt, n))
    for k in range(nt):
        w[k], b[k] = build_coupling_blocks(m_prev[k], q[k], problem, grid)
    hess = problem.hamiltonian.hess_coeff
    zeta = np.stack([m_prev[k + 1] * hess(m_prev[k + 1]) for k in range(nt)])
    velocity = -q
    system = SlSystem(
        grid=grid,
        problem=problem,
        terminal=u_prev[nt].copy(),
        initial=m_prev[0].copy(),
        velocity=velocity,
        w=w,
        b=b,
        zeta=zeta,
        u_prev=u_prev,
        z_form=z_form,
    )
    entries = nt * n * 2 * grid.dim * 2**grid.dim
    if entries * 12 <= cache_limit_mb * 2**20:
        system.stencils = [
            transport_stencil(velocity[k], grid, problem.sigma) for k in range(nt)
        ]
    return system


def sl_newton_step(
    u_prev: np.ndarray,
    m_prev: np.ndarray,
    q: np.ndarray,
    problem: MfgProblem,
    grid: GridSpec,
    delta: float = 1e-4,
    max_sweeps: int = 500,
    z_form: str = "divergence",
):
    """Solve one linearized step; raises SolverError if sweeps stall."""
    system = build_sl_system(u_prev, m_prev, q, problem, grid, z_form=z_form)
    u, m, report = forward_backward_sweeps(
        system, delta=delta, max_sweeps=max_sweeps, u_start=u_prev, m_start=m_prev
    )
    if not report.converged:
        raise SolverError(
            "coupled sweeps did not converge", system=system, u=u, m=m, report=report
        )
    return u, m, report
