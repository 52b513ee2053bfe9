"""Implicit finite-difference assembly of one linearized step.

Each backward level solves a sparse marching system and each forward level
solves its exact transpose, so the discrete mass identity follows from the
matrix rows summing to one. Drift fields are plain centered gradients.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg

from .grid import GridSpec
from .linear_solver import LevelBlocks, SolverError, forward_backward_sweeps
from .operators import grad_h, grad_matrices, laplace_matrix
from .problems import MfgProblem
from .sl_scheme import apply_fp_operator, fp_operator_matrix


def fd_drift(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Componentwise centered gradient of each level of u.

    Input (levels, n_nodes) or (n_nodes,); output gains an axis of size dim
    in front of the node axis.
    """
    u = np.asarray(u, dtype=float)
    g = grad_h(u, grid)
    if u.ndim == 1:
        return g
    return np.moveaxis(g, 0, 1)


def _one_sided_1d(n: int, h: float, forward: bool) -> sp.csr_matrix:
    main = np.full(n, -1.0 / h if forward else 1.0 / h)
    off = np.full(n - 1, 1.0 / h if forward else -1.0 / h)
    offset = 1 if forward else -1
    corner = 1.0 / h if forward else -1.0 / h
    mat = sp.diags([main, off], [0, offset], shape=(n, n), format="lil")
    if forward:
        mat[n - 1, 0] = corner
    else:
        mat[0, n - 1] = corner
    return mat.tocsr()


def _one_sided_matrices(grid: GridSpec, forward: bool) -> list[sp.csr_matrix]:
    D = _one_sided_1d(grid.n_space, grid.h, forward)
    if grid.dim == 1:
        return [D]
    eye = sp.identity(grid.n_space, format="csr")
    return [sp.kron(eye, D, format="csr"), sp.kron(D, eye, format="csr")]


def build_marching_matrix(
    q: np.ndarray,
    grid: GridSpec,
    nu: float,
    stencil: str = "compact",
    advection: str = "central",
) -> sp.csr_matrix:
    """Implicit one-level operator I - dt nu L + dt q.D for drift q.

    Rows sum to one for any drift since every constituent stencil has zero
    row sums. The upwind option one-sides each advection term by the sign
    of the local drift component.
    """
    q = np.asarray(q, dtype=float).reshape(grid.dim, grid.n_nodes)
    n = grid.n_nodes
    dt = grid.dt
    out = sp.identity(n, format="csr")
    if nu != 0.0:
        out = out - dt * nu * laplace_matrix(grid, stencil)
    if advection == "central":
        for a, D in enumerate(grad_matrices(grid)):
            out = out + dt * sp.diags(q[a]) @ D
    elif advection == "upwind":
        plus = _one_sided_matrices(grid, forward=True)
        minus = _one_sided_matrices(grid, forward=False)
        for a in range(grid.dim):
            q_pos = np.maximum(q[a], 0.0)
            q_neg = np.minimum(q[a], 0.0)
            out = out + dt * (sp.diags(q_pos) @ minus[a] + sp.diags(q_neg) @ plus[a])
    else:
        raise ValueError(f"unknown advection {advection!r}")
    return out.tocsr()


@dataclass
class FdSystem:
    """One linearized implicit step, marching factorizations cached per level.

    Backward: D^k u^k = u^{k+1} + dt (W^{k+1} m^{k+1} + B^{k+1}).
    Forward: (D^k)^T m^{k+1} = m^k + dt Z^k (u^k - u_prev^k), where Z^k has
    its density coefficient drawn from the previous iterate at level k+1.
    """

    grid: GridSpec
    problem: MfgProblem
    terminal: np.ndarray
    initial: np.ndarray
    d_mats: list
    lus: list
    w: np.ndarray
    bt: np.ndarray
    zeta: np.ndarray
    u_prev: np.ndarray
    z_form: str = "divergence"
    scheme: str = field(default="fd", init=False)

    def backward_level(self, k: int, u_next: np.ndarray, m: np.ndarray) -> np.ndarray:
        dt = self.grid.dt
        rhs = u_next + dt * (self.w[k] * m[k + 1] + self.bt[k])
        return self.lus[k].solve(rhs)

    def forward_level(self, k: int, m_k: np.ndarray, u: np.ndarray) -> np.ndarray:
        dt = self.grid.dt
        source = apply_fp_operator(
            self.zeta[k], u[k] - self.u_prev[k], self.grid, self.z_form
        )
        return self.lus[k].solve(m_k + dt * source, trans="T")

    def level_blocks(self, k: int) -> LevelBlocks:
        dt = self.grid.dt
        n = self.grid.n_nodes
        D = self.d_mats[k]
        Z = fp_operator_matrix(self.zeta[k], self.grid, self.z_form)
        eye = sp.identity(n, format="csr")
        return LevelBlocks(
            bu=D.tocsr(),
            bu_next=(-eye).tocsr(),
            bm=sp.diags(-dt * self.w[k]).tocsr(),
            bm_level=k + 1,
            b_rhs=dt * self.bt[k],
            fm_next=D.T.tocsr(),
            fm=(-eye).tocsr(),
            fu=(-dt * Z).tocsr(),
            fu_level=k,
            f_rhs=-dt * (Z @ self.u_prev[k]),
        )


def build_fd_system(
    u_prev: np.ndarray,
    m_prev: np.ndarray,
    q: np.ndarray,
    problem: MfgProblem,
    grid: GridSpec,
    z_form: str = "divergence",
    stencil: str = "compact",
    advection: str = "central",
) -> FdSystem:
    """Assemble the implicit step around (u_prev, m_prev) with raw drift q.

    The drift q is the plain gradient of the previous value iterate; it is
    mapped through the momentum derivative of the Hamiltonian before
    entering the marching matrices and sources.
    """
    ham = problem.hamiltonian
    if not ham.separable:
        raise ValueError(
            "the implicit finite-difference step requires a separable Hamiltonian"
        )
    nt = grid.n_time
    n = grid.n_nodes
    u_prev = np.asarray(u_prev, dtype=float).reshape(nt + 1, n)
    m_prev = np.asarray(m_prev, dtype=float).reshape(nt + 1, n)
    q = np.asarray(q, dtype=float).reshape(nt, grid.dim, n)
    x = grid.nodes()

    w = np.empty((nt, n))
    bt = np.empty((nt, n))
    zeta = np.empty((nt, n))
    d_mats = []
    lus = []
    max_drift = 0.0
    for k in range(nt):
        p = q[k]
        qm = ham.grad_p(x, m_prev[k], p)
        max_drift = max(max_drift, float(np.abs(qm).max()))
        m_next = m_prev[k + 1]
        w[k] = problem.coupling.derivative(m_next, x)
        bt[k] = (
            np.sum(qm * p, axis=0)
            - ham.value(x, m_next, p)
            + problem.coupling.value(m_next, x)
            - w[k] * m_next
        )
        zeta[k] = m_next * ham.hess_coeff(m_next)
        D = build_marching_matrix(qm, grid, problem.nu, stencil, advection)
        d_mats.append(D)
        try:
            lus.append(sp.linalg.splu(D.tocsc()))
        except RuntimeError as exc:
            raise SolverError(f"marching matrix factorization failed: {exc}")
    if advection == "central" and max_drift > 2.0 * problem.nu / grid.h:
        warnings.warn(
            "advection dominates diffusion in the marching matrices "
            f"(max drift {max_drift:.3g} > 2 nu/h = {2 * problem.nu / grid.h:.3g}); "
            "sign structure of the stencil is lost",
            stacklevel=2,
        )
    return FdSystem(
        grid=grid,
        problem=problem,
        terminal=u_prev[nt].copy(),
        initial=m_prev[0].copy(),
        d_mats=d_mats,
        lus=lus,
        w=w,
        bt=bt,
        zeta=zeta,
        u_prev=u_prev,
        z_form=z_form,
    )


def fd_newton_step(
    u_prev: np.ndarray,
    m_prev: np.ndarray,
    q: np.ndarray,
    problem: MfgProblem,
    grid: GridSpec,
    delta: float = 1e-4,
    max_sweeps: int = 500,
    z_form: str = "divergence",
):
    """Solve one linearized implicit step; raises SolverError on stall."""
    system = build_fd_system(u_prev, m_prev, q, problem, grid, z_form=z_form)
    u, m, report = forward_backward_sweeps(
        system, delta=delta, max_sweeps=max_sweeps, u_start=u_prev, m_start=m_prev
    )
    if not report.converged:
        raise SolverError(
            "coupled sweeps did not converge", system=system, u=u, m=m, report=report
        )
    return u, m, report
