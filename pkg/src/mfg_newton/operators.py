"""Centered periodic difference operators on flat nodal fields.

Matrix-free versions act on the trailing axis of an array (so time-stacked
fields broadcast); sparse versions assemble the same stencils in CSR form for
block-system work.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .grid import GridSpec


def _as_axes(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    # view the trailing flat node axis as (..., j, i) for 2d grids
    v = np.asarray(v)
    if v.shape[-1] != grid.n_nodes:
        raise ValueError(f"field has {v.shape[-1]} nodes, grid has {grid.n_nodes}")
    if grid.dim == 1:
        return v
    return v.reshape(v.shape[:-1] + (grid.n_space, grid.n_space))


def _central(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(arr, -1, axis=axis) - np.roll(arr, 1, axis=axis)) / (2.0 * h)


def d1(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Central derivative along the first coordinate."""
    arr = _as_axes(v, grid)
    out = _central(arr, -1, grid.h)
    return out.reshape(np.shape(v))


def d2(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Central derivative along the second coordinate. 2d grids only."""
    if grid.dim != 2:
        raise ValueError("d2 requires a two-dimensional grid")
    arr = _as_axes(v, grid)
    out = _central(arr, -2, grid.h)
    return out.reshape(np.shape(v))


def grad_h(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Discrete gradient, shape (dim,) + v.shape."""
    if grid.dim == 1:
        return np.stack([d1(v, grid)])
    return np.stack([d1(v, grid), d2(v, grid)])


def div_h(p: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Discrete divergence of a vector field with leading component axis."""
    p = np.asarray(p)
    if p.shape[0] != grid.dim:
        raise ValueError(f"vector field has {p.shape[0]} components, grid dim is {grid.dim}")
    out = d1(p[0], grid)
    if grid.dim == 2:
        out = out + d2(p[1], grid)
    return out


def laplace_h(v: np.ndarray, grid: GridSpec, stencil: str = "compact") -> np.ndarray:
    """Discrete Laplacian.

    The compact stencil is (v[i+1] - 2 v[i] + v[i-1]) / h^2 per axis. The
    composed variant applies the central first derivative twice, which has a
    wider footprint and a nontrivial kernel on even grids; it exists for
    comparison and is not the default anywhere.
    """
    if stencil == "compact":
        arr = _as_axes(v, grid)
        h2 = grid.h * grid.h
        out = (np.roll(arr, -1, axis=-1) - 2.0 * arr + np.roll(arr, 1, axis=-1)) / h2
        if grid.dim == 2:
            out = out + (np.roll(arr, -1, axis=-2) - 2.0 * arr + np.roll(arr, 1, axis=-2)) / h2
        return out.reshape(np.shape(v))
    if stencil == "composed":
        out = d1(d1(v, grid), grid)
        if grid.dim == 2:
            out = out + d2(d2(v, grid), grid)
        return out
    raise ValueError(f"unknown stencil {stencil!r}")


def _d_matrix_1d(n: int, h: float) -> sp.csr_matrix:
    main = np.zeros(n)
    upper = np.full(n, 1.0 / (2.0 * h))
    return sp.diags(
        [main, upper, -upper, [1.0 / (2.0 * h)], [-1.0 / (2.0 * h)]],
        offsets=[0, 1, -1, -(n - 1), n - 1],
        shape=(n, n),
        format="csr",
    )


def _l_matrix_1d(n: int, h: float) -> sp.csr_matrix:
    c = 1.0 / (h * h)
    return sp.diags(
        [np.full(n, -2.0 * c), np.full(n, c), np.full(n, c), [c], [c]],
        offsets=[0, 1, -1, -(n - 1), n - 1],
        shape=(n, n),
        format="csr",
    )


def d1_matrix(grid: GridSpec) -> sp.csr_matrix:
    """Sparse matrix of the first-coordinate central derivative."""
    D = _d_matrix_1d(grid.n_space, grid.h)
    if grid.dim == 1:
        return D
    eye = sp.identity(grid.n_space, format="csr")
    return sp.kron(eye, D, format="csr")


def d2_matrix(grid: GridSpec) -> sp.csr_matrix:
    """Sparse matrix of the second-coordinate central derivative."""
    if grid.dim != 2:
        raise ValueError("d2_matrix requires a two-dimensional grid")
    D = _d_matrix_1d(grid.n_space, grid.h)
    eye = sp.identity(grid.n_space, format="csr")
    return sp.kron(D, eye, format="csr")


def grad_matrices(grid: GridSpec) -> list[sp.csr_matrix]:
    if grid.dim == 1:
        return [d1_matrix(grid)]
    return [d1_matrix(grid), d2_matrix(grid)]


def laplace_matrix(grid: GridSpec, stencil: str = "compact") -> sp.csr_matrix:
    """Sparse matrix of the discrete Laplacian."""
    if stencil == "compact":
        L = _l_matrix_1d(grid.n_space, grid.h)
        if grid.dim == 1:
            return L
        eye = sp.identity(grid.n_space, format="csr")
        return (sp.kron(eye, L) + sp.kron(L, eye)).tocsr()
    if stencil == "composed":
        mats = grad_matrices(grid)
        out = mats[0] @ mats[0]
        for D in mats[1:]:
            out = out + D @ D
        return out.tocsr()
    raise ValueError(f"unknown stencil {stencil!r}")
