"""Uniform space-time grids on the periodic unit torus.

Space is the torus [0, 1)^d sampled at n_space nodes per axis, time is the
interval [0, horizon] sampled at n_time + 1 levels. Two-dimensional fields are
stored flat with index i + j * n_space, so the first coordinate varies
fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def wrap_index(idx, n: int):
    """Map integer indices onto {0, ..., n-1} periodically."""
    return idx % n


def periodic_project(x):
    """Map real coordinates into [0, 1) periodically."""
    return np.asarray(x) % 1.0 if isinstance(x, np.ndarray) else x % 1.0


@dataclass(frozen=True)
class GridSpec:
    """Discretization sizes for one run.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    n_space : int
        Nodes per spatial axis. At least 3 so the periodic stencils do not
        touch a node twice.
    n_time : int
        Number of time steps (levels run 0 .. n_time).
    horizon : float
        Final time, positive.
    """

    dim: int
    n_space: int
    n_time: int
    horizon: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n_space < 3:
            raise ValueError(f"n_space must be at least 3, got {self.n_space}")
        if self.n_time < 1:
            raise ValueError(f"n_time must be at least 1, got {self.n_time}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")

    @property
    def h(self) -> float:
        return 1.0 / self.n_space

    @property
    def dt(self) -> float:
        return self.horizon / self.n_time

    @property
    def n_nodes(self) -> int:
        return self.n_space**self.dim

    def axis(self) -> np.ndarray:
        return np.arange(self.n_space) * self.h

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (n_nodes, dim), flat order."""
        ax = self.axis()
        if self.dim == 1:
            return ax[:, None]
        x2, x1 = np.meshgrid(ax, ax, indexing="ij")
        return np.column_stack([x1.ravel(), x2.ravel()])

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_time + 1)


def interp_weights(grid: GridSpec, points: np.ndarray):
    """Multilinear interpolation stencil for arbitrary points.

    Parameters
    ----------
    points : ndarray, shape (n_pts, dim)
        Query coordinates, projected onto the torus first.

    Returns
    -------
    idx : int ndarray, shape (n_pts, 2**dim)
        Flat node indices of the surrounding cell corners.
    w : ndarray, shape (n_pts, 2**dim)
        Nonnegative convex weights, rows sum to one.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != grid.dim:
        raise ValueError(f"points have dim {points.shape[1]}, grid has dim {grid.dim}")
    n = grid.n_space
    s = periodic_project(points) * n
    i0 = np.floor(s).astype(np.int64)
    f = s - i0
    i0 %= n
    i1 = (i0 + 1) % n
    if grid.dim == 1:
        idx = np.stack([i0[:, 0], i1[:, 0]], axis=1)
        w = np.stack([1.0 - f[:, 0], f[:, 0]], axis=1)
        return idx, w
    f1, f2 = f[:, 0], f[:, 1]
    corners_i = np.stack([i0[:, 0], i1[:, 0], i0[:, 0], i1[:, 0]], axis=1)
    corners_j = np.stack([i0[:, 1], i0[:, 1], i1[:, 1], i1[:, 1]], axis=1)
    idx = corners_i + n * corners_j
    w = np.stack(
        [
            (1.0 - f1) * (1.0 - f2),
            f1 * (1.0 - f2),
            (1.0 - f1) * f2,
            f1 * f2,
        ],
        axis=1,
    )
    return idx, w


def interp(grid: GridSpec, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate a flat nodal field at arbitrary points, shape (n_pts,)."""
    idx, w = interp_weights(grid, points)
    return np.sum(np.asarray(values)[idx] * w, axis=1)
