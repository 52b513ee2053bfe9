"""Grid construction, periodic wrapping, and multilinear interpolation."""

from __future__ import annotations

import numpy as np
import pytest

from mfg_newton.grid import (
    GridSpec,
    interp,
    interp_weights,
    periodic_project,
    wrap_index,
)


class TestGridSpec:
    def test_spacings_1d(self):
        g = GridSpec(dim=1, n_space=4, n_time=2, horizon=0.5)
        assert g.h == 0.25
        assert g.dt == 0.25
        assert g.n_nodes == 4
        np.testing.assert_allclose(g.nodes()[:, 0], [0.0, 0.25, 0.5, 0.75])
        np.testing.assert_allclose(g.times(), [0.0, 0.25, 0.5])

    def test_spacings_2d(self):
        g = GridSpec(dim=2, n_space=4, n_time=3, horizon=1.0)
        assert g.n_nodes == 16
        nodes = g.nodes()
        assert nodes.shape == (16, 2)
        # flat index i + j * n_space: x1 varies fastest
        np.testing.assert_allclose(nodes[1], [0.25, 0.0])
        np.testing.assert_allclose(nodes[4], [0.0, 0.25])
        np.testing.assert_allclose(nodes[9], [0.25, 0.5])

    def test_rejects_bad_dim(self):
        with pytest.raises(ValueError):
            GridSpec(dim=3, n_space=8, n_time=2, horizon=1.0)

    def test_rejects_too_few_nodes(self):
        with pytest.raises(ValueError):
            GridSpec(dim=1, n_space=2, n_time=2, horizon=1.0)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            GridSpec(dim=1, n_space=8, n_time=0, horizon=1.0)
        with pytest.raises(ValueError):
            GridSpec(dim=1, n_space=8, n_time=2, horizon=-1.0)


class TestWrapping:
    def test_wrap_index_scalar(self):
        assert wrap_index(5, 4) == 1
        assert wrap_index(-1, 4) == 3
        assert wrap_index(4, 4) == 0

    def test_wrap_index_array(self):
        out = wrap_index(np.array([-2, -1, 0, 3, 4, 9]), 4)
        np.testing.assert_array_equal(out, [2, 3, 0, 3, 0, 1])

    def test_periodic_project(self):
        assert periodic_project(1.25) == pytest.approx(0.25)
        assert periodic_project(-0.1) == pytest.approx(0.9, abs=1e-15)
        assert periodic_project(0.0) == 0.0
        out = periodic_project(np.array([2.5, -1.75]))
        np.testing.assert_allclose(out, [0.5, 0.25])

    def test_project_lands_in_unit_interval(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(-50, 50, size=1000)
        y = periodic_project(x)
        assert np.all(y >= 0.0)
        assert np.all(y < 1.0)


class TestInterpWeights1d:
    def test_hand_example(self):
        # h = 1/4, query 0.3: cell [0.25, 0.5), fraction 0.2
        g = GridSpec(dim=1, n_space=4, n_time=1, horizon=1.0)
        idx, w = interp_weights(g, np.array([[0.3]]))
        got = dict(zip(idx[0].tolist(), w[0].tolist()))
        assert got == pytest.approx({1: 0.8, 2: 0.2})

    def test_on_node_is_exact(self):
        g = GridSpec(dim=1, n_space=4, n_time=1, horizon=1.0)
        idx, w = interp_weights(g, np.array([[0.5]]))
        got = dict(zip(idx[0].tolist(), w[0].tolist()))
        assert got[2] == pytest.approx(1.0)
        assert sum(got.values()) == pytest.approx(1.0)

    def test_wraps_past_last_node(self):
        g = GridSpec(dim=1, n_space=4, n_time=1, horizon=1.0)
        idx, w = interp_weights(g, np.array([[0.9]]))
        got = dict(zip(idx[0].tolist(), w[0].tolist()))
        assert got == pytest.approx({3: 0.4, 0: 0.6})

    def test_negative_coordinate_projects(self):
        g = GridSpec(dim=1, n_space=4, n_time=1, horizon=1.0)
        idx, w = interp_weights(g, np.array([[-0.2]]))
        got = dict(zip(idx[0].tolist(), w[0].tolist()))
        assert got == pytest.approx({3: 0.8, 0: 0.2})


class TestInterpWeights2d:
    def test_hand_example(self):
        # h = 1/4, query (0.3, 0.6): fractions (0.2, 0.4), corner (1, 2)
        g = GridSpec(dim=2, n_space=4, n_time=1, horizon=1.0)
        idx, w = interp_weights(g, np.array([[0.3, 0.6]]))
        got = dict(zip(idx[0].tolist(), w[0].tolist()))
        expected = {9: 0.48, 10: 0.12, 13: 0.32, 14: 0.08}
        assert got == pytest.approx(expected)

    def test_partition_of_unity_random(self):
        g = GridSpec(dim=2, n_space=7, n_time=1, horizon=1.0)
        rng = np.random.default_rng(11)
        pts = rng.uniform(-3, 3, size=(500, 2))
        idx, w = interp_weights(g, pts)
        assert np.all(w >= 0.0)
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-14)
        assert np.all(idx >= 0)
        assert np.all(idx < g.n_nodes)


class TestInterp:
    def test_linear_in_cell(self):
        g = GridSpec(dim=1, n_space=4, n_time=1, horizon=1.0)
        vals = np.array([0.0, 1.0, 0.0, -1.0])
        out = interp(g, vals, np.array([[0.3]]))
        assert out[0] == pytest.approx(0.8)

    def test_reproduces_node_values(self):
        g = GridSpec(dim=2, n_space=5, n_time=1, horizon=1.0)
        rng = np.random.default_rng(3)
        vals = rng.standard_normal(g.n_nodes)
        out = interp(g, vals, g.nodes())
        np.testing.assert_allclose(out, vals, atol=1e-13)

    def test_constant_preserved_everywhere(self):
        g = GridSpec(dim=2, n_space=6, n_time=1, horizon=1.0)
        vals = np.full(g.n_nodes, 2.5)
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 1, size=(200, 2))
        out = interp(g, vals, pts)
        np.testing.assert_allclose(out, 2.5, atol=1e-14)

    def test_second_order_refinement(self):
        # error on a smooth periodic function drops ~4x per halving of h
        def f(x):
            return np.sin(2 * np.pi * x[:, 0])

        rng = np.random.default_rng(17)
        pts = rng.uniform(0, 1, size=(400, 1))
        errs = []
        for n in (16, 32):
            g = GridSpec(dim=1, n_space=n, n_time=1, horizon=1.0)
            vals = f(g.nodes())
            errs.append(np.max(np.abs(interp(g, vals, pts) - f(pts))))
        ratio = errs[0] / errs[1]
        assert 3.2 <= ratio <= 4.8
