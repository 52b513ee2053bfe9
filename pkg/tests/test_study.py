import numpy as np
import pytest

from mfg_newton.grid import GridSpec
from mfg_newton.newton_driver import NewtonConfig, grid_for, local_newton
from mfg_newton.problems import builtin_problem
from mfg_newton.runio import RunConfig, write_run
from mfg_newton.study import (
    compare_schemes,
    convergence_study,
    field_error,
    restrict_reference,
)


class TestRestriction:
    def test_identity_when_grids_match(self):
        g = GridSpec(dim=1, n_space=8, n_time=4, horizon=1.0)
        vals = np.random.default_rng(0).standard_normal((5, 8))
        np.testing.assert_array_equal(restrict_reference(vals, g, g), vals)

    def test_spatial_stride_picks_shared_nodes(self):
        fine = GridSpec(dim=1, n_space=16, n_time=2, horizon=1.0)
        coarse = GridSpec(dim=1, n_space=4, n_time=2, horizon=1.0)
        f = np.sin(2 * np.pi * fine.axis())
        vals = np.tile(f, (3, 1))
        out = restrict_reference(vals, fine, coarse)
        np.testing.assert_allclose(out[0], np.sin(2 * np.pi * coarse.axis()), atol=1e-15)

    def test_time_interpolation_is_linear(self):
        fine = GridSpec(dim=1, n_space=4, n_time=4, horizon=1.0)
        coarse = GridSpec(dim=1, n_space=4, n_time=3, horizon=1.0)
        vals = fine.times()[:, None] * np.ones((1, 4))
        out = restrict_reference(vals, fine, coarse)
        np.testing.assert_allclose(out[:, 0], coarse.times(), atol=1e-14)

    def test_2d_stride_mapping(self):
        fine = GridSpec(dim=2, n_space=8, n_time=1, horizon=1.0)
        coarse = GridSpec(dim=2, n_space=4, n_time=1, horizon=1.0)
        xf = fine.nodes()
        f = np.sin(2 * np.pi * xf[:, 0]) + np.cos(2 * np.pi * xf[:, 1])
        vals = np.tile(f, (2, 1))
        xc = coarse.nodes()
        expect = np.sin(2 * np.pi * xc[:, 0]) + np.cos(2 * np.pi * xc[:, 1])
        np.testing.assert_allclose(
            restrict_reference(vals, fine, coarse)[0], expect, atol=1e-15
        )

    def test_non_nested_grids_rejected(self):
        fine = GridSpec(dim=1, n_space=10, n_time=2, horizon=1.0)
        coarse = GridSpec(dim=1, n_space=4, n_time=2, horizon=1.0)
        with pytest.raises(ValueError, match="nest"):
            restrict_reference(np.zeros((3, 10)), fine, coarse)

    def test_error_of_run_against_itself_is_zero(self):
        g = GridSpec(dim=1, n_space=8, n_time=3, horizon=1.0)
        vals = np.random.default_rng(1).standard_normal((4, 8))
        assert field_error(vals, g, vals, g) == 0.0


class TestConvergenceStudy:
    def test_validation(self):
        p = builtin_problem("test2a")
        with pytest.raises(ValueError, match="two resolutions"):
            convergence_study(p, "fd", [8])
        with pytest.raises(ValueError, match="increasing"):
            convergence_study(p, "fd", [16, 8])
        with pytest.raises(ValueError, match="reference"):
            convergence_study(p, "fd", [8, 16], reference="what")

    def test_errors_shrink_on_smooth_problem(self):
        p = builtin_problem("test2a")
        table = convergence_study(p, "fd", [8, 16], problem_id="test2a")
        assert table.reference["n_space"] == 64
        assert [r.status for r in table.rows] == ["converged", "converged"]
        assert table.rows[0].h == 1 / 8
        assert table.rows[1].e_m < table.rows[0].e_m
        assert table.rows[1].e_u < table.rows[0].e_u

    def test_csv_lines_shape(self):
        p = builtin_problem("test2a")
        table = convergence_study(p, "fd", [8, 16])
        lines = list(table.csv_lines())
        assert lines[0] == "h,e_u,e_m,wall_time,iterations"
        assert len(lines) == 3
        assert lines[1].split(",")[4] != ""

    def test_external_reference(self, tmp_path):
        cfg = RunConfig.from_mapping(
            {"problem": "test2a", "n_space": 32, "scheme": "fd",
             "out_dir": str(tmp_path / "ref")}
        )
        p = cfg.resolve_problem()
        g = cfg.resolve_grid(p)
        u, m, history = local_newton(p, g, cfg.newton)
        write_run(cfg.out_dir, cfg, p, g, u, m, history, wall_time=0.0)
        table = convergence_study(
            p, "fd", [8, 16], reference=f"external_file:{cfg.out_dir}"
        )
        assert table.reference["kind"] == "external_file"
        assert table.rows[1].e_m < table.rows[0].e_m


class TestCompareSchemes:
    def test_both_schemes_on_smooth_problem(self):
        rep = compare_schemes(builtin_problem("test2a"), 32, problem_id="test2a")
        for scheme in ("sl", "fd"):
            entry = rep["schemes"][scheme]
            assert entry["status"] == "converged"
            assert entry["rate_fit_m"] is not None
            assert not entry["breakdown_flagged"]
            assert len(entry["history"]["e_m"]) == entry["iterations"]

    def test_nonseparable_skips_implicit_scheme(self):
        rep = compare_schemes(builtin_problem("test3"), 16, problem_id="test3")
        assert "skipped" in rep["schemes"]["fd"]
        assert rep["schemes"]["sl"]["status"] == "converged"

    def test_low_viscosity_flags_breakdown(self):
        rep = compare_schemes(builtin_problem("test2b"), 160, problem_id="test2b")
        assert rep["schemes"]["sl"]["status"] == "converged"
        fd = rep["schemes"]["fd"]
        assert fd["breakdown_flagged"]
        assert fd["status"] == "converged"
