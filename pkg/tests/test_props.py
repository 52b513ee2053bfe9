import numpy as np

from mfg_newton.props import run_props


class TestBattery:
    def test_all_checks_pass(self):
        results = run_props(seed=0)
        failing = [r.line() for r in results if not r.passed]
        assert not failing, "\n".join(failing)

    def test_deterministic_for_fixed_seed(self):
        a = run_props(seed=7)
        b = run_props(seed=7)
        assert [r.name for r in a] == [r.name for r in b]
        np.testing.assert_array_equal([r.value for r in a], [r.value for r in b])

    def test_covers_both_dimensions(self):
        names = [r.name for r in run_props(seed=0)]
        assert any("(1d)" in n for n in names)
        assert any("(2d)" in n for n in names)
        assert len(names) == 24

    def test_quadrature_defect_is_quadratic_in_dt(self):
        results = {r.name: r for r in run_props(seed=3)}
        for dim in (1, 2):
            r = results[f"noise quadrature defect order in dt ({dim}d)"]
            assert abs(r.value - 2.0) < 0.05

    def test_result_lines_render(self):
        for r in run_props(seed=0):
            line = r.line()
            assert line.startswith(("pass", "FAIL"))
            assert r.name in line
