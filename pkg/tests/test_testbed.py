import math

import numpy as np
import pytest

from sgmopt.core import GradientUnavailable, RngStream
from sgmopt import testbed
from sgmopt.testbed import (eval_beale, eval_f1, eval_f2, eval_f3, eval_f5,
                            eval_tp1, f4_deterministic,
                            finite_difference_gradient, foxholes_matrix,
                            gradient, make_objective)

# f5 at the center of its deepest well, computed directly from the formula
# with the standard foxholes constants (frozen oracle value).
F5_AT_MINUS32 = 0.9980038388186492


class TestMakeObjective:
    @pytest.mark.parametrize("name,dim,bound", [
        ("TP1", 2, 16.0),
        ("BEALE", 2, 4.5),
        ("F1", 3, 5.12),
        ("F2", 2, 2.048),
        ("F3", 5, 5.12),
        ("F4", 30, 1.28),
        ("F5", 2, 65.536),
    ])
    def test_table(self, name, dim, bound):
        obj = make_objective(name)
        assert obj.dim == dim
        assert np.allclose(obj.domain.lo, -bound)
        assert np.allclose(obj.domain.hi, bound)

    def test_unknown_name_lists_valid(self):
        with pytest.raises(ValueError, match="TP1"):
            make_objective("nope")

    def test_stochastic_flag_only_f4(self):
        assert make_objective("F4").stochastic
        for name in ("TP1", "BEALE", "F1", "F2", "F3", "F5"):
            assert not make_objective(name).stochastic

    def test_tp1_bounds_override(self):
        obj = make_objective("TP1", bounds=1.0)
        assert np.allclose(obj.domain.hi, 1.0)
        with pytest.raises(ValueError):
            make_objective("F1", bounds=2.0)


class TestValues:
    def test_tp1(self):
        assert eval_tp1((0.0, 0.0)) == -36.0
        assert eval_tp1((math.pi, math.pi)) == pytest.approx(2 * math.pi ** 2 + 36, rel=1e-12)

    def test_beale(self):
        assert eval_beale((3.0, 0.5)) == 0.0
        assert eval_beale((0.0, 0.0)) == 14.203125

    def test_f1(self):
        assert eval_f1((0.0, 0.0, 0.0)) == 0.0
        assert eval_f1((1.0, 2.0, 3.0)) == 14.0

    def test_f2(self):
        assert eval_f2((1.0, 1.0)) == 0.0
        assert eval_f2((0.0, 0.0)) == 1.0

    def test_f3(self):
        assert eval_f3(tuple([-5.12] * 5)) == 0.0
        assert eval_f3((0.5, 0.5, 0.5, 0.5, 0.5)) == 30.0

    def test_f3_integer_valued_and_cell_constant(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            x = rng.uniform(-5.12, 5.12, size=5)
            v = eval_f3(x)
            assert v == int(v)
            # constant on the unit cell of the floor lattice
            jitter = np.floor(x) + rng.uniform(0.0, 0.999, size=5)
            assert eval_f3(jitter) == eval_f3(np.floor(x) + 0.5)

    def test_f4_zero_noise_equals_deterministic_part(self):
        class ZeroRng:
            def normal(self, size=None):
                return np.zeros(size)

        x = np.linspace(-1.2, 1.2, 30)
        assert testbed.eval_f4(x, ZeroRng()) == pytest.approx(f4_deterministic(x), rel=1e-12)
        assert f4_deterministic(np.zeros(30)) == 0.0

    def test_f4_noise_varies(self):
        x = np.zeros(30)
        v1 = testbed.eval_f4(x, RngStream(0, 0))
        v2 = testbed.eval_f4(x, RngStream(0, 1))
        assert v1 != v2

    def test_f5_at_deepest_well(self):
        assert eval_f5((-32.0, -32.0)) == pytest.approx(F5_AT_MINUS32, abs=1e-12)


class TestFoxholes:
    def test_columns(self):
        a = foxholes_matrix()
        assert tuple(a[:, 0]) == (-32.0, -32.0)
        assert tuple(a[:, 12]) == (0.0, 0.0)
        assert tuple(a[:, 24]) == (32.0, 32.0)

    def test_structure(self):
        a = foxholes_matrix()
        base = np.array([-32.0, -16.0, 0.0, 16.0, 32.0])
        assert np.array_equal(a[0], np.tile(base, 5))
        assert np.array_equal(a[1], np.repeat(base, 5))
        assert np.all(np.abs(a) <= 65.536)

    def test_every_column_is_a_deep_well(self):
        # The well at column j bottoms out near j (denominator ~ 0.002+1/j),
        # far below the ~500 background away from all wells.
        a = foxholes_matrix()
        background = eval_f5((-56.0, 48.0))
        assert background > 400.0
        vals = [eval_f5(a[:, j]) for j in range(25)]
        for j, v in enumerate(vals):
            assert v < (j + 2.0) and v < background / 10.0
        assert np.argmin(vals) == 0


class TestGradients:
    @pytest.mark.parametrize("name", ["TP1", "BEALE", "F1", "F2"])
    def test_analytic_matches_finite_differences(self, name):
        obj = make_objective(name)
        rng = np.random.default_rng(11)
        for _ in range(100):
            x = rng.uniform(obj.domain.lo * 0.9, obj.domain.hi * 0.9)
            g = gradient(obj, x)
            fd = finite_difference_gradient(obj.fn, x)
            scale = max(1.0, float(np.max(np.abs(fd))))
            assert np.max(np.abs(g - fd)) / scale < 1e-4

    def test_examples(self):
        assert tuple(gradient(make_objective("TP1"), (0.0, 0.0))) == (0.0, 0.0)
        assert tuple(gradient(make_objective("F1"), (1.0, 1.0, 1.0))) == (2.0, 2.0, 2.0)
        g = gradient(make_objective("BEALE"), (3.0, 0.5))
        assert np.max(np.abs(g)) < 1e-9

    def test_f5_uses_finite_differences(self):
        obj = make_objective("F5")
        g = gradient(obj, (-31.0, -31.0))
        assert g.shape == (2,)
        assert np.all(np.isfinite(g))

    def test_unavailable(self):
        with pytest.raises(GradientUnavailable):
            gradient(make_objective("F3"), (0.0,) * 5)
        with pytest.raises(GradientUnavailable):
            gradient(make_objective("F4"), (0.0,) * 30)


class TestKnownOptima:
    def test_records_reproduce(self):
        for name in ("TP1", "BEALE", "F1", "F2", "F3", "F5"):
            obj = make_objective(name)
            point, value = obj.known_optimum
            assert abs(obj.fn(np.asarray(point)) - value) <= 1e-9, name

    def test_f4_record_is_noise_free_part(self):
        obj = make_objective("F4")
        point, value = obj.known_optimum
        assert f4_deterministic(np.asarray(point)) == value == 0.0
