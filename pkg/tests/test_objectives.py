import json

import numpy as np
import pytest

from abo.errors import InvalidSpecError
from abo.kernels import KernelSpec, rkhs_norm_of_expansion
from abo.objectives import (
    ObjectiveSpec,
    bump_linear_preset,
    evaluate_objective,
    make_gp_sample_function,
    make_rkhs_function,
    regret_metrics,
)


def spec_1d(theta=0.1):
    return KernelSpec(np.array([theta]))


class TestEvaluate:
    def test_lone_center(self):
        # seed chosen so the single weight draw is positive
        obj = make_rkhs_function(spec_1d(), m=1, target_norm=2.0, seed=1)
        center = obj.centers[0]
        assert evaluate_objective(obj, center) == pytest.approx(2.0, abs=1e-8)
        assert obj.weights[0] == pytest.approx(2.0, abs=1e-8)
        assert obj.f_max == pytest.approx(2.0, abs=1e-6)

    def test_decay_far_from_centers(self):
        obj = make_rkhs_function(spec_1d(), m=1, target_norm=2.0, seed=1)
        far = obj.centers[0] + 1.0
        assert abs(evaluate_objective(obj, far)) < 1e-6

    def test_linearity_in_weights(self):
        obj = make_rkhs_function(spec_1d(0.3), m=5, target_norm=2.0, seed=1)
        doubled = ObjectiveSpec(
            kernel=obj.kernel,
            centers=obj.centers,
            weights=obj.weights * 2,
            true_norm=obj.true_norm * 2,
            f_max=obj.f_max,
            x_star=obj.x_star,
            f_min=obj.f_min,
        )
        for x in (0.1, 0.4, 0.9):
            assert evaluate_objective(doubled, [x]) == pytest.approx(
                2 * evaluate_objective(obj, [x]), rel=1e-12
            )

    def test_batch_matches_single(self):
        obj = make_rkhs_function(spec_1d(0.3), m=5, target_norm=2.0, seed=1)
        X = np.linspace(0, 1, 7)[:, None]
        batch = evaluate_objective(obj, X)
        for i, x in enumerate(X):
            assert batch[i] == pytest.approx(evaluate_objective(obj, x), rel=1e-12)


class TestMakeRkhsFunction:
    def test_norm_round_trip(self):
        for seed in range(5):
            obj = make_rkhs_function(spec_1d(), m=30, target_norm=2.0, seed=seed)
            norm = rkhs_norm_of_expansion(obj.kernel, obj.centers, obj.weights)
            assert norm == pytest.approx(2.0, abs=1e-8)

    def test_f_max_dominates_probes(self):
        rng = np.random.default_rng(0)
        obj = make_rkhs_function(spec_1d(), m=30, target_norm=2.0, seed=0)
        probes = rng.uniform(size=(100_000, 1))
        vals = evaluate_objective(obj, probes)
        assert vals.max() <= obj.f_max + 1e-6

    def test_sup_norm_bounded_by_rkhs_norm(self):
        rng = np.random.default_rng(1)
        for seed in range(3):
            obj = make_rkhs_function(spec_1d(), m=30, target_norm=2.0, seed=seed)
            vals = evaluate_objective(obj, rng.uniform(size=(20_000, 1)))
            assert np.abs(vals).max() <= obj.true_norm + 1e-6

    def test_distinct_seeds(self):
        a = make_rkhs_function(spec_1d(), m=10, target_norm=2.0, seed=0)
        b = make_rkhs_function(spec_1d(), m=10, target_norm=2.0, seed=1)
        assert not np.array_equal(a.weights, b.weights)

    def test_invalid_args(self):
        with pytest.raises(InvalidSpecError):
            make_rkhs_function(spec_1d(), m=0, target_norm=2.0, seed=0)
        with pytest.raises(InvalidSpecError):
            make_rkhs_function(spec_1d(), m=5, target_norm=0.0, seed=0)


class TestMakeGpSampleFunction:
    def test_norm_round_trip(self):
        obj = make_gp_sample_function(spec_1d(), grid_size=30, target_norm=4.0, seed=0)
        norm = rkhs_norm_of_expansion(obj.kernel, obj.centers, obj.weights)
        assert norm == pytest.approx(4.0, abs=1e-8)

    def test_interpolates_grid_values(self):
        obj = make_gp_sample_function(spec_1d(0.5), grid_size=2, target_norm=1.0, seed=0)
        # representer weights solve K w = f_grid exactly (up to jitter), so
        # the expansion reproduces its own grid values
        vals = evaluate_objective(obj, obj.centers)
        from abo.kernels import gram_matrix

        K = gram_matrix(obj.kernel, obj.centers)
        np.testing.assert_allclose(vals, K @ obj.weights, atol=1e-8)
        assert vals[0] != vals[1]

    def test_distinct_seeds(self):
        a = make_gp_sample_function(spec_1d(), grid_size=10, target_norm=4.0, seed=0)
        b = make_gp_sample_function(spec_1d(), grid_size=10, target_norm=4.0, seed=1)
        assert not np.array_equal(a.weights, b.weights)

    def test_multidim_f_max_dominates(self):
        rng = np.random.default_rng(2)
        kernel = KernelSpec(np.full(2, 0.1))
        obj = make_gp_sample_function(kernel, grid_size=56, target_norm=4.0, seed=0)
        vals = evaluate_objective(obj, rng.uniform(size=(100_000, 2)))
        assert vals.max() <= obj.f_max + 1e-6

    def test_invalid_grid(self):
        with pytest.raises(InvalidSpecError):
            make_gp_sample_function(spec_1d(), grid_size=1, target_norm=4.0, seed=0)


class TestBumpLinearPreset:
    def test_norm(self):
        obj = bump_linear_preset()
        norm = rkhs_norm_of_expansion(obj.kernel, obj.centers, obj.weights)
        assert norm == pytest.approx(2.0, abs=1e-8)

    def test_shape(self):
        obj = bump_linear_preset()
        # global bump near the left, competing trend maximum to the right
        assert 0.1 < obj.x_star[0] < 0.35
        grid = np.linspace(0, 1, 2001)[:, None]
        vals = evaluate_objective(obj, grid)
        right = vals[grid[:, 0] > 0.6]
        assert right.max() < obj.f_max
        assert right.max() > 0.5 * obj.f_max  # a genuine local trap

    def test_deterministic(self):
        a, b = bump_linear_preset(), bump_linear_preset()
        assert np.array_equal(a.weights, b.weights)
        assert a.f_max == b.f_max


class TestSerialization:
    def test_json_round_trip(self):
        obj = make_rkhs_function(spec_1d(0.3), m=7, target_norm=2.0, seed=4)
        data = json.loads(json.dumps(obj.to_dict()))
        back = ObjectiveSpec.from_dict(data)
        assert back.f_max == obj.f_max
        assert back.true_norm == obj.true_norm
        np.testing.assert_array_equal(back.centers, obj.centers)
        np.testing.assert_array_equal(back.weights, obj.weights)
        for x in (0.2, 0.8):
            assert evaluate_objective(back, [x]) == evaluate_objective(obj, [x])


class _FakeTrace:
    def __init__(self, X):
        self.X = X


class TestRegretMetrics:
    def test_hit_optimum_immediately(self):
        obj = bump_linear_preset()
        trace = _FakeTrace([obj.x_star, [0.9], [0.5]])
        simple, cumulative = regret_metrics(trace, obj)
        assert simple[0] <= 1e-9
        assert np.all(simple <= 1e-9)

    def test_constant_regret_accumulates_linearly(self):
        obj = bump_linear_preset()
        x = np.array([0.5])
        r = obj.f_max - evaluate_objective(obj, x)
        trace = _FakeTrace([x] * 5)
        simple, cumulative = regret_metrics(trace, obj)
        np.testing.assert_allclose(cumulative, r * np.arange(1, 6), rtol=1e-12)

    def test_monotonicity(self):
        rng = np.random.default_rng(3)
        obj = bump_linear_preset()
        trace = _FakeTrace(list(rng.uniform(size=(20, 1))))
        simple, cumulative = regret_metrics(trace, obj)
        assert np.all(np.diff(simple) <= 0)
        assert np.all(np.diff(cumulative) >= 0)
        assert np.all(simple >= -1e-6)
