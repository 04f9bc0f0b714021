import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsedepth.errors import InfeasibleBudgetError, ParameterError
from sparsedepth.operators import apply_diff
from sparsedepth.raster import synth_scene
from sparsedepth.sampling import (
    SaliencyField,
    SamplingPattern,
    draw_pattern,
    edge_saliency,
    gradient_magnitude,
    greedy_pattern,
    grid_pattern,
    optimal_probs,
    pca_saliency,
    solve_tau,
    two_stage_pattern,
    uniform_probs,
)
from sparsedepth.solver import SolverParams


class TestUniformProbs:
    def test_constant_field(self):
        p = uniform_probs((4, 4), 0.2)
        assert np.array_equal(p, np.full((4, 4), 0.2))
        assert p.mean() == pytest.approx(0.2, abs=1e-12)

    def test_boundary_value_valid(self):
        assert uniform_probs((4, 4), 0.999).max() == 0.999

    @pytest.mark.parametrize("xi", [0.0, 1.0, -0.2, 1.5])
    def test_out_of_range_rejected(self, xi):
        with pytest.raises(ParameterError):
            uniform_probs((4, 4), xi)


class TestGridPattern:
    def test_quarter_ratio_8x8(self):
        pat = grid_pattern((8, 8), 0.25)
        assert pat.mask.sum() == 16
        assert pat.realized_ratio == 0.25

    def test_full_sampling(self):
        assert grid_pattern((6, 6), 1.0).mask.all()

    def test_point_one_on_100x100(self):
        pat = grid_pattern((100, 100), 0.1)
        assert pat.realized_ratio == pytest.approx(0.1156)

    @pytest.mark.parametrize("xi", [0.25, 0.1, 0.04])
    def test_realized_within_15_percent(self, xi):
        pat = grid_pattern((120, 120), xi)
        assert abs(pat.realized_ratio - xi) <= 0.15 * xi


class TestDrawPattern:
    def test_extreme_probs(self):
        assert not draw_pattern(np.zeros((8, 8)), 0).mask.any()
        assert draw_pattern(np.ones((8, 8)), 0).mask.all()

    def test_deterministic_per_seed(self):
        p = uniform_probs((32, 32), 0.3)
        a = draw_pattern(p, 7, stream=1)
        b = draw_pattern(p, 7, stream=1)
        assert np.array_equal(a.mask, b.mask)
        assert not np.array_equal(a.mask, draw_pattern(p, 8, stream=1).mask)

    def test_invalid_probs_rejected(self):
        with pytest.raises(ParameterError):
            draw_pattern(np.full((4, 4), 1.5), 0)

    def test_mask_binary_and_target_recorded(self):
        pat = draw_pattern(uniform_probs((16, 16), 0.4), 3)
        assert set(np.unique(pat.mask)) <= {0.0, 1.0}
        assert pat.target_ratio == pytest.approx(0.4, abs=1e-12)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            SamplingPattern(mask=np.zeros((4, 4)), probs=np.zeros((4, 5)),
                            target_ratio=0.5)


class TestGradientMagnitude:
    def test_constant_zero(self):
        assert not gradient_magnitude(np.full((6, 6), 0.3)).a.any()

    def test_unit_step_values(self):
        x = np.zeros((8, 8))
        x[:, 4:] = 1.0
        vals = np.unique(gradient_magnitude(x).a)
        assert set(vals) == {0.0, 1.0}

    def test_direct_formula(self, rng):
        x = rng.random((6, 6))
        dx, dy = apply_diff(x)
        assert np.array_equal(gradient_magnitude(x).a, np.hypot(dx, dy))

    def test_negative_saliency_rejected(self):
        with pytest.raises(ParameterError):
            SaliencyField(a=np.array([[-1.0, 0.0]]))


class TestEdgeSaliency:
    def test_covers_both_sides_of_edge(self):
        x = np.zeros((8, 8))
        x[:, 4:] = 1.0
        a = edge_saliency(x).a
        # Forward difference marks columns 3 and 7; the both-sided
        # saliency must additionally mark columns 4 and 0.
        assert a[:, 3].all() and a[:, 4].all()
        assert a[:, 7].all() and a[:, 0].all()
        assert not a[:, 1:3].any() and not a[:, 5:7].any()


class TestGreedyPattern:
    def test_constant_map_degenerate(self):
        pat = greedy_pattern(np.full((8, 8), 0.5))
        assert pat.degenerate and not pat.mask.any()

    def test_ellipse_boundary_only(self):
        x = synth_scene("ellipse", 64, 64, 0)
        pat = greedy_pattern(x)
        g = gradient_magnitude(x).a
        assert np.array_equal(pat.mask, (g > 0.1 * g.max()).astype(float))
        assert 0 < pat.mask.sum() < x.size / 4

    def test_invalid_alpha_rejected(self):
        with pytest.raises(ParameterError):
            greedy_pattern(np.zeros((8, 8)), alpha=1.0)


class TestSolveTau:
    def test_closed_form_no_saturation(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        tau = solve_tau(a, xi=0.5)  # budget 2
        assert tau == pytest.approx(0.2, abs=1e-15)
        assert np.allclose(np.minimum(tau * a, 1), [0.2, 0.4, 0.6, 0.8])

    def test_closed_form_with_saturation(self):
        a = np.array([10.0, 0.1, 0.1, 0.1])
        tau = solve_tau(a, xi=0.5)  # budget 2
        assert tau == pytest.approx(10 / 3, rel=1e-14)
        assert np.allclose(np.minimum(tau * a, 1), [1, 1 / 3, 1 / 3, 1 / 3])

    def test_constant_saliency_reduces_to_uniform(self):
        p = optimal_probs(np.full((5, 5), 3.7), xi=0.2)
        assert np.allclose(p, 0.2)

    def test_infeasible_budget_raises(self):
        with pytest.raises(InfeasibleBudgetError):
            solve_tau(np.array([1.0, 0.0, 0.0, 0.0]), xi=0.75)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.05, 0.95))
    def test_root_property(self, seed, xi):
        rng = np.random.default_rng(seed)
        a = rng.random(100) * (rng.random(100) > 0.2)
        if np.count_nonzero(a) < xi * a.size:
            return
        tau = solve_tau(a, xi)
        g = np.minimum(tau * a, 1.0).sum() - xi * a.size
        assert abs(g) <= 1e-9 * a.size


class TestOptimalProbs:
    def test_budget_exact(self, rng):
        a = rng.random((16, 16))
        p = optimal_probs(a, 0.3)
        assert p.mean() == pytest.approx(0.3, abs=1e-9)

    def test_zero_saliency_never_sampled(self):
        a = np.array([0.0, 1.0, 2.0, 3.0])
        p = optimal_probs(a, 0.5)
        assert p[0] == 0.0

    def test_infeasible_fallback_keeps_budget(self):
        a = np.zeros((4, 4))
        a[0, 0] = 5.0
        p = optimal_probs(a, 0.5)
        assert p[0, 0] == 1.0
        assert p.mean() == pytest.approx(0.5, abs=1e-12)

    def test_variance_objective_beats_uniform(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        p_opt = optimal_probs(a, 0.5)
        obj_opt = np.sum(a**2 / p_opt)
        obj_uni = np.sum(a**2 / 0.5)
        assert obj_opt <= obj_uni + 1e-12


class TestPcaSaliency:
    def test_constant_image_degenerate(self):
        field = pca_saliency(np.full((32, 32), 0.4))
        assert field.degenerate
        assert not field.a.any()

    def test_step_edge_max_near_edge(self):
        x = np.zeros((32, 32))
        x[:, 16:] = 1.0
        a = pca_saliency(x).a
        col = np.unravel_index(np.argmax(a), a.shape)[1]
        assert abs(col - 15.5) <= 1.5

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ParameterError):
            pca_saliency(np.zeros((16, 16)), patch_side=4)
        with pytest.raises(ParameterError):
            pca_saliency(np.zeros((16, 16)), patch_side=7, d_prime=50)


@pytest.fixture(scope="module")
def two_stage_result():
    truth = synth_scene("triangle-ellipse", 64, 64, 1)
    params = SolverParams(tol=1e-3, max_iter=200)
    return truth, two_stage_pattern(lambda m: m * truth, truth.shape,
                                    xi=0.2, seed=5, params=params)


class TestTwoStage:
    @pytest.fixture
    def result(self, two_stage_result):
        return two_stage_result

    def test_stage_masks_disjoint_and_combined(self, result):
        truth, (pattern, obs, pilot) = result
        assert set(np.unique(pattern.mask)) <= {0.0, 1.0}
        assert np.array_equal(obs.mask, pattern.mask)
        # values outside the mask are zero; inside they match the truth
        assert np.array_equal(obs.values, pattern.mask * truth)

    def test_pilot_is_plausible(self, result):
        truth, (_, _, pilot) = result
        assert pilot.shape == truth.shape
        assert np.mean((pilot - truth) ** 2) < 0.05

    def test_realized_ratio_near_target(self, result):
        _, (pattern, _, _) = result
        assert abs(pattern.realized_ratio - 0.2) < 0.05

    def test_deterministic_per_seed(self):
        truth = synth_scene("ellipse", 64, 64, 2)
        params = SolverParams(tol=1e-2, max_iter=60)
        a = two_stage_pattern(lambda m: m * truth, truth.shape, 0.2, 9,
                              params=params)[0]
        b = two_stage_pattern(lambda m: m * truth, truth.shape, 0.2, 9,
                              params=params)[0]
        assert np.array_equal(a.mask, b.mask)

    def test_invalid_pilot_saliency_rejected(self):
        with pytest.raises(ParameterError):
            two_stage_pattern(lambda m: m, (64, 64), 0.2, 0, pilot_saliency="bogus")

    def test_stage2_avoids_stage1_support(self):
        # Degenerate-pilot route: constant truth makes the pilot constant,
        # so stage 2 falls back to uniform off-support probabilities.
        truth = np.full((64, 64), 0.5)
        params = SolverParams(tol=1e-2, max_iter=30)
        pattern, obs, pilot = two_stage_pattern(
            lambda m: m * truth, truth.shape, 0.3, 4, params=params)
        assert pattern.mask.max() <= 1.0  # disjoint stages never overlap


class TestStatisticalProperties:
    def test_probs_mean_equals_target(self, rng):
        a = rng.random((32, 32))
        for xi in (0.1, 0.25, 0.5):
            assert optimal_probs(a, xi).mean() == pytest.approx(xi, abs=1e-9)

    def test_realized_ratio_concentrates(self):
        p = uniform_probs((64, 64), 0.3)
        ratios = [draw_pattern(p, s).realized_ratio for s in range(200)]
        assert np.mean(ratios) == pytest.approx(0.3, abs=0.005)

    def test_estimator_unbiased(self, rng):
        # Y = sum_j (I_j / p_j) a_j x_j has expectation mu = sum_j a_j x_j.
        n = 64
        a = rng.random(n) + 0.1
        x = rng.random(n)
        p = optimal_probs(a, 0.4).ravel()
        keep = p > 0
        draws = 20000
        u = np.random.Generator(np.random.Philox(key=[11, 0])).random((draws, n))
        ind = (u < p).astype(float)
        y = (ind[:, keep] / p[keep] * (a * x)[keep]).sum(axis=1)
        mu = float(np.sum(a * x))
        stderr = y.std(ddof=1) / np.sqrt(draws)
        assert abs(y.mean() - mu) <= 3 * stderr
