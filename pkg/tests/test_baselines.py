import math

import numpy as np
import pytest

from minmaxalloc.baselines import (
    BaselineState,
    dynamic_opt,
    entropic_step,
    equal_step,
    fkm_gradient_estimate,
    fkm_project_center,
    fkm_safe_delta,
    fkm_step,
    linear_minimizer,
    ocg_step,
    ogd_step,
    omd_step,
    project_feasible,
    subgradient_max,
)
from minmaxalloc.core import Allocation, CostFunction

from helpers import reciprocal_cost

CONSTANT = CostFunction(lambda x: 3.0, domain_floor=0.0)


class TestSubgradientMax:
    def test_straggler_slope(self):
        # Straggler has f(x) = 2/x; analytic derivative at 0.5 is -8.
        costs = [reciprocal_cost(1.0), reciprocal_cost(2.0)]
        g = subgradient_max(costs, Allocation((0.5, 0.5)))
        assert g[0] == 0.0
        assert g[1] == pytest.approx(-8.0, abs=1e-4)

    def test_constant_cost_gives_zero_vector(self):
        g = subgradient_max([CONSTANT, CONSTANT], Allocation((0.5, 0.5)))
        assert g == [0.0, 0.0]

    def test_tie_supported_on_lowest_index(self):
        costs = [reciprocal_cost(1.0), reciprocal_cost(1.0)]
        g = subgradient_max(costs, Allocation((0.5, 0.5)))
        assert g[1] == 0.0
        assert g[0] != 0.0

    def test_clamps_stencil_at_floor(self):
        costs = [reciprocal_cost(1.0, floor=1e-3), reciprocal_cost(1.0, floor=1e-3)]
        g = subgradient_max(costs, Allocation((0.0, 0.5)))
        assert g[0] < -1e4

    def test_degenerate_window_raises(self):
        squeezed = CostFunction(lambda x: 1.0 - x, domain_floor=1.0)
        with pytest.raises(ValueError, match="stencil"):
            subgradient_max([squeezed], Allocation((1.0,)))


class TestProjectFeasible:
    def test_interior_point_unchanged(self):
        assert project_feasible([0.2, 0.3]).shares == pytest.approx((0.2, 0.3))

    def test_budget_face(self):
        assert project_feasible([0.5, 0.7]).shares == pytest.approx((0.4, 0.6))

    def test_negative_clamped(self):
        assert project_feasible([-0.1, 0.5]).shares == pytest.approx((0.0, 0.5))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            project_feasible([float("nan"), 0.2])

    def test_idempotent(self):
        rng = np.random.default_rng(31)
        for _ in range(300):
            v = rng.uniform(-1.0, 2.0, size=int(rng.integers(1, 6)))
            once = project_feasible(v).shares
            twice = project_feasible(once).shares
            assert once == pytest.approx(twice, abs=1e-12)

    def test_closest_among_random_feasible_points(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            d = int(rng.integers(2, 5))
            v = rng.uniform(-1.0, 2.0, size=d)
            p = np.array(project_feasible(v).shares)
            best = np.linalg.norm(v - p)
            for _ in range(20):
                raw = rng.uniform(0.0, 1.0, size=d)
                y = raw / max(raw.sum(), 1.0) * rng.uniform(0.0, 1.0)
                assert best <= np.linalg.norm(v - y) + 1e-12

    def test_kkt_structure(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            d = int(rng.integers(2, 12))
            v = rng.uniform(-1.0, 1.5, size=d)
            p = np.array(project_feasible(v).shares)
            assert p.min() >= 0.0 and p.sum() <= 1.0 + 1e-9
            if p.sum() < 1.0 - 1e-9:
                assert p == pytest.approx(np.maximum(v, 0.0), abs=1e-12)
            else:
                active = p > 0.0
                theta = v[active] - p[active]
                assert theta.max() - theta.min() <= 1e-9
                assert theta.max() >= -1e-9
                assert np.all(v[~active] <= theta.max() + 1e-9)


class TestOgdStep:
    def test_zero_subgradient_is_fixed_point(self):
        state = BaselineState(Allocation((0.3, 0.4)), step_size=0.02)
        out = ogd_step(state, [CONSTANT, CONSTANT])
        assert out.shares == pytest.approx((0.3, 0.4))

    def test_hand_projected_step(self):
        state = BaselineState(Allocation((0.5, 0.5)), step_size=0.02)
        costs = [CONSTANT, reciprocal_cost(2.0)]
        out = ogd_step(state, costs)
        assert out.shares == pytest.approx((0.42, 0.58), abs=1e-6)

    def test_always_feasible(self):
        rng = np.random.default_rng(43)
        for _ in range(300):
            n = int(rng.integers(2, 6))
            raw = rng.uniform(0.05, 1.0, size=n)
            shares = raw / raw.sum()
            costs = [reciprocal_cost(float(s)) for s in rng.uniform(0.2, 3.0, size=n)]
            state = BaselineState(Allocation(tuple(shares)), step_size=float(rng.uniform(0.005, 0.1)))
            out = ogd_step(state, costs)
            assert sum(out.shares) <= 1.0 + 1e-9
            assert min(out.shares) >= 0.0


class TestOmdStep:
    def test_zero_gradient_is_fixed_point(self):
        state = BaselineState(Allocation((0.5, 0.5)), step_size=0.02)
        out = omd_step(state, [CONSTANT, CONSTANT], weight=1.0)
        assert out.shares == pytest.approx((0.5, 0.5))

    def test_entropic_closed_form(self):
        log_next = entropic_step([math.log(0.5), math.log(0.5)], [1.0, 0.0], 1.0)
        shares = [math.exp(v) for v in log_next]
        denom = 1.0 + math.exp(-1.0)
        assert shares == pytest.approx((math.exp(-1.0) / denom, 1.0 / denom))
        assert shares[0] == pytest.approx(0.26894, abs=1e-5)

    def test_output_positive_and_normalized(self):
        # Draws keep |g|/weight inside double-exponent range; beyond it the
        # mathematically positive weights underflow to literal zero.
        rng = np.random.default_rng(47)
        for _ in range(300):
            n = int(rng.integers(2, 6))
            raw = rng.uniform(0.3, 1.0, size=n)
            shares = raw / raw.sum()
            costs = [reciprocal_cost(float(s)) for s in rng.uniform(0.2, 3.0, size=n)]
            state = BaselineState(Allocation(tuple(shares)), step_size=0.02)
            out = omd_step(state, costs, weight=float(rng.uniform(5.0, 50.0)))
            assert min(out.shares) > 0.0
            assert sum(out.shares) == pytest.approx(1.0, abs=1e-9)

    def test_zero_share_rejected(self):
        state = BaselineState(Allocation((0.0, 0.5)), step_size=0.02)
        with pytest.raises(ValueError, match="zero shares"):
            omd_step(state, [reciprocal_cost(1.0), reciprocal_cost(1.0)])

    def test_agrees_with_ogd_in_direction(self):
        # Small steps on a smooth instance move the same way.
        rng = np.random.default_rng(53)
        for _ in range(50):
            n = 3
            raw = rng.uniform(0.2, 1.0, size=n)
            shares = tuple(raw / raw.sum())
            costs = [reciprocal_cost(float(s), floor=1e-6) for s in rng.uniform(0.5, 2.0, size=n)]
            ogd = BaselineState(Allocation(shares), step_size=1e-4)
            omd = BaselineState(Allocation(shares), step_size=1e-4)
            x_ogd = np.array(ogd_step(ogd, costs).shares)
            x_omd = np.array(omd_step(omd, costs, weight=1e4).shares)
            base = np.array(shares)
            inner = float(np.dot(x_omd - base, x_ogd - base))
            assert inner > 0.0


class TestFkm:
    def test_gradient_estimate_formula(self):
        est = fkm_gradient_estimate(2, 0.1, 4.0, (1.0, 0.0))
        assert est == pytest.approx((80.0, 0.0))

    def test_zero_cost_means_no_center_movement(self):
        rng = np.random.default_rng(59)
        state = BaselineState(Allocation.equal(3), step_size=0.01, fkm_delta=0.05)
        fkm_step(state, 0.0, rng, domain_floor=1e-9)
        center_before = state.fkm_center
        fkm_step(state, 0.0, rng, domain_floor=1e-9)
        assert state.fkm_center == pytest.approx(center_before)

    def test_played_points_feasible_and_evaluable(self):
        rng = np.random.default_rng(61)
        floor = 1e-6
        state = BaselineState(Allocation.equal(4), step_size=0.005, fkm_delta=0.05)
        for _ in range(300):
            out = fkm_step(state, float(rng.uniform(0.0, 5.0)), rng, domain_floor=floor)
            assert sum(out.shares) <= 1.0 + 1e-9
            assert min(out.shares) >= floor

    def test_safe_delta_caps_large_radius(self):
        assert fkm_safe_delta(5, 1e-9, 0.05) == pytest.approx(0.05)
        capped = fkm_safe_delta(40, 1e-9, 0.05)
        assert capped < 0.05
        fkm_project_center([1.0 / 40] * 40, 40, 1e-9, capped)

    def test_center_projection_respects_margins(self):
        rng = np.random.default_rng(67)
        n, floor, delta = 4, 1e-6, 0.05
        for _ in range(200):
            v = rng.uniform(-0.5, 1.0, size=n)
            center = fkm_project_center(list(v), n, floor, delta)
            assert min(center) >= floor + delta - 1e-12
            assert sum(center) <= 1.0 - delta * math.sqrt(n) + 1e-12

    def test_estimator_matches_gradient_on_quadratic(self):
        # For a quadratic, the one-point estimator is unbiased for the true
        # gradient: the affine gradient averages out over the ball.
        rng = np.random.default_rng(71)
        n, delta = 4, 0.05
        a = np.array([1.0, -2.0, 0.5, 3.0])
        m = np.diag([2.0, 1.0, 3.0, 0.5])
        x = np.array([0.2, 0.3, 0.1, 0.25])
        grad_true = a + 2.0 * m @ x

        draws = rng.standard_normal((100_000, n))
        draws /= np.linalg.norm(draws, axis=1, keepdims=True)
        points = x + delta * draws
        values = points @ a + np.einsum("ij,jk,ik->i", points, m, points)
        est = (n / delta) * (values[:, None] * draws).mean(axis=0)
        assert np.linalg.norm(est - grad_true) <= 0.05 * np.linalg.norm(grad_true)


class TestOcgStep:
    def test_vertex_on_most_negative_coordinate(self):
        assert linear_minimizer([-3.0, -1.0, -2.0]) == [1.0, 0.0, 0.0]

    def test_origin_when_no_negative_coordinate(self):
        assert linear_minimizer([0.5, 0.0, 2.0]) == [0.0, 0.0, 0.0]

    def test_iterates_stay_feasible_and_positive(self):
        rng = np.random.default_rng(73)
        costs = [reciprocal_cost(float(s)) for s in (0.5, 1.0, 2.0)]
        state = BaselineState(Allocation.equal(3), step_size=0.02)
        for _ in range(100):
            out = ocg_step(state, costs)
            assert sum(out.shares) <= 1.0 + 1e-9
            assert min(out.shares) > 0.0

    def test_first_mix_keeps_half_of_start(self):
        costs = [reciprocal_cost(1.0), reciprocal_cost(5.0)]
        state = BaselineState(Allocation.equal(2), step_size=0.02)
        out = ocg_step(state, costs)
        assert out.shares == pytest.approx((0.25, 0.75))


class TestEqualStep:
    def test_five(self):
        assert equal_step(5).shares == pytest.approx((0.2,) * 5)

    def test_single(self):
        assert equal_step(1).shares == (1.0,)

    def test_sums_to_one(self):
        for n in (2, 3, 7, 11):
            assert sum(equal_step(n).shares) == pytest.approx(1.0, abs=1e-12)


class TestDynamicOpt:
    def test_closed_form_pair(self):
        costs = [reciprocal_cost(1.0), reciprocal_cost(2.0)]
        alloc, level = dynamic_opt(costs, 1e-10)
        assert level == pytest.approx(3.0, abs=1e-6)
        assert alloc.shares == pytest.approx((1 / 3, 2 / 3), abs=1e-6)

    def test_identical_agents_get_equal_shares(self):
        costs = [reciprocal_cost(1.5)] * 4
        alloc, _ = dynamic_opt(costs, 1e-10)
        assert alloc.shares == pytest.approx((0.25,) * 4, abs=1e-6)

    def test_single_agent(self):
        costs = [reciprocal_cost(2.0, 0.5)]
        alloc, level = dynamic_opt(costs, 1e-10)
        assert alloc.shares == (1.0,)
        assert level == pytest.approx(2.5)

    def test_no_feasible_point_beats_level(self):
        rng = np.random.default_rng(79)
        costs = [reciprocal_cost(float(s), float(b)) for s, b in
                 zip(rng.uniform(0.2, 2.0, size=3), rng.uniform(0.0, 1.0, size=3))]
        _, level = dynamic_opt(costs, 1e-10)
        for _ in range(1000):
            raw = rng.uniform(0.01, 1.0, size=3)
            shares = raw / raw.sum()
            worst = max(f(s) for f, s in zip(costs, shares))
            assert worst >= level - 1e-9

    def test_matches_grid_search_small(self):
        rng = np.random.default_rng(83)
        for _ in range(20):
            n = int(rng.integers(2, 4))
            scales = rng.uniform(0.2, 2.0, size=n)
            offsets = rng.uniform(0.0, 1.0, size=n)
            costs = [reciprocal_cost(float(s), float(b), floor=1e-6)
                     for s, b in zip(scales, offsets)]
            _, level = dynamic_opt(costs, 1e-10)
            lo = max(s + b for s, b in zip(scales, offsets))
            hi = max(n * s + b for s, b in zip(scales, offsets))
            grid = np.arange(lo, hi + 1e-3, 1e-3)
            shares_needed = np.minimum(
                1.0, scales[None, :] / np.maximum(grid[:, None] - offsets[None, :], 1e-30)
            ).sum(axis=1)
            feasible = grid[shares_needed <= 1.0]
            grid_level = feasible[0] if len(feasible) else hi
            assert abs(level - grid_level) <= 1e-3
