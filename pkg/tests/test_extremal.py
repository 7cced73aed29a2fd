import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anovasel.errors import EmptyEllipsoidError, InvalidArgumentError, OutOfRangeError
from anovasel.extremal import (
    ASYMPTOTIC,
    EXACT,
    GROWING_K,
    ExtremalSolution,
    a_asymptotic_fixed_k,
    a_asymptotic_growing_k,
    a_exact,
    asymptotic_constant,
    asymptotic_solution,
    profile_weights,
    solve_extremal_exact,
    solve_r_star,
    theta_star_asymptotic,
    weights,
)
from anovasel.lattice import EllipsoidSpec, enumerate_ball, sobolev_coefficient, support_radius
from anovasel.selector import selection_target

S11 = EllipsoidSpec(1, 1.0)
S21 = EllipsoidSpec(2, 1.0)


def qp_oracle(r, spec, box):
    """Minimize sum(x^2) over x >= 0 with sum(c^2 x) <= 1 and sum(x) >= r^2 on a finite box."""
    cp = pytest.importorskip("cvxpy")
    pts = enumerate_ball(spec, box)
    c2 = sobolev_coefficient(pts, spec) ** 2
    scale = 1.0 / r ** 2  # keep the problem well scaled
    x = cp.Variable(len(pts), nonneg=True)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(x)),
                      [cp.sum(cp.multiply(c2 / scale, x)) <= 1, cp.sum(x) >= 1])
    prob.solve(solver=cp.CLARABEL)
    return pts, np.asarray(x.value) / scale


class TestExact:
    @pytest.mark.parametrize("spec,r", [(S11, 0.05), (S11, 0.02), (S21, 0.05), (EllipsoidSpec(1, 2.0), 0.01)])
    def test_matches_qp_oracle(self, spec, r):
        sol = solve_extremal_exact(r, spec, 1.0)
        pts, x = qp_oracle(r, spec, 1.5 * float(np.linalg.norm(sol.support, axis=1).max()) + 2)
        ref = dict(zip(map(tuple, pts.tolist()), x))
        got = dict(zip(map(tuple, sol.support.tolist()), sol.theta_sq))
        for p, v in ref.items():
            assert got.get(p, 0.0) == pytest.approx(v, abs=1e-6 * sol.theta_sq.max())
        assert np.sum(sol.theta_sq ** 2) == pytest.approx(np.sum(x ** 2), rel=1e-5)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from([(1, 1.0), (1, 2.0), (2, 1.0), (2, 2.0), (3, 1.0), (1, 1.5)]),
           st.floats(0.05, 0.95))
    def test_residuals(self, ks, frac):
        spec = EllipsoidSpec(*ks)
        r = frac * spec.r_max
        sol = solve_extremal_exact(r, spec, 1e-3)
        res_ball, res_ell = sol.residuals()
        assert res_ball < 1e-8 and res_ell < 1e-8
        assert np.all(sol.theta_sq > 0)
        # profile shape a0^2 (1 - (c/T)^2)
        c = sobolev_coefficient(sol.support, spec)
        np.testing.assert_allclose(sol.theta_sq, sol.a0_sq * (1 - (c / sol.T) ** 2), rtol=1e-9)

    def test_near_supremum_concentrates_on_lowest_shell(self):
        # the +-1 shell carries all the mass only in the limit r -> r_max
        fracs = []
        for f in (0.9, 0.99, 0.999, 0.99999):
            sol = solve_extremal_exact(f * S11.r_max, S11, 1.0)
            low = np.abs(sol.support[:, 0]) == 1
            fracs.append(sol.theta_sq[low].sum() / sol.theta_sq.sum())
        assert fracs == sorted(fracs) and fracs[-1] > 1 - 1e-4

    def test_example_k1(self):
        sol = solve_extremal_exact(0.05, S11, 1e-2)
        assert max(sol.residuals()) < 1e-8

    def test_support_size_k2(self):
        sol = solve_extremal_exact(0.003, S21, 1e-4)
        area = math.pi * support_radius(0.003, S21) ** 2
        assert abs(len(sol.support) / area - 1) < 0.10

    @pytest.mark.parametrize("r", [0.0, -0.1, S11.r_max, 0.2])
    def test_inadmissible(self, r):
        with pytest.raises(EmptyEllipsoidError):
            solve_extremal_exact(r, S11, 1.0)

    def test_readonly(self):
        sol = solve_extremal_exact(0.05, S11, 1.0)
        with pytest.raises(ValueError):
            sol.theta_sq[0] = 1.0


class TestA:
    def test_single_index(self):
        sol = ExtremalSolution(0.1, 0.5, S11, 1.0, 2.0, np.array([[1]]), np.array([0.3]), 0.0)
        assert a_exact(sol) == pytest.approx(0.3 / (math.sqrt(2) * 0.25))

    def test_eps_scaling(self):
        a1 = solve_extremal_exact(0.05, S11, 1e-2).a_value
        a2 = solve_extremal_exact(0.05, S11, 5e-3).a_value
        assert a2 == pytest.approx(4 * a1, rel=1e-12)

    def test_constant(self):
        assert asymptotic_constant(S11) == pytest.approx(math.sqrt(3 * math.pi / 5 ** 1.5), rel=1e-12)
        assert asymptotic_constant(S11) == pytest.approx(0.91814, abs=5e-6)

    def test_power_laws(self):
        for spec in [S11, S21, EllipsoidSpec(3, 2.0)]:
            p = 2 + spec.k / (2 * spec.sigma)
            a = a_asymptotic_fixed_k(0.01, spec, 1e-3)
            assert a_asymptotic_fixed_k(0.02, spec, 1e-3) == pytest.approx(2 ** p * a, rel=1e-12)
            assert a_asymptotic_fixed_k(0.01, spec, 5e-4) == pytest.approx(4 * a, rel=1e-12)
            assert a_asymptotic_growing_k(0.01, spec, 5e-4) == pytest.approx(
                4 * a_asymptotic_growing_k(0.01, spec, 1e-3), rel=1e-12)

    def test_growing_k_limit(self):
        ratios = [a_asymptotic_growing_k(0.01, EllipsoidSpec(k, 1.0), 1e-3)
                  / a_asymptotic_fixed_k(0.01, EllipsoidSpec(k, 1.0), 1e-3) for k in (20, 40, 80)]
        gaps = [abs(x - 1) for x in ratios]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.05

    def test_exact_vs_asymptotic_converges(self):
        gaps = [abs(solve_extremal_exact(r, S11, 1e-2).a_value / a_asymptotic_fixed_k(r, S11, 1e-2) - 1)
                for r in (0.1, 0.05, 0.02, 0.01)]
        assert gaps == sorted(gaps, reverse=True)
        assert gaps[2] < 0.05

    @pytest.mark.xfail(strict=True, reason="lattice effects at r=0.05 leave a 7.5% gap; see notes")
    def test_exact_vs_asymptotic_at_005(self):
        a = solve_extremal_exact(0.05, S11, 1e-2).a_value
        assert abs(a / a_asymptotic_fixed_k(0.05, S11, 1e-2) - 1) < 0.05

    def test_continuity_envelope(self):
        r = 0.02
        a = solve_extremal_exact(r, S11, 1.0).a_value
        gam = [solve_extremal_exact((1 + dl) * r, S11, 1.0).a_value / a - 1 for dl in (0.04, 0.01, 0.0025)]
        assert gam == sorted(gam, reverse=True) and gam[-1] < 0.02


class TestAsymptoticProfile:
    def test_outside_support_zero(self):
        rad = support_radius(0.003, S21)
        far = np.array([[int(rad) + 1, 1], [int(rad), int(rad)]])
        assert np.all(theta_star_asymptotic(far, 0.003, S21) == 0)

    def test_max_at_lowest_frequency(self):
        pts = enumerate_ball(S21, 20.0)
        v = theta_star_asymptotic(pts, 0.003, S21)
        assert np.abs(pts[np.argmax(v)]).tolist() == [1, 1]

    def test_sum_close_to_r2(self):
        pts = enumerate_ball(S21, support_radius(0.003, S21))
        total = theta_star_asymptotic(pts, 0.003, S21).sum()
        assert abs(total / 0.003 ** 2 - 1) < 0.10

    def test_solution_object(self):
        sol = asymptotic_solution(0.003, S21, 1e-4)
        assert sol.mode == ASYMPTOTIC
        assert sol.a_value == pytest.approx(a_asymptotic_fixed_k(0.003, S21, 1e-4))
        sol_g = asymptotic_solution(0.003, S21, 1e-4, GROWING_K)
        assert sol_g.a_value == pytest.approx(a_asymptotic_growing_k(0.003, S21, 1e-4))

    def test_support_finiteness(self):
        vals = [len(solve_extremal_exact(r, S21, 1.0).support) * r ** 2 for r in (0.02, 0.01, 0.005, 0.0025)]
        assert max(vals) / min(vals) < 2


class TestWeights:
    def test_exact_normalization(self):
        w = profile_weights(solve_extremal_exact(0.01, S21, 1e-4))
        assert abs(np.sum(w.weights ** 2) - 0.5) < 1e-10

    def test_single_index(self):
        w = weights(np.array([[3]]), np.array([0.2]), 5.0, 0.1)
        assert w.weights[0] == pytest.approx(1 / math.sqrt(2))

    def test_scale_free(self):
        sol1 = solve_extremal_exact(0.02, S11, 1e-2)
        sol2 = solve_extremal_exact(0.02, S11, 2e-2)
        w1, w2 = profile_weights(sol1), profile_weights(sol2)
        assert np.sum(w2.weights ** 2) == pytest.approx(np.sum(w1.weights ** 2), abs=1e-12)
        np.testing.assert_allclose(w1.weights, w2.weights, rtol=1e-12)

    def test_all_zero(self):
        with pytest.raises(InvalidArgumentError):
            weights(np.array([[1], [2]]), np.zeros(2), 1.0, 1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(1e-6, 10.0), min_size=1, max_size=40), st.floats(1e-6, 1.0))
    def test_normalization_property(self, vals, eps):
        pts = np.arange(1, len(vals) + 1)[:, None]
        w = weights(pts, np.array(vals), 3.0, eps)
        assert abs(np.sum(w.weights ** 2) - 0.5) < 1e-10


class TestRStar:
    def test_example(self):
        target = (1 + math.sqrt(1 - 0.676)) * math.sqrt(2 * math.log(1225))
        assert selection_target(50, 2, 0.676) == pytest.approx(target)
        r = solve_r_star(target, S21, 1e-4, ASYMPTOTIC)
        assert 1e-3 < r < 1e-2
        assert a_asymptotic_fixed_k(r, S21, 1e-4) == pytest.approx(target, rel=1e-10)

    def test_power_law_inversion(self):
        r = solve_r_star(5.0, S21, 1e-4)
        assert solve_r_star(5.0 * 2 ** 3, S21, 1e-4) == pytest.approx(2 * r, rel=1e-10)

    @pytest.mark.parametrize("spec,target,eps", [(S21, 7.0, 1e-4), (S11, 7.0, 1e-3)])
    def test_exact_forward(self, spec, target, eps):
        r = solve_r_star(target, spec, eps, EXACT)
        assert a_exact(solve_extremal_exact(r, spec, eps)) == pytest.approx(target, rel=1e-6)

    def test_unreachable(self):
        with pytest.raises(OutOfRangeError):
            solve_r_star(1e12, S11, 1e-2, ASYMPTOTIC)
        with pytest.raises(OutOfRangeError):
            solve_r_star(1e12, S11, 1e-2, EXACT)
