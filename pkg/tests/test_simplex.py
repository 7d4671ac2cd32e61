"""Bounded-variable simplex against hand cases, KKT conditions, and scipy."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from convexify.simplex import solve_equality_form


def scipy_objective(A, b, c, lower, upper) -> tuple[float, int]:
    res = linprog(
        -np.asarray(c, dtype=float),
        A_eq=A,
        b_eq=b,
        bounds=list(zip(lower, upper)),
        method="highs",
    )
    return (-res.fun if res.status == 0 else np.nan), res.status


def random_box_lp(rng, m=None, n=None):
    m = int(m if m is not None else rng.randint(2, 6))
    n = int(n if n is not None else m + rng.randint(1, 6))
    A = rng.standard_normal((m, n))
    lower = rng.uniform(-3.0, 0.0, n)
    upper = lower + rng.uniform(0.5, 4.0, n)
    seed_point = rng.uniform(lower, upper)
    b = A @ seed_point
    c = rng.standard_normal(n)
    return A, b, c, lower, upper


def assert_kkt(A, b, c, lower, upper, res, tol=1e-7):
    x, y, d = res.x, res.duals, res.reduced_costs
    scale = 1.0 + float(np.max(np.abs(b)))
    assert np.max(np.abs(A @ x - b)) <= tol * scale
    assert np.all(x >= lower - tol)
    assert np.all(x <= upper + tol)
    for j, s in enumerate(res.vstatus):
        if s == -1:
            assert abs(d[j]) <= tol
        elif s == 0:
            assert d[j] <= tol
            assert x[j] == pytest.approx(lower[j], abs=tol)
        else:
            assert d[j] >= -tol
            assert x[j] == pytest.approx(upper[j], abs=tol)
    at_bound = np.array(res.vstatus) != -1
    bound_vals = np.where(np.array(res.vstatus) == 1, upper, lower)
    dual_obj = y @ b + d[at_bound] @ bound_vals[at_bound]
    assert res.objective == pytest.approx(dual_obj, abs=1e-6 * (1.0 + abs(res.objective)))


class TestHandCases:
    def test_single_row_pushes_to_upper(self):
        res = solve_equality_form(
            [[1.0, 1.0]], [1.0], [1.0, 0.0], [0.0, 0.0], [0.75, 0.75]
        )
        assert res.status == "optimal"
        np.testing.assert_allclose(res.x, [0.75, 0.25], atol=1e-9)
        assert res.objective == pytest.approx(0.75, abs=1e-9)

    def test_dual_sign_on_growth_row(self):
        # maximize eps with rate - eps = 0, rate in [-1, 1]: the row dual
        # must be -1 so that the certificate weight -y is +1
        res = solve_equality_form(
            [[1.0, -1.0]], [0.0], [0.0, 1.0], [-1.0, 0.0], [1.0, 10.0]
        )
        assert res.status == "optimal"
        assert res.objective == pytest.approx(1.0, abs=1e-9)
        assert res.duals[0] == pytest.approx(-1.0, abs=1e-9)

    def test_fixed_variables_are_respected(self):
        res = solve_equality_form(
            [[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]],
            [1.3, 2.0],
            [5.0, 1.0, 1.0],
            [0.3, 0.0, 0.0],
            [0.3, 4.0, 4.0],
        )
        assert res.status == "optimal"
        assert res.x[0] == pytest.approx(0.3, abs=1e-12)
        np.testing.assert_allclose(res.x, [0.3, 1.0, 1.0], atol=1e-9)

    def test_inconsistent_rows_report_infeasible(self):
        res = solve_equality_form(
            [[1.0, 0.0], [1.0, 0.0]], [0.0, 1.0], [1.0, 1.0], [-5.0, -5.0], [5.0, 5.0]
        )
        assert res.status == "infeasible"

    def test_bounds_make_row_unreachable(self):
        res = solve_equality_form([[1.0, 1.0]], [3.0], [1.0, 0.0], [0.0, 0.0], [1.0, 1.0])
        assert res.status == "infeasible"

    def test_redundant_rows_are_harmless(self):
        A = [[1.0, 1.0], [2.0, 2.0]]
        res = solve_equality_form(A, [1.0, 2.0], [1.0, -1.0], [0.0, 0.0], [1.0, 1.0])
        assert res.status == "optimal"
        np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-9)

    def test_homogeneous_start_is_feasible(self):
        # all-zero right-hand side; x = 0 is optimal when growth is capped
        res = solve_equality_form(
            [[1.0, -1.0, 0.0], [0.0, 1.0, -1.0]],
            [0.0, 0.0],
            [0.0, 0.0, -1.0],
            [-1.0, -1.0, 0.0],
            [1.0, 1.0, 2.0],
        )
        assert res.status == "optimal"
        assert res.objective == pytest.approx(0.0, abs=1e-9)

    def test_iteration_limit_surfaces(self):
        A, b, c, lower, upper = random_box_lp(np.random.RandomState(7), m=4, n=9)
        res = solve_equality_form(A, b, c, lower, upper, max_iter=1)
        assert res.status == "iteration_limit"


class TestValidation:
    def test_rejects_infinite_bounds(self):
        with pytest.raises(ValueError):
            solve_equality_form([[1.0]], [0.0], [1.0], [-np.inf], [1.0])

    def test_rejects_crossed_bounds(self):
        with pytest.raises(ValueError):
            solve_equality_form([[1.0]], [0.0], [1.0], [2.0], [1.0])

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            solve_equality_form([[1.0, 2.0]], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0], [1.0, 1.0])

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            solve_equality_form([[np.nan]], [0.0], [1.0], [0.0], [1.0])


class TestAgainstScipy:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=120, deadline=None)
    def test_objective_matches_highs(self, seed):
        rng = np.random.RandomState(seed)
        A, b, c, lower, upper = random_box_lp(rng)
        res = solve_equality_form(A, b, c, lower, upper)
        ref, ref_status = scipy_objective(A, b, c, lower, upper)
        assert ref_status == 0
        assert res.status == "optimal"
        assert res.objective == pytest.approx(ref, rel=1e-7, abs=1e-8)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=80, deadline=None)
    def test_kkt_certificate_of_optimality(self, seed):
        rng = np.random.RandomState(seed)
        A, b, c, lower, upper = random_box_lp(rng)
        res = solve_equality_form(A, b, c, lower, upper)
        assert res.status == "optimal"
        assert_kkt(A, b, c, lower, upper, res)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_infeasibility_verdict_matches_highs(self, seed):
        rng = np.random.RandomState(seed)
        A, b, c, lower, upper = random_box_lp(rng)
        # push the right-hand side far outside anything the box can reach
        reach = np.abs(A) @ np.maximum(np.abs(lower), np.abs(upper))
        bad = b + 10.0 * (reach + 1.0)
        res = solve_equality_form(A, bad, c, lower, upper)
        _, ref_status = scipy_objective(A, bad, c, lower, upper)
        assert ref_status == 2
        assert res.status == "infeasible"


class TestWarmStart:
    def test_warm_resolve_is_cheap_and_agrees(self):
        rng = np.random.RandomState(42)
        A, b, c, lower, upper = random_box_lp(rng, m=5, n=11)
        cold = solve_equality_form(A, b, c, lower, upper)
        assert cold.status == "optimal"
        warm = solve_equality_form(A, b, c, lower, upper, warm=(cold.basis, cold.vstatus))
        assert warm.status == "optimal"
        assert warm.objective == pytest.approx(cold.objective, rel=1e-10)
        assert warm.iterations <= max(2, cold.iterations // 2)

    def test_warm_survives_small_rhs_shift(self):
        rng = np.random.RandomState(3)
        A, b, c, lower, upper = random_box_lp(rng, m=4, n=9)
        cold = solve_equality_form(A, b, c, lower, upper)
        shifted = b + 1e-6 * rng.standard_normal(b.shape)
        warm = solve_equality_form(A, shifted, c, lower, upper, warm=(cold.basis, cold.vstatus))
        ref, _ = scipy_objective(A, shifted, c, lower, upper)
        assert warm.status == "optimal"
        assert warm.objective == pytest.approx(ref, rel=1e-6, abs=1e-7)

    def test_garbage_warm_data_falls_back(self):
        rng = np.random.RandomState(11)
        A, b, c, lower, upper = random_box_lp(rng, m=3, n=6)
        res = solve_equality_form(A, b, c, lower, upper, warm=((0, 0, 0), (0,) * 6))
        ref, _ = scipy_objective(A, b, c, lower, upper)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(ref, rel=1e-7)

    def test_warm_basis_with_artificial_indices_is_discarded(self):
        rng = np.random.RandomState(12)
        A, b, c, lower, upper = random_box_lp(rng, m=3, n=6)
        res = solve_equality_form(A, b, c, lower, upper, warm=((6, 7, 8), (0,) * 6))
        assert res.status == "optimal"
