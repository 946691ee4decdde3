import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothbench import (
    Dataset,
    entropy_setup,
    euclidean_setup,
    excess_risk,
    hard_absolute,
    hard_gaussian,
    is_feasible,
    lambda_for,
    make_absolute,
    make_smooth_ramp,
    make_squared,
    solve_regularized_erm,
    stability_probe,
)
from smoothbench.batch import TERM_MAX_ITERS, TERM_TOLERANCE

SQ = make_squared()


def ridge_ball_closed_form(xs, ys, lam, radius):
    """Oracle: minimize mean (x@w - y)^2/2 + lam ||w||^2/2 over ||w|| <= radius
    via the regularized normal equations, adding a Lagrangian ridge found by
    bisection when the ball constraint binds."""
    n, d = xs.shape
    gram = xs.T @ xs / n
    rhs = xs.T @ ys / n

    def solve(mu):
        return np.linalg.solve(gram + (lam + mu) * np.eye(d), rhs)

    w = solve(0.0)
    if np.linalg.norm(w) <= radius:
        return w
    lo, hi = 0.0, 1.0
    while np.linalg.norm(solve(hi)) > radius:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(solve(mid)) > radius:
            lo = mid
        else:
            hi = mid
    return solve(hi)


class TestLambdaFor:
    def test_hand_values(self):
        assert lambda_for(1, 1, 128, 0) == 2.0
        assert lambda_for(1, 1, 128, 1) == pytest.approx(1 + math.sqrt(2), rel=1e-15)

    def test_lambda_n_exceeds_32h(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            H = float(rng.uniform(0.1, 10))
            f = float(rng.uniform(0.1, 10))
            n = int(rng.integers(1, 10**6))
            lbar = float(rng.uniform(0, 5))
            assert lambda_for(H, f, n, lbar) * n > 32 * H

    def test_monotonicity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            H = float(rng.uniform(0.1, 5))
            f = float(rng.uniform(0.1, 5))
            n = int(rng.integers(2, 10**5))
            lbar = float(rng.uniform(0, 5))
            assert lambda_for(H, f, n, lbar) >= lambda_for(H, f, n + 1, lbar)
            assert lambda_for(H * 1.5, f, n, lbar) >= lambda_for(H, f, n, lbar)
            assert lambda_for(H, f, n, lbar + 0.5) >= lambda_for(H, f, n, lbar)

    def test_errors(self):
        for bad in [(0, 1, 10, 0), (1, 0, 10, 0), (1, 1, 0, 0), (1, 1, 10, -1)]:
            with pytest.raises(ValueError):
                lambda_for(*bad)


@settings(max_examples=100, deadline=None)
@given(
    H=st.floats(0.1, 10),
    f=st.floats(0.1, 10),
    n=st.integers(1, 10**6),
    lbar=st.floats(0, 10),
)
def test_lambda_keeps_denominator_positive(H, f, n, lbar):
    lam = lambda_for(H, f, n, lbar)
    assert 1.0 - 32.0 * H / (lam * n) > 0


class TestDataset:
    def test_basis_and_dense_agree(self):
        idx = np.array([0, 2, 2, 1])
        ys = np.array([1.0, 2.0, 3.0, 4.0])
        data = Dataset(ys=ys, basis_idx=idx, dim=3)
        w = np.array([0.5, -1.0, 2.0])
        dense = Dataset(ys=ys, xs=data.dense_xs())
        assert np.allclose(data.predictions(w), dense.predictions(w))
        v = np.array([1.0, 1.0, -1.0, 0.5])
        assert np.allclose(data.grad_combination(v), dense.grad_combination(v))

    def test_validation(self):
        with pytest.raises(ValueError):
            Dataset(ys=np.ones(2))
        with pytest.raises(ValueError):
            Dataset(ys=np.ones(2), xs=np.ones((3, 2)))
        with pytest.raises(ValueError):
            Dataset(ys=np.ones(0), xs=np.ones((0, 2)))
        with pytest.raises(ValueError):
            Dataset(ys=np.ones(2), basis_idx=np.array([0, 1]))  # missing dim

    def test_replace_instance(self):
        data = Dataset(ys=np.array([1.0, 2.0]), basis_idx=np.array([0, 1]), dim=3)
        new = data.replace_instance(1, np.array([0.0, 0.0, 1.0]), 5.0)
        assert new.ys[1] == 5.0 and new.basis_idx[1] == 2
        assert data.ys[1] == 2.0  # original untouched


class TestSolver:
    def test_single_sample_closed_form(self):
        setup = euclidean_setup(2, 1.0)
        data = Dataset(ys=np.array([1.0]), xs=np.array([[1.0, 0.0]]))
        report = solve_regularized_erm(setup, SQ, data, 1.0)
        assert report.w[0] == pytest.approx(0.5, abs=1e-8)
        assert report.termination == TERM_TOLERANCE

    def test_huge_lambda_recovers_regularizer_argmin(self):
        setup = euclidean_setup(3, 1.0)
        rng = np.random.default_rng(7)
        data = Dataset(ys=rng.uniform(-1, 1, 20), xs=rng.standard_normal((20, 3)) / 2)
        report = solve_regularized_erm(setup, SQ, data, 1e9, tol=1e-14)
        assert float(np.linalg.norm(report.w)) <= 1e-6

    def test_zero_gradient_data_terminates_immediately(self):
        setup = euclidean_setup(2, 1.0)
        data = Dataset(ys=np.zeros(4), xs=np.tile(np.array([[1.0, 0.0]]), (4, 1)))
        report = solve_regularized_erm(setup, SQ, data, 0.5)
        assert report.iterations == 1
        assert np.allclose(report.w, 0.0)

    def test_against_ridge_ball_oracle(self):
        rng = np.random.default_rng(11)
        for trial in range(20):
            d = int(rng.integers(1, 6))
            n = int(rng.integers(3, 30))
            xs = rng.standard_normal((n, d))
            xs /= max(1.0, float(np.max(np.linalg.norm(xs, axis=1))))
            ys = rng.uniform(-1, 1, n)
            lam = float(rng.uniform(0.01, 2.0))
            # small radius on odd trials so the ball constraint binds sometimes
            budget = 0.1 if trial % 2 else 1.0
            setup = euclidean_setup(d, budget)
            data = Dataset(ys=ys, xs=xs)
            report = solve_regularized_erm(setup, SQ, data, lam, tol=1e-14)
            oracle = ridge_ball_closed_form(xs, ys, lam, math.sqrt(2) * budget)
            assert float(np.max(np.abs(report.w - oracle))) <= 1e-6

    def test_entropy_geometry_against_grid_oracle(self):
        setup = entropy_setup(2, 1.0)
        rng = np.random.default_rng(13)
        xs = rng.uniform(-1, 1, size=(12, 2))
        ys = rng.uniform(-1, 1, size=12)
        data = Dataset(ys=ys, xs=xs)
        lam = 0.3
        report = solve_regularized_erm(setup, SQ, data, lam, tol=1e-12)

        # dense grid over the interior of the positive l1 ball
        from smoothbench import regularizer_value

        best = math.inf
        grid = np.linspace(1e-6, 1.0 - 1e-6, 500)
        for a in grid:
            for b in grid[grid <= 1.0 - a]:
                w = np.array([a, b])
                obj = float(np.mean(SQ.value(xs @ w, ys))) + lam * regularizer_value(setup, w)
                best = min(best, obj)
        assert report.objective <= best + 1e-5
        assert is_feasible(setup, report.w)

    def test_objective_history_non_increasing(self):
        setup = euclidean_setup(4, 1.0)
        rng = np.random.default_rng(17)
        xs = rng.standard_normal((30, 4)) / 2
        data = Dataset(ys=rng.uniform(-1, 1, 30), xs=xs)
        report = solve_regularized_erm(setup, SQ, data, 0.05, tol=1e-12)
        objs = np.array(report.objectives)
        assert np.all(np.diff(objs) <= 1e-12 * (1 + np.abs(objs[:-1])))
        assert report.termination in (TERM_TOLERANCE, TERM_MAX_ITERS)
        assert is_feasible(setup, report.w)

    def test_max_iters_reported_not_raised(self):
        setup = euclidean_setup(3, 1.0)
        rng = np.random.default_rng(19)
        data = Dataset(ys=rng.uniform(-1, 1, 10), xs=rng.standard_normal((10, 3)) / 2)
        report = solve_regularized_erm(setup, SQ, data, 0.01, tol=1e-30, max_iters=3)
        assert report.termination == TERM_MAX_ITERS
        assert report.iterations == 3

    def test_rejects_nonconvex_and_nonsmooth_losses(self):
        setup = euclidean_setup(2, 1.0)
        data = Dataset(ys=np.ones(2), xs=np.eye(2))
        with pytest.raises(ValueError, match="convex"):
            solve_regularized_erm(setup, make_smooth_ramp(1.0), data, 0.1)
        with pytest.raises(ValueError, match="smooth"):
            solve_regularized_erm(setup, make_absolute(), data, 0.1)
        with pytest.raises(ValueError):
            solve_regularized_erm(setup, SQ, data, 0.0)

    def test_diagnostics_json(self):
        import json

        setup = euclidean_setup(2, 1.0)
        data = Dataset(ys=np.array([1.0]), xs=np.array([[1.0, 0.0]]))
        report = solve_regularized_erm(setup, SQ, data, 1.0)
        payload = json.loads(report.diagnostics_json())
        assert payload["termination"] == TERM_TOLERANCE
        assert payload["history"][0]["iteration"] == 0


class TestStabilityProbe:
    def test_requires_30_replicates(self):
        dist = hard_gaussian(16, 0.1, seed=1)
        setup = euclidean_setup(dist.dim, 1 / math.sqrt(2))
        with pytest.raises(ValueError):
            stability_probe(setup, dist.loss, dist, 1.0, 16, replicates=10, seed=2)

    def test_huge_lambda_makes_lhs_tiny(self):
        dist = hard_gaussian(16, 0.1, seed=3)
        setup = euclidean_setup(dist.dim, 1 / math.sqrt(2))
        report = stability_probe(setup, dist.loss, dist, 1e6, 16, replicates=30, seed=4)
        assert abs(report.lhs_mean) <= 1e-6
        assert report.lhs_mean <= report.rhs_mean
        assert report.replicates == 30

    def test_degenerate_n_equals_one(self):
        dist = hard_gaussian(4, 0.1, seed=5, dim=4)
        setup = euclidean_setup(4, 1 / math.sqrt(2))
        report = stability_probe(setup, dist.loss, dist, 5.0, 1, replicates=30, seed=6)
        assert math.isfinite(report.lhs_mean)
        assert report.rhs_mean > 0
        assert report.combined_stderr >= report.rhs_stderr


class TestExcessRisk:
    def test_a_at_reference_is_zero(self):
        dist = hard_absolute(25, seed=7)
        assert excess_risk(dist, dist.w_star) == 0.0

    def test_a_at_zero_vector(self):
        dist = hard_absolute(25, seed=7)
        assert excess_risk(dist, np.zeros(dist.dim)) == pytest.approx(1 / 5, rel=1e-12)

    def test_b_closed_form(self):
        dist = hard_gaussian(100, 0.1, seed=9)
        w = dist.w_star.copy()
        w[0] += 0.3
        assert excess_risk(dist, w) == pytest.approx(0.09 / dist.dim, rel=1e-12)
        assert dist.true_risk(dist.w_star) == pytest.approx(0.01, rel=1e-12)
