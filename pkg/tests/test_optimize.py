"""Closed-form solvers: exactness, equivariance, optimality, baselines, retrieval."""

import math

import numpy as np
import pytest

from specport import (
    AugmentedVector,
    DegenerateMeanError,
    FrequencyGrid,
    RiskSpec,
    SingularCovarianceError,
    SpectralMoments,
    ValidationError,
    equal_weight,
    read_weights_csv,
    retrieve_allocation,
    solve_classical_mvo,
    solve_spectral_mvo,
    synthesize_series,
    write_weights_csv,
)

from conftest import pga_max_objective, random_feasible_objectives, random_structured_moments


def constraint_value(weights, covariance):
    full = weights.weights.full()
    regularized = covariance + weights.ridge_used * np.eye(covariance.shape[0])
    return float(np.real(np.vdot(full, regularized @ full)))


def identity_moments(grid, n_assets, mean_upper):
    half = grid.n_bins * n_assets
    return SpectralMoments(
        grid=grid,
        n_assets=n_assets,
        mean=AugmentedVector.from_upper(mean_upper),
        covariance=np.eye(2 * half, dtype=complex),
        sample_count=100,
    )


class TestSpectralSolver:
    def test_identity_covariance_closed_form(self):
        # with C = I the solution is sigma0 * m / ||m||
        grid = FrequencyGrid.from_periods((12, 6))
        rng = np.random.default_rng(0)
        upper = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        moments = identity_moments(grid, 2, upper)
        risk = RiskSpec(sigma0=0.05, ridge=0.0)
        solved = solve_spectral_mvo(moments, risk)
        full_mean = moments.mean.full()
        expected = risk.sigma0 * full_mean / np.linalg.norm(full_mean)
        assert np.max(np.abs(solved.weights.full() - expected)) <= 1e-12
        assert abs(np.vdot(solved.weights.full(), solved.weights.full()).real - risk.sigma0**2) <= 1e-10

    def test_constraint_identity_random_instances(self):
        for seed in range(15):
            moments = random_structured_moments(seed)
            risk = RiskSpec(sigma0=0.01)
            solved = solve_spectral_mvo(moments, risk)
            assert abs(constraint_value(solved, moments.covariance) - risk.sigma0**2) <= 1e-10
            assert solved.weights.is_conjugate_symmetric(1e-12)

    def test_lambda_consistency(self):
        moments = random_structured_moments(101)
        risk = RiskSpec(sigma0=0.02)
        solved = solve_spectral_mvo(moments, risk)
        dim = 2 * moments.half_size
        regularized = moments.covariance + solved.ridge_used * np.eye(dim)
        mean_full = moments.mean.full()
        quad = float(np.real(np.vdot(mean_full, np.linalg.solve(regularized, mean_full))))
        assert abs(solved.lagrange_multiplier - math.sqrt(quad) / (2 * risk.sigma0)) <= 1e-10
        # w = (1/ 2 lambda) C^{-1} m
        recon = np.linalg.solve(regularized, mean_full) / (2 * solved.lagrange_multiplier)
        assert np.max(np.abs(recon - solved.weights.full())) <= 1e-10

    def test_scale_equivariance(self):
        moments = random_structured_moments(7)
        risk = RiskSpec(sigma0=0.01, ridge=0.0)
        base = solve_spectral_mvo(moments, risk)
        # scaling the mean leaves the solution unchanged
        scaled_mean = SpectralMoments(
            grid=moments.grid,
            n_assets=moments.n_assets,
            mean=AugmentedVector.from_upper(3.7 * moments.mean.upper),
            covariance=moments.covariance,
            sample_count=moments.sample_count,
        )
        same = solve_spectral_mvo(scaled_mean, risk)
        assert np.max(np.abs(same.weights.full() - base.weights.full())) <= 1e-10
        # scaling the covariance by c scales the solution by 1/sqrt(c)
        factor = 2.5
        scaled_cov = SpectralMoments(
            grid=moments.grid,
            n_assets=moments.n_assets,
            mean=moments.mean,
            covariance=factor * moments.covariance,
            sample_count=moments.sample_count,
        )
        shrunk = solve_spectral_mvo(scaled_cov, risk)
        assert np.max(np.abs(shrunk.weights.full() - base.weights.full() / math.sqrt(factor))) <= 1e-10

    def test_objective_matches_numerical_maximizer(self):
        rng = np.random.default_rng(42)
        moments = random_structured_moments(21, grid=FrequencyGrid.from_periods((12, 6)), n_assets=2)
        risk = RiskSpec(sigma0=0.01)
        solved = solve_spectral_mvo(moments, risk)
        mean_full = moments.mean.full()
        achieved = float(np.real(np.vdot(mean_full, solved.weights.full())))
        dim = 2 * moments.half_size
        regularized = moments.covariance + solved.ridge_used * np.eye(dim)
        oracle = pga_max_objective(mean_full, regularized, risk.sigma0, rng)
        assert abs(achieved - oracle) <= 1e-6 * abs(oracle)

    def test_beats_random_feasible_points(self):
        rng = np.random.default_rng(43)
        moments = random_structured_moments(22, grid=FrequencyGrid.from_periods((12,)), n_assets=2)
        risk = RiskSpec(sigma0=0.01)
        solved = solve_spectral_mvo(moments, risk)
        mean_full = moments.mean.full()
        achieved = float(np.real(np.vdot(mean_full, solved.weights.full())))
        dim = 2 * moments.half_size
        regularized = moments.covariance + solved.ridge_used * np.eye(dim)
        others = random_feasible_objectives(mean_full, regularized, risk.sigma0, rng, count=1000)
        assert np.all(achieved >= others)

    def test_degenerate_mean_raises(self):
        moments = random_structured_moments(3, mean_scale=0.0)
        with pytest.raises(DegenerateMeanError):
            solve_spectral_mvo(moments, RiskSpec(sigma0=0.01))

    def test_predicted_variance_without_ridge(self):
        from specport import predicted_variance

        moments = random_structured_moments(55)
        risk = RiskSpec(sigma0=0.015, ridge=0.0)
        solved = solve_spectral_mvo(moments, risk)
        assert predicted_variance(solved, moments) == pytest.approx(risk.sigma0**2, abs=1e-10)

    def test_singular_covariance_without_ridge_advises(self):
        grid = FrequencyGrid.from_periods((12,))
        rank_one = np.outer([1.0, 1.0], [1.0, 1.0]).astype(complex)
        moments = SpectralMoments(
            grid=grid,
            n_assets=1,
            mean=AugmentedVector.from_upper([1.0 + 0.5j]),
            covariance=rank_one,
            sample_count=10,
        )
        with pytest.raises(SingularCovarianceError, match="ridge"):
            solve_spectral_mvo(moments, RiskSpec(sigma0=0.01, ridge=0.0))
        # the default ridge makes the same instance solvable
        solved = solve_spectral_mvo(moments, RiskSpec(sigma0=0.01))
        assert solved.ridge_used > 0


class TestRiskSpec:
    def test_validation(self):
        with pytest.raises(ValidationError):
            RiskSpec(sigma0=0.0)
        with pytest.raises(ValidationError):
            RiskSpec(sigma0=0.01, ridge=-1e-9)

    def test_default_ridge_is_scale_invariant(self):
        risk = RiskSpec(sigma0=0.01)
        cov = np.eye(4) * 3.0
        assert risk.ridge_for(cov) == pytest.approx(1e-8 * 3.0)
        assert risk.ridge_for(10 * cov) == pytest.approx(1e-7 * 3.0)


class TestClassicalAndEqualWeight:
    def test_identity_covariance_unit_mean(self):
        solved = solve_classical_mvo([1.0, 0.0], np.eye(2), RiskSpec(sigma0=0.03, ridge=0.0))
        assert np.allclose(solved.weights, [0.03, 0.0], atol=1e-12)
        assert solved.scheme == "classical-mvo"

    def test_diagonal_covariance_hand_oracle(self):
        # R = diag(1,4), m = (1,1): z = (1, 1/4), m.z = 5/4, w = sigma0 z / sqrt(5/4)
        sigma0 = 0.02
        solved = solve_classical_mvo([1.0, 1.0], np.diag([1.0, 4.0]), RiskSpec(sigma0=sigma0, ridge=0.0))
        expected = sigma0 * np.array([1.0, 0.25]) / math.sqrt(1.25)
        assert np.allclose(solved.weights, expected, atol=1e-12)
        assert solved.weights @ np.diag([1.0, 4.0]) @ solved.weights == pytest.approx(sigma0**2, abs=1e-10)

    def test_degenerate_mean(self):
        with pytest.raises(DegenerateMeanError):
            solve_classical_mvo([0.0, 0.0], np.eye(2), RiskSpec(sigma0=0.01))

    def test_equal_weight(self):
        assert np.allclose(equal_weight(4).weights, [0.25, 0.25, 0.25, 0.25])
        assert np.allclose(equal_weight(1).weights, [1.0])
        for n in (1, 3, 9):
            assert equal_weight(n).weights.sum() == pytest.approx(1.0)
        with pytest.raises(ValidationError):
            equal_weight(0)


class TestRetrieveAllocation:
    def test_zero_weights_zero_path(self):
        moments = random_structured_moments(31, grid=FrequencyGrid.from_periods((12, 6)), n_assets=2)
        solved = solve_spectral_mvo(moments, RiskSpec(sigma0=0.01))
        zeroed = type(solved)(
            grid=solved.grid,
            n_assets=solved.n_assets,
            weights=AugmentedVector.zeros(solved.weights.half_size),
            lagrange_multiplier=solved.lagrange_multiplier,
            sigma0=solved.sigma0,
            ridge_used=solved.ridge_used,
        )
        path = retrieve_allocation(zeroed, range(10))
        assert np.array_equal(path, np.zeros((10, 2)))

    def test_single_bin_path_is_sinusoid(self):
        # one bin: w(t) = 2 Re((1/sqrt 2) e^{jwt} w_upper)
        grid = FrequencyGrid.from_periods((12,))
        moments = random_structured_moments(32, grid=grid, n_assets=1)
        solved = solve_spectral_mvo(moments, RiskSpec(sigma0=0.01))
        coefficient = solved.weights.upper[0]
        omega = grid.omegas[0]
        path = retrieve_allocation(solved, range(36))
        expected = 2 * np.real(np.exp(1j * omega * np.arange(36)) * coefficient / math.sqrt(2))
        assert np.max(np.abs(path[:, 0] - expected)) <= 1e-12

    def test_periodicity_and_realness(self):
        moments = random_structured_moments(33, grid=FrequencyGrid.from_periods((12, 8)), n_assets=2)
        solved = solve_spectral_mvo(moments, RiskSpec(sigma0=0.01))
        lcm = solved.grid.least_common_period()
        path_a = retrieve_allocation(solved, range(0, 2 * lcm))
        path_b = retrieve_allocation(solved, range(lcm, 3 * lcm))
        assert np.max(np.abs(path_a - path_b)) <= 1e-12
        assert path_a.dtype == np.float64

    def test_matches_synthesize_series(self):
        moments = random_structured_moments(34)
        solved = solve_spectral_mvo(moments, RiskSpec(sigma0=0.01))
        t = np.arange(17, 40)
        direct = synthesize_series(solved.weights, solved.grid, t, solved.n_assets)
        assert np.array_equal(retrieve_allocation(solved, t), direct)


class TestWeightsSerialization:
    def test_round_trip(self, tmp_path):
        moments = random_structured_moments(35, grid=FrequencyGrid.from_periods((12, 6)))
        solved = solve_spectral_mvo(moments, RiskSpec(sigma0=0.01))
        path = tmp_path / "weights.csv"
        write_weights_csv(solved, path)
        loaded = read_weights_csv(path)
        assert np.array_equal(loaded.weights.full(), solved.weights.full())
        assert loaded.lagrange_multiplier == solved.lagrange_multiplier
        assert loaded.sigma0 == solved.sigma0
        assert loaded.ridge_used == solved.ridge_used
        assert loaded.grid.omegas == solved.grid.omegas
