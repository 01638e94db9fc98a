"""Basis construction, projection, synthesis and their exact identities."""

import math

import numpy as np
import pytest

from specport import (
    AugmentedVector,
    FrequencyGrid,
    SymmetryViolationError,
    ValidationError,
    build_basis,
    commensurate_length,
    project_spectrum,
    synthesize_series,
    synthesize_time_value,
)

from conftest import random_grid


class TestFrequencyGrid:
    def test_from_periods_sorts_and_converts(self):
        grid = FrequencyGrid.from_periods((6, 12, 3))
        assert grid.periods == (12, 6, 3)
        assert np.allclose(grid.omegas, [2 * np.pi / 12, 2 * np.pi / 6, 2 * np.pi / 3])

    def test_dc_rejected(self):
        with pytest.raises(ValidationError):
            FrequencyGrid(omegas=(0.0, 1.0))

    def test_super_nyquist_rejected(self):
        with pytest.raises(ValidationError):
            FrequencyGrid(omegas=(3.5,))
        with pytest.raises(ValidationError):
            FrequencyGrid.from_periods((1,))

    def test_duplicates_rejected(self):
        with pytest.raises(ValidationError):
            FrequencyGrid(omegas=(1.0, 1.0))
        with pytest.raises(ValidationError):
            FrequencyGrid.from_periods((12, 12))

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            FrequencyGrid(omegas=())

    def test_nyquist_allowed_with_warning(self):
        with pytest.warns(UserWarning, match="Nyquist"):
            grid = FrequencyGrid.from_periods((2,))
        assert grid.omegas[0] == pytest.approx(np.pi)

    def test_least_common_period(self):
        assert FrequencyGrid.from_periods((12, 6, 3)).least_common_period() == 12
        assert FrequencyGrid.from_periods((12, 8)).least_common_period() == 24

    def test_least_common_period_unavailable_for_irrational(self):
        grid = FrequencyGrid(omegas=(1.0,))
        with pytest.raises(ValidationError):
            grid.least_common_period()

    def test_commensurate_length(self):
        grid = FrequencyGrid.from_periods((12, 8))
        assert commensurate_length(100, grid) == (96, 4)
        with pytest.raises(ValidationError):
            commensurate_length(10, grid)


class TestBuildBasis:
    def test_t0_single_bin_values(self):
        # e^{j*0} = 1 so both halves are 1/sqrt(2)
        grid = FrequencyGrid(omegas=(np.pi / 6,))
        basis = build_basis(0, grid, 1)
        assert np.allclose(basis.values, [[1 / math.sqrt(2), 1 / math.sqrt(2)]], atol=1e-15)

    def test_phase_pi_values(self):
        # t=3, w=pi/3 puts both halves at phase pi
        grid = FrequencyGrid(omegas=(np.pi / 3,))
        basis = build_basis(3, grid, 1)
        assert np.allclose(basis.values, [[-1 / math.sqrt(2), -1 / math.sqrt(2)]], atol=1e-12)

    def test_row_orthonormality_direct_multiply(self):
        grid = FrequencyGrid(omegas=(np.pi / 8, np.pi / 4, np.pi / 2))
        basis = build_basis(7, grid, 2)
        gram = basis.values @ basis.values.conj().T
        assert np.max(np.abs(gram - np.eye(2))) <= 1e-12

    def test_row_orthonormality_random_cases(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            grid = random_grid(rng)
            n_assets = int(rng.integers(1, 5))
            t = int(rng.integers(-10**6, 10**6))
            basis = build_basis(t, grid, n_assets)
            gram = basis.values @ basis.values.conj().T
            assert np.max(np.abs(gram - np.eye(n_assets))) <= 1e-12

    def test_conjugate_half(self):
        grid = FrequencyGrid.from_periods((12, 5))
        basis = build_basis(11, grid, 3)
        half = basis.half_columns
        assert np.array_equal(basis.values[:, half:], np.conj(basis.values[:, :half]))

    def test_invalid_inputs(self):
        grid = FrequencyGrid.from_periods((12,))
        with pytest.raises(ValidationError):
            build_basis(0, grid, 0)


class TestSynthesize:
    def test_zero_spectrum(self):
        grid = FrequencyGrid.from_periods((12, 6))
        basis = build_basis(5, grid, 2)
        out = synthesize_time_value(basis, AugmentedVector.zeros(4))
        assert np.array_equal(out, np.zeros(2))

    def test_cosine_expansion(self):
        # (1/sqrt2) e^{jwt} (sqrt2/2) + c.c. == cos(wt), checked over t=0..99
        grid = FrequencyGrid(omegas=(2 * np.pi / 12,))
        spectrum = AugmentedVector.from_upper([math.sqrt(2) / 2])
        for t in range(100):
            value = synthesize_time_value(build_basis(t, grid, 1), spectrum)
            assert value[0] == pytest.approx(math.cos(grid.omegas[0] * t), abs=1e-12)

    def test_sine_expansion(self):
        spectrum = AugmentedVector.from_upper([-1j * math.sqrt(2) / 2])
        grid = FrequencyGrid(omegas=(2 * np.pi / 12,))
        for t in range(100):
            value = synthesize_time_value(build_basis(t, grid, 1), spectrum)
            assert value[0] == pytest.approx(math.sin(grid.omegas[0] * t), abs=1e-12)

    def test_symmetry_violation_raises(self):
        grid = FrequencyGrid.from_periods((12,))
        basis = build_basis(0, grid, 1)
        corrupted = AugmentedVector(upper=np.array([1.0 + 1j]), lower=np.array([1.0 + 1j]))
        with pytest.raises(SymmetryViolationError):
            synthesize_time_value(basis, corrupted)

    def test_series_matches_per_t(self):
        rng = np.random.default_rng(3)
        grid = FrequencyGrid.from_periods((12, 8, 5))
        upper = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        spectrum = AugmentedVector.from_upper(upper)
        series = synthesize_series(spectrum, grid, range(40), 2)
        for t in range(40):
            single = synthesize_time_value(build_basis(t, grid, 2), spectrum)
            assert np.allclose(series[t], single, atol=1e-13)


class TestProject:
    def test_zero_vector(self):
        grid = FrequencyGrid.from_periods((12, 6))
        basis = build_basis(9, grid, 2)
        spectrum = project_spectrum(basis, np.zeros(2))
        assert np.array_equal(spectrum.upper, np.zeros(4))

    def test_scalar_projection_value(self):
        # t=0: upper coefficient is x / sqrt(2M) = 2 / sqrt(2)
        grid = FrequencyGrid.from_periods((12,))
        basis = build_basis(0, grid, 1)
        spectrum = project_spectrum(basis, np.array([2.0]))
        assert spectrum.upper[0] == pytest.approx(math.sqrt(2), abs=1e-14)

    def test_round_trip_identity(self):
        rng = np.random.default_rng(7)
        grid = FrequencyGrid.from_periods((12, 9, 7, 5))
        for t in rng.integers(-1000, 1000, size=20):
            basis = build_basis(int(t), grid, 3)
            x = rng.standard_normal(3)
            back = synthesize_time_value(basis, project_spectrum(basis, x))
            assert np.max(np.abs(back - x)) <= 1e-12

    def test_projection_is_conjugate_symmetric(self):
        rng = np.random.default_rng(8)
        grid = FrequencyGrid.from_periods((10, 4))
        basis = build_basis(17, grid, 2)
        spectrum = project_spectrum(basis, rng.standard_normal(2))
        assert spectrum.enforced and spectrum.is_conjugate_symmetric()

    def test_dimension_mismatch(self):
        grid = FrequencyGrid.from_periods((12,))
        basis = build_basis(0, grid, 2)
        with pytest.raises(ValidationError):
            project_spectrum(basis, np.zeros(3))


def test_time_average_of_gram_converges():
    # avg_t B(t)^H B(t) = I/(2M) once every bin and beat completes whole cycles
    grid = FrequencyGrid.from_periods((12, 8))
    size = 2 * grid.n_bins * 2
    total = np.zeros((size, size), dtype=complex)
    n_samples = grid.least_common_period()
    for t in range(n_samples):
        values = build_basis(t, grid, 2).values
        total += values.conj().T @ values
    average = total / n_samples
    expected = np.eye(size) / (2 * grid.n_bins)
    assert np.max(np.abs(average - expected)) <= 1e-10
