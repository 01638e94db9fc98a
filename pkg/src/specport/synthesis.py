"""Synthetic nonstationary panels: harmonic mean plus improper Gaussian spectral noise.

A panel row is x(t) = B(t) @ (m + s(t)) where m is a fixed conjugate-symmetric
coefficient vector (time-domain harmonics) and s(t) is zero-mean complex
Gaussian noise with a full augmented covariance (covariance + pseudo-covariance,
including cross-bin blocks).  Nonzero pseudo-covariance makes the time-domain
variance oscillate (cyclostationarity); cross-bin blocks correlate the bins.

Noise is drawn independently across t by default (the statistics only
constrain per-sample moments), with an optional AR(1) temporal-correlation
knob that preserves those moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence
import warnings

import numpy as np

from .basis import AugmentedVector, FrequencyGrid, synthesize_series
from .errors import FactorizationError, ValidationError
from .moments import structure_project

__all__ = [
    "SynthSpec",
    "sample_spectral_noise",
    "sample_noise_series",
    "synthesize_values",
    "synthesize_panel",
    "example1_scenario",
    "seasonal_market_spec",
]

_EIG_CLIP = 1e-10


@dataclass(frozen=True)
class SynthSpec:
    """Generative description of a synthetic panel.

    ``spectral_cov`` must satisfy the augmented covariance invariants (block
    structure, Hermitian, PSD up to the documented clipping tolerance).
    Fixed seed implies a bit-identical panel.
    """

    grid: FrequencyGrid
    n_assets: int
    spectral_mean: AugmentedVector
    spectral_cov: np.ndarray
    horizon: int
    seed: int
    ar_coeff: float = 0.0

    def __post_init__(self) -> None:
        if self.n_assets < 1:
            raise ValidationError("n_assets must be >= 1")
        if self.horizon < 1:
            raise ValidationError("horizon must be >= 1 sample")
        if not (0.0 <= self.ar_coeff < 1.0):
            raise ValidationError("ar_coeff must lie in [0, 1)")
        half = self.grid.n_bins * self.n_assets
        if self.spectral_mean.half_size != half:
            raise ValidationError("spectral_mean size does not match grid x assets")
        cov = np.asarray(self.spectral_cov, dtype=np.complex128)
        if cov.shape != (2 * half, 2 * half):
            raise ValidationError(f"spectral_cov must be {2 * half} x {2 * half}")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - structure_project(cov))) > 1e-8 * scale:
            raise ValidationError("spectral_cov violates the augmented block structure")
        cov.flags.writeable = False
        object.__setattr__(self, "spectral_cov", cov)

    @property
    def half_size(self) -> int:
        return self.grid.n_bins * self.n_assets

    def with_horizon(self, horizon: int) -> "SynthSpec":
        return replace(self, horizon=horizon)


def _composite_factor(spec: SynthSpec) -> np.ndarray:
    """Factor F of the real-composite covariance: cov([Re s; Im s]) = F F^T.

    The complex covariance R and pseudo-covariance P map to the symmetric real
    matrix [[Re(R+P)/2, (Im P - Im R)/2], [(Im P + Im R)/2, Re(R-P)/2]], which
    is factored by eigendecomposition.  Eigenvalues in [-1e-10, 0) are clipped
    to zero with a warning; anything more negative raises.
    """
    half = spec.half_size
    r_grid = spec.spectral_cov[:half, :half]
    p_grid = spec.spectral_cov[:half, half:]
    top = np.hstack([(r_grid + p_grid).real, (p_grid - r_grid).imag])
    bottom = np.hstack([(p_grid + r_grid).imag, (r_grid - p_grid).real])
    composite = 0.5 * np.vstack([top, bottom])
    composite = 0.5 * (composite + composite.T)
    eigvals, eigvecs = np.linalg.eigh(composite)
    worst = float(eigvals.min()) if eigvals.size else 0.0
    if worst < -_EIG_CLIP:
        raise FactorizationError(
            f"spectral covariance is not positive semi-definite: composite "
            f"eigenvalue {worst:.6e} < -{_EIG_CLIP:g}"
        )
    if worst < 0.0:
        warnings.warn(
            f"clipping near-zero negative eigenvalue {worst:.3e} to 0 during "
            "noise factorization",
            stacklevel=3,
        )
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample_noise_series(spec: SynthSpec, n_samples: int) -> np.ndarray:
    """Draw the complex noise coefficients for t = 0..n_samples-1, shape (T, M*N).

    One sequential RNG stream seeded by ``spec.seed`` defines determinism;
    each row has the prescribed covariance/pseudo-covariance, rows are
    independent unless ``ar_coeff`` > 0 (AR(1) filtering, which preserves the
    per-sample moments).
    """
    half = spec.half_size
    factor = _composite_factor(spec)
    rng = np.random.default_rng(spec.seed)
    composite = rng.standard_normal((n_samples, 2 * half)) @ factor.T
    series = composite[:, :half] + 1j * composite[:, half:]
    rho = spec.ar_coeff
    if rho > 0.0:
        fresh_scale = math.sqrt(1.0 - rho * rho)
        for t in range(1, n_samples):
            series[t] = rho * series[t - 1] + fresh_scale * series[t]
    return series


def sample_spectral_noise(spec: SynthSpec, t: int) -> AugmentedVector:
    """The noise draw at sample index t, consistent with :func:`synthesize_panel`.

    Reproduces the sequential stream up to t, so the cost is O(t).
    """
    if t < 0:
        raise ValidationError("t must be non-negative")
    series = sample_noise_series(spec, t + 1)
    return AugmentedVector.from_upper(series[t])


def synthesize_values(spec: SynthSpec) -> np.ndarray:
    """Real (horizon, n_assets) panel values for the generative description."""
    t = np.arange(spec.horizon)
    deterministic = synthesize_series(spec.spectral_mean, spec.grid, t, spec.n_assets)
    noise_coeff = sample_noise_series(spec, spec.horizon)
    phases = np.exp(1j * np.outer(t, np.asarray(spec.grid.omegas)))
    blocks = noise_coeff.reshape(spec.horizon, spec.grid.n_bins, spec.n_assets)
    scale = 2.0 / math.sqrt(2 * spec.grid.n_bins)
    noise = scale * np.real(np.einsum("tm,tmn->tn", phases, blocks))
    return deterministic + noise


def synthesize_panel(spec: SynthSpec, periods_per_year: int = 12, asset_names=None):
    """Synthesize a ReturnsPanel (integer timestamps 0..T-1)."""
    from .backtest import ReturnsPanel

    values = synthesize_values(spec)
    if asset_names is None:
        asset_names = tuple(f"A{i + 1}" for i in range(spec.n_assets))
    return ReturnsPanel(
        timestamps=tuple(range(spec.horizon)),
        returns=values,
        periods_per_year=periods_per_year,
        asset_names=tuple(asset_names),
    )


def example1_scenario(seed: int = 11, horizon: int = 12000) -> SynthSpec:
    """Canned identifiability scenario: two harmonics buried in strong structured noise.

    Univariate, grid periods (24, 12, 8, 5, 4).  Harmonic means sit at periods
    24 and 8.  The cyclostationary mechanism is a shared real Gaussian envelope
    driving the period-12 and period-4 bins (frequencies w and 3w), which
    concentrates the variance cycle enough for the period-12 bin to show a
    pseudo/covariance ratio well above one half; the remaining noise budget is
    proper (circular) and spread over all bins.  Total noise power is 100x the
    harmonic power, which buries the harmonics in the absolute-moment spectrum
    while they stand out cleanly in the estimated spectral mean.
    """
    grid = FrequencyGrid.from_periods((24, 12, 8, 5, 4))
    n_bins = grid.n_bins
    amp = 0.01  # return-scale harmonics keep synthesized panels inside (-1, inf)

    mean_upper = np.zeros(n_bins, dtype=np.complex128)
    mean_upper[0] = amp * np.exp(0.9j)  # period 24
    mean_upper[2] = amp * np.exp(-0.7j)  # period 8
    harmonic_power = 2.0 * amp**2  # coefficient-scale budget; time power is this / M

    # 80% of the noise budget in the improper envelope pair, 20% proper.
    improper_total = 0.8 * 100.0 * harmonic_power
    proper_total = 0.2 * 100.0 * harmonic_power
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    weight = golden**2  # beta^2 / alpha^2 maximizing the measured cycle ratio
    alpha = math.sqrt(improper_total / (1.0 + weight))
    beta = math.sqrt(improper_total * weight / (1.0 + weight))

    envelope = np.zeros(n_bins, dtype=np.complex128)
    envelope[1] = alpha  # period 12
    envelope[4] = beta  # period 4 (= one third of period 12)
    env_full = np.concatenate([envelope, np.conj(envelope)])
    cov = np.outer(env_full, np.conj(env_full))
    cov += np.eye(2 * n_bins) * (proper_total / n_bins)

    return SynthSpec(
        grid=grid,
        n_assets=1,
        spectral_mean=AugmentedVector.from_upper(mean_upper),
        spectral_cov=cov,
        horizon=horizon,
        seed=seed,
    )


def seasonal_market_spec(
    n_assets: int = 5,
    periods: Sequence[int] = (12, 6),
    seed: int = 0,
    mean_amp: float = 0.015,
    noise_vol: float = 0.02,
    horizon: int = 120,
) -> SynthSpec:
    """A synthetic market with seasonal expected returns and white noise.

    Each asset gets random per-bin seasonal amplitudes (around ``mean_amp``
    peak-to-center in return units) and phases; the noise is proper, white
    across bins and assets, sized so per-asset return volatility is
    ``noise_vol`` per sample.  The grand mean of every asset is zero, so
    time-averaging estimators see no return signal while the seasonal
    structure is fully predictable.
    """
    grid = FrequencyGrid.from_periods(periods)
    n_bins = grid.n_bins
    rng = np.random.default_rng(seed)
    coeff_scale = mean_amp * math.sqrt(2 * n_bins) / 2.0
    amplitudes = coeff_scale * rng.uniform(0.6, 1.4, size=n_bins * n_assets)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=n_bins * n_assets)
    mean_upper = amplitudes * np.exp(1j * phases)

    half = n_bins * n_assets
    cov = np.eye(2 * half, dtype=np.complex128) * noise_vol**2

    return SynthSpec(
        grid=grid,
        n_assets=n_assets,
        spectral_mean=AugmentedVector.from_upper(mean_upper),
        spectral_cov=cov,
        horizon=horizon,
        seed=seed + 1,
    )
