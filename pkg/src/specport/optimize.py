"""Closed-form variance-targeted mean-variance solvers and allocation retrieval.

The frequency-domain problem maximizes the mean portfolio return subject to a
hard variance target sigma0^2:

    maximize   w^H m    subject to   w^H R w = sigma0^2

whose stationary conditions give the multiplier
lambda = sqrt(m^H R^{-1} m) / (2 sigma0) and the optimal coefficients
w = sigma0 R^{-1} m / sqrt(m^H R^{-1} m).  The time-varying allocation is then
read back through the augmented basis, giving a real, periodic weight path.

The classical (time-domain) baseline is solved in the same variance-targeted
form — rather than with a free risk-aversion penalty — so that backtest
comparisons isolate the change of statistics, not the constraint style.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .basis import AugmentedVector, FrequencyGrid, synthesize_series
from .errors import DegenerateMeanError, SingularCovarianceError, ValidationError
from .moments import SpectralMoments

__all__ = [
    "RiskSpec",
    "SpectralWeights",
    "StaticWeights",
    "solve_spectral_mvo",
    "solve_classical_mvo",
    "equal_weight",
    "retrieve_allocation",
    "write_weights_csv",
    "read_weights_csv",
]

_MEAN_EPS = 1e-14


@dataclass(frozen=True)
class RiskSpec:
    """Risk target: portfolio standard deviation per sample period, plus ridge.

    ``ridge`` is added to the covariance diagonal before inversion; None picks
    the scale-invariant default 1e-8 * trace / dim, 0.0 disables regularization
    entirely.
    """

    sigma0: float
    ridge: float | None = None

    def __post_init__(self) -> None:
        if not (self.sigma0 > 0.0):
            raise ValidationError("sigma0 must be positive")
        if self.ridge is not None and self.ridge < 0.0:
            raise ValidationError("ridge must be >= 0")

    def ridge_for(self, covariance: np.ndarray) -> float:
        if self.ridge is not None:
            return self.ridge
        dim = covariance.shape[0]
        return 1e-8 * float(np.trace(covariance).real) / dim


@dataclass(frozen=True)
class SpectralWeights:
    """Optimal frequency-domain portfolio coefficients.

    Conjugate-symmetric, so the retrieved time-domain allocation is real.
    ``lagrange_multiplier`` is the realized multiplier; ``ridge_used`` the
    diagonal regularization actually applied, so the constraint
    w^H (R + ridge I) w = sigma0^2 can be re-checked.
    """

    grid: FrequencyGrid
    n_assets: int
    weights: AugmentedVector
    lagrange_multiplier: float
    sigma0: float
    ridge_used: float
    mode: str = "paper-literal"


@dataclass(frozen=True)
class StaticWeights:
    """A constant time-domain allocation (classical baseline or equal weight)."""

    weights: np.ndarray
    scheme: str

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 1:
            raise ValidationError("static weights must be a vector")
        if not np.all(np.isfinite(weights)):
            raise ValidationError("static weights must be finite")
        weights.flags.writeable = False
        object.__setattr__(self, "weights", weights)


def _targeted_solve(matrix: np.ndarray, mean: np.ndarray, risk: RiskSpec, hermitian_complex: bool):
    """Shared core: z = (matrix + ridge I)^{-1} mean via Cholesky, scaled to the target.

    Returns (weights, multiplier, ridge_used).
    """
    if float(np.linalg.norm(mean)) <= _MEAN_EPS:
        raise DegenerateMeanError(
            "mean is numerically zero: no return direction; the variance-targeted "
            "problem is unbounded below in the multiplier"
        )
    ridge = risk.ridge_for(matrix)
    regularized = matrix + ridge * np.eye(matrix.shape[0], dtype=matrix.dtype)
    try:
        factor = cho_factor(regularized, lower=True, check_finite=False)
    except LinAlgError as exc:
        hint = "covariance is singular or indefinite"
        if ridge == 0.0:
            hint += "; retry with a positive ridge (RiskSpec.ridge)"
        raise SingularCovarianceError(hint) from exc
    z = cho_solve(factor, mean, check_finite=False)
    quad = np.vdot(mean, z) if hermitian_complex else float(mean @ z)
    quad_real = float(np.real(quad))
    if quad_real <= 0.0:
        raise SingularCovarianceError(
            f"m^H R^{{-1}} m = {quad_real:.3e} is not positive; covariance is not "
            "positive definite at this ridge"
        )
    multiplier = math.sqrt(quad_real) / (2.0 * risk.sigma0)
    weights = risk.sigma0 * z / math.sqrt(quad_real)
    return weights, multiplier, ridge


def solve_spectral_mvo(moments: SpectralMoments, risk: RiskSpec) -> SpectralWeights:
    """Closed-form solution of the variance-targeted frequency-domain problem.

    Parameters
    ----------
    moments : SpectralMoments
        Estimated mean and augmented covariance (any estimator mode; the
        solution direction is scale-invariant, the magnitude pairs with the
        mode's covariance scale).
    risk : RiskSpec

    Returns
    -------
    SpectralWeights
        Satisfying w^H (R + ridge I) w = sigma0^2 to numerical precision, with
        conjugate symmetry repaired against float drift (mathematically a
        no-op: the structured covariance maps conjugate-symmetric vectors to
        conjugate-symmetric vectors).
    """
    mean_full = moments.mean.full()
    cov = np.asarray(moments.covariance)
    cov = 0.5 * (cov + np.conj(cov.T))
    raw, multiplier, ridge = _targeted_solve(cov, mean_full, risk, hermitian_complex=True)
    half = moments.half_size
    upper = 0.5 * (raw[:half] + np.conj(raw[half:]))
    return SpectralWeights(
        grid=moments.grid,
        n_assets=moments.n_assets,
        weights=AugmentedVector.from_upper(upper),
        lagrange_multiplier=multiplier,
        sigma0=risk.sigma0,
        ridge_used=ridge,
        mode=moments.mode,
    )


def solve_classical_mvo(mean, cov, risk: RiskSpec) -> StaticWeights:
    """Variance-targeted time-domain baseline on sample mean/covariance."""
    mean = np.asarray(mean, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
        raise ValidationError("mean must be a vector and cov a matching square matrix")
    cov = 0.5 * (cov + cov.T)
    weights, _, _ = _targeted_solve(cov, mean, risk, hermitian_complex=False)
    return StaticWeights(weights=weights, scheme="classical-mvo")


def equal_weight(n_assets: int) -> StaticWeights:
    """The 1/N allocation."""
    if n_assets < 1:
        raise ValidationError("n_assets must be >= 1")
    return StaticWeights(weights=np.full(n_assets, 1.0 / n_assets), scheme="equal-weight")


def retrieve_allocation(weights: SpectralWeights, t_range) -> np.ndarray:
    """Time-domain allocation path w(t) = B(t) @ [u; conj(u)] over the given indices.

    Returns a real (len(t_range), n_assets) array.  The path is periodic with
    the least common period of the grid.
    """
    t = np.asarray(list(t_range) if not isinstance(t_range, np.ndarray) else t_range)
    if t.ndim != 1:
        raise ValidationError("t_range must be one-dimensional")
    return synthesize_series(weights.weights, weights.grid, t, weights.n_assets)


def predicted_variance(weights: SpectralWeights, moments: SpectralMoments) -> float:
    """w^H R w under the given moments (without ridge)."""
    full = weights.weights.full()
    return float(np.real(np.vdot(full, moments.covariance @ full)))


# --- serialization (same flat-CSV conventions as the moments) ------------------

_FORMAT_TAG = "specport-weights-v1"


def write_weights_csv(weights: SpectralWeights, path) -> None:
    """Flat CSV: meta rows then ``weight,index,,re,im`` rows for the stacked vector."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["record", "i", "j", "re", "im"])
        writer.writerow(["meta", "format", _FORMAT_TAG, "", ""])
        writer.writerow(["meta", "omegas", ";".join(repr(float(w)) for w in weights.grid.omegas), "", ""])
        periods = weights.grid.periods
        writer.writerow(
            ["meta", "periods", ";".join(str(p) for p in periods) if periods else "", "", ""]
        )
        writer.writerow(["meta", "label", weights.grid.sample_period_label, "", ""])
        writer.writerow(["meta", "n_assets", str(weights.n_assets), "", ""])
        writer.writerow(["meta", "lagrange_multiplier", repr(float(weights.lagrange_multiplier)), "", ""])
        writer.writerow(["meta", "sigma0", repr(float(weights.sigma0)), "", ""])
        writer.writerow(["meta", "ridge_used", repr(float(weights.ridge_used)), "", ""])
        writer.writerow(["meta", "mode", weights.mode, "", ""])
        for i, value in enumerate(weights.weights.full()):
            writer.writerow(["weight", str(i), "", repr(float(value.real)), repr(float(value.imag))])


def read_weights_csv(path) -> SpectralWeights:
    """Inverse of :func:`write_weights_csv`."""
    path = Path(path)
    meta: dict[str, str] = {}
    entries: dict[int, complex] = {}
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[0] != "record":
            raise ValidationError(f"{path}: not a weights CSV (missing header)")
        for row in reader:
            if row[0] == "meta":
                meta[row[1]] = row[2]
            elif row[0] == "weight":
                entries[int(row[1])] = complex(float(row[3]), float(row[4]))
            else:
                raise ValidationError(f"{path}: unknown record kind {row[0]!r}")
    if meta.get("format") != _FORMAT_TAG:
        raise ValidationError(f"{path}: unsupported format tag {meta.get('format')!r}")
    omegas = tuple(float(tok) for tok in meta["omegas"].split(";"))
    periods = tuple(int(tok) for tok in meta["periods"].split(";")) if meta["periods"] else None
    grid = FrequencyGrid(omegas=omegas, periods=periods, sample_period_label=meta["label"])
    n_assets = int(meta["n_assets"])
    half = grid.n_bins * n_assets
    full = np.zeros(2 * half, dtype=np.complex128)
    for i, value in entries.items():
        full[i] = value
    return SpectralWeights(
        grid=grid,
        n_assets=n_assets,
        weights=AugmentedVector(upper=full[:half], lower=full[half:], enforced=True),
        lagrange_multiplier=float(meta["lagrange_multiplier"]),
        sigma0=float(meta["sigma0"]),
        ridge_used=float(meta["ridge_used"]),
        mode=meta["mode"],
    )
