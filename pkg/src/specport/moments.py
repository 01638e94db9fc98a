"""Centred augmented spectral moments and the absolute-moment spectrum.

The first moment of the projected series u(t) = B(t)^H x(t) designates
time-domain harmonics; its centred second moment splits into per-bin
covariance blocks R(w_m) (stationary power), pseudo-covariance blocks P(w_m)
(cyclostationarity), and dual-frequency blocks R(w_m, w_n), P(w_m, w_n)
(bin-to-bin correlation).  The absolute (non-centred) second moment — the
ordinary power spectrum — entangles mean and covariance:
abs_moment(w) = m(w) m(w)^H + R(w), which is what makes harmonics invisible
to it at low SNR.

Estimators time-average the projected series over a commensurate window (a
whole number of least common periods), which removes leakage between bins.
Two output scales are supported:

* ``"paper-literal"`` (default): the raw projection average.  A pure harmonic
  a*cos(w_m t) yields |mean(w_m)| = a / (2 sqrt(2M)) — attenuated by 1/(2M)
  relative to the representation coefficient, because the time average of
  B^H B is I/(2M).
* ``"consistent"``: rescales the mean by 2M (recovering coefficient scale
  exactly for on-grid harmonics) and the covariance by (2M)^2.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import AugmentedVector, FrequencyGrid, commensurate_length
from .errors import ValidationError

__all__ = [
    "SpectralMoments",
    "PsdMatrix",
    "estimate_spectral_mean",
    "estimate_spectral_covariance",
    "estimate_moments",
    "structure_project",
    "compute_psd",
    "write_moments_csv",
    "read_moments_csv",
]

MODES = ("paper-literal", "consistent")


def _panel_values(x) -> np.ndarray:
    """Accept a ReturnsPanel-like object (has .returns) or a plain (T, N) array."""
    values = getattr(x, "returns", x)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, np.newaxis]
    if values.ndim != 2:
        raise ValidationError(f"panel must be 2-d (T, N); got shape {values.shape}")
    if values.shape[0] == 0:
        raise ValidationError("empty panel: no samples to estimate from")
    if not np.all(np.isfinite(values)):
        raise ValidationError("panel contains non-finite values")
    return values


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValidationError(f"unknown estimator mode {mode!r}; expected one of {MODES}")


def _snap_window(values: np.ndarray, grid: FrequencyGrid, t0: int, snap: bool):
    """Trim to a commensurate window, discarding the oldest samples.

    The absolute time origin advances with the trim so the basis phase stays
    aligned with the retained rows.
    """
    if not snap:
        return values, t0
    snapped, discarded = commensurate_length(values.shape[0], grid)
    if discarded:
        warnings.warn(
            f"window snapped from {values.shape[0]} to {snapped} samples "
            f"({discarded} oldest discarded) to cover whole grid periods",
            stacklevel=3,
        )
        return values[discarded:], t0 + discarded
    return values, t0


def _projected_series(values: np.ndarray, grid: FrequencyGrid, t0: int) -> np.ndarray:
    """Rows u(t)^T of the upper-half projection, shape (T, M*N), bin-major."""
    n_samples, n_assets = values.shape
    t = np.arange(t0, t0 + n_samples, dtype=np.float64)
    phases = np.exp(-1j * np.outer(t, np.asarray(grid.omegas)))  # (T, M)
    scale = 1.0 / math.sqrt(2 * grid.n_bins)
    out = np.einsum("tm,ti->tmi", phases, values).reshape(n_samples, grid.n_bins * n_assets)
    out *= scale
    return out


def estimate_spectral_mean(
    x, grid: FrequencyGrid, mode: str = "paper-literal", t0: int = 0, snap: bool = True
) -> AugmentedVector:
    """Time-average of the projected series: (1/T) sum_t B(t)^H x(t).

    Parameters
    ----------
    x : (T, N) array or ReturnsPanel
        Real panel, T >= 2, no missing values.
    grid : FrequencyGrid
    mode : {"paper-literal", "consistent"}
        Output scale (see module docstring).
    t0 : int
        Absolute sample index of the first row; keeps phase aligned when
        estimating on a window that does not start at the series origin.
    snap : bool
        Snap the window to a whole number of least common periods (default).

    Returns
    -------
    AugmentedVector
        Conjugate-symmetric by construction; deterministic given input.
    """
    _check_mode(mode)
    values = _panel_values(x)
    if values.shape[0] < 2:
        raise ValidationError("need at least 2 samples to estimate the spectral mean")
    values, t0 = _snap_window(values, grid, t0, snap)
    upper = _projected_series(values, grid, t0).mean(axis=0)
    if mode == "consistent":
        upper = upper * (2 * grid.n_bins)
    return AugmentedVector.from_upper(upper)


def estimate_spectral_covariance(
    x,
    grid: FrequencyGrid,
    mean: AugmentedVector,
    mode: str = "paper-literal",
    t0: int = 0,
    snap: bool = True,
) -> "SpectralMoments":
    """Sample covariance of the projected series around the estimated mean.

    Computes (1/T) sum_t (u(t) - mean)(u(t) - mean)^H on the augmented vector
    u(t) = B(t)^H x(t), which is the time-average approximation of the
    expectation defining the augmented spectral covariance.  The outer-product
    form makes the augmented block structure, Hermitian symmetry and the
    per-bin bound ||P(w_m)||_2 <= ||R(w_m)||_2 hold exactly.

    ``mean`` must have been estimated on the same panel, grid and mode.
    """
    _check_mode(mode)
    values = _panel_values(x)
    values, t0 = _snap_window(values, grid, t0, snap)
    n_samples, n_assets = values.shape
    half = grid.n_bins * n_assets
    if mean.half_size != half:
        raise ValidationError(
            f"mean half-size {mean.half_size} does not match grid x assets ({half})"
        )
    centered_scale = 2 * grid.n_bins if mode == "consistent" else 1
    literal_mean = mean.upper / centered_scale
    deviations = _projected_series(values, grid, t0) - literal_mean
    r_block = deviations.T @ np.conj(deviations) / n_samples
    p_block = deviations.T @ deviations / n_samples
    cov = np.block([[r_block, p_block], [np.conj(p_block), np.conj(r_block)]])
    cov = structure_project(cov)
    if mode == "consistent":
        cov = cov * (2 * grid.n_bins) ** 2
    return SpectralMoments(
        grid=grid,
        n_assets=n_assets,
        mean=mean,
        covariance=cov,
        sample_count=n_samples,
        mode=mode,
    )


def estimate_moments(
    x, grid: FrequencyGrid, mode: str = "paper-literal", t0: int = 0, snap: bool = True
) -> "SpectralMoments":
    """Two-pass mean-then-covariance estimation on one window."""
    mean = estimate_spectral_mean(x, grid, mode=mode, t0=t0, snap=snap)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # snap warning already fired in the mean pass
        return estimate_spectral_covariance(x, grid, mean, mode=mode, t0=t0, snap=snap)


def structure_project(raw: np.ndarray) -> np.ndarray:
    """Re-impose the augmented block symmetries on a square matrix.

    Orthogonal (Frobenius) projection onto matrices of the form
    [[R, P], [conj(P), conj(R)]] with R Hermitian and P symmetric.  Idempotent
    and non-expansive; numerical hygiene after accumulation.  Does not force
    positive semi-definiteness (a near-PSD input stays near-PSD by Weyl's
    inequality).
    """
    raw = np.asarray(raw, dtype=np.complex128)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1] or raw.shape[0] % 2 != 0:
        raise ValidationError(f"expected a square even-sized matrix, got shape {raw.shape}")
    half = raw.shape[0] // 2
    r_avg = 0.5 * (raw[:half, :half] + np.conj(raw[half:, half:]))
    r_proj = 0.5 * (r_avg + np.conj(r_avg.T))
    p_avg = 0.5 * (raw[:half, half:] + np.conj(raw[half:, :half]))
    p_proj = 0.5 * (p_avg + p_avg.T)
    return np.block([[r_proj, p_proj], [np.conj(p_proj), np.conj(r_proj)]])


@dataclass(frozen=True)
class SpectralMoments:
    """Estimated augmented spectral mean and covariance on one grid.

    ``covariance`` is 2MN x 2MN with block layout [[R, P], [conj(P), conj(R)]];
    R and P are themselves M x M grids of N x N blocks whose off-diagonal
    entries are the dual-frequency statistics.
    """

    grid: FrequencyGrid
    n_assets: int
    mean: AugmentedVector
    covariance: np.ndarray
    sample_count: int
    mode: str = "paper-literal"

    def __post_init__(self) -> None:
        cov = np.asarray(self.covariance, dtype=np.complex128)
        half = self.grid.n_bins * self.n_assets
        if cov.shape != (2 * half, 2 * half):
            raise ValidationError(
                f"covariance shape {cov.shape} does not match 2MN = {2 * half}"
            )
        if self.mean.half_size != half:
            raise ValidationError("mean size does not match grid x assets")
        cov.flags.writeable = False
        object.__setattr__(self, "covariance", cov)

    @property
    def half_size(self) -> int:
        return self.grid.n_bins * self.n_assets

    def covariance_grid(self) -> np.ndarray:
        """Upper-left MN x MN block: R(w_m, w_n) blocks."""
        h = self.half_size
        return self.covariance[:h, :h]

    def pseudo_covariance_grid(self) -> np.ndarray:
        """Upper-right MN x MN block: P(w_m, w_n) blocks."""
        h = self.half_size
        return self.covariance[:h, h:]

    def _block(self, matrix: np.ndarray, row_bin: int, col_bin: int) -> np.ndarray:
        n = self.n_assets
        return matrix[row_bin * n : (row_bin + 1) * n, col_bin * n : (col_bin + 1) * n]

    def bin_covariance(self, m: int, n: int | None = None) -> np.ndarray:
        """R(w_m) for n omitted, else the dual-frequency block R(w_m, w_n)."""
        return self._block(self.covariance_grid(), m, m if n is None else n)

    def bin_pseudo_covariance(self, m: int, n: int | None = None) -> np.ndarray:
        """P(w_m) for n omitted, else the dual-frequency block P(w_m, w_n)."""
        return self._block(self.pseudo_covariance_grid(), m, m if n is None else n)

    def bin_mean(self, m: int) -> np.ndarray:
        n = self.n_assets
        return self.mean.upper[m * n : (m + 1) * n]

    def check_invariants(self, tol: float = 1e-10) -> None:
        """Raise ValidationError if any structural invariant is violated.

        Checks: conjugate symmetry of the mean, augmented block structure,
        Hermitian symmetry, positive semi-definiteness of the R grid, and the
        per-bin Cauchy-Schwarz bound ||P(w_m)||_2 <= ||R(w_m)||_2.
        """
        if not self.mean.is_conjugate_symmetric(tol):
            raise ValidationError("mean is not conjugate-symmetric")
        cov = self.covariance
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - structure_project(cov))) > tol * scale:
            raise ValidationError("covariance violates the augmented block structure")
        r_grid = self.covariance_grid()
        eigvals = np.linalg.eigvalsh(0.5 * (r_grid + np.conj(r_grid.T)))
        if eigvals.size and eigvals[0] < -tol * scale:
            raise ValidationError(f"covariance grid has negative eigenvalue {eigvals[0]:.3e}")
        for m in range(self.grid.n_bins):
            r_norm = float(np.linalg.norm(self.bin_covariance(m), 2))
            p_norm = float(np.linalg.norm(self.bin_pseudo_covariance(m), 2))
            if p_norm > r_norm + tol * scale:
                raise ValidationError(
                    f"bin {m}: ||P||_2 = {p_norm:.3e} exceeds ||R||_2 = {r_norm:.3e}"
                )


@dataclass(frozen=True)
class PsdMatrix:
    """Per-bin absolute (non-centred) second spectral moment, N x N per bin."""

    grid: FrequencyGrid
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.matrices) != self.grid.n_bins:
            raise ValidationError("one matrix per grid bin expected")
        frozen = []
        for mat in self.matrices:
            mat = np.asarray(mat, dtype=np.complex128)
            mat.flags.writeable = False
            frozen.append(mat)
        object.__setattr__(self, "matrices", tuple(frozen))

    def trace_per_bin(self) -> np.ndarray:
        return np.array([float(np.trace(m).real) for m in self.matrices])


def compute_psd(moments: SpectralMoments) -> PsdMatrix:
    """Absolute second moment per bin: mean(w_m) mean(w_m)^H + R(w_m).

    Mean and covariance information are entangled here, which is exactly why
    the centred moments are kept separate: a harmonic sitting in strong noise
    moves the absolute moment by ~|mean|^2, invisible next to R.
    """
    mats = []
    for m in range(moments.grid.n_bins):
        mean_m = moments.bin_mean(m)
        mats.append(np.outer(mean_m, np.conj(mean_m)) + moments.bin_covariance(m))
    return PsdMatrix(grid=moments.grid, matrices=tuple(mats))


# --- flat CSV serialization (lossless at double precision) ---------------------

_FORMAT_TAG = "specport-moments-v1"


def _fmt(value: float) -> str:
    return repr(float(value))


def write_moments_csv(moments: SpectralMoments, path) -> None:
    """Write moments to a flat CSV.

    Layout: ``meta`` rows (grid frequencies/periods, label, n_assets, n_bins,
    sample_count, mode), then ``mean,index,,re,im`` rows for the full stacked
    mean, then ``cov,row,col,re,im`` rows.  Floats are written with repr so the
    round trip is bit-exact.
    """
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["record", "i", "j", "re", "im"])
        writer.writerow(["meta", "format", _FORMAT_TAG, "", ""])
        writer.writerow(["meta", "omegas", ";".join(_fmt(w) for w in moments.grid.omegas), "", ""])
        periods = moments.grid.periods
        writer.writerow(
            ["meta", "periods", ";".join(str(p) for p in periods) if periods else "", "", ""]
        )
        writer.writerow(["meta", "label", moments.grid.sample_period_label, "", ""])
        writer.writerow(["meta", "n_assets", str(moments.n_assets), "", ""])
        writer.writerow(["meta", "n_bins", str(moments.grid.n_bins), "", ""])
        writer.writerow(["meta", "sample_count", str(moments.sample_count), "", ""])
        writer.writerow(["meta", "mode", moments.mode, "", ""])
        full_mean = moments.mean.full()
        for i, value in enumerate(full_mean):
            writer.writerow(["mean", str(i), "", _fmt(value.real), _fmt(value.imag)])
        cov = moments.covariance
        for i in range(cov.shape[0]):
            for j in range(cov.shape[1]):
                writer.writerow(["cov", str(i), str(j), _fmt(cov[i, j].real), _fmt(cov[i, j].imag)])


def read_moments_csv(path) -> SpectralMoments:
    """Inverse of :func:`write_moments_csv`."""
    path = Path(path)
    meta: dict[str, str] = {}
    mean_entries: dict[int, complex] = {}
    cov_entries: list[tuple[int, int, complex]] = []
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[0] != "record":
            raise ValidationError(f"{path}: not a moments CSV (missing header)")
        for row in reader:
            kind = row[0]
            if kind == "meta":
                meta[row[1]] = row[2]
            elif kind == "mean":
                mean_entries[int(row[1])] = complex(float(row[3]), float(row[4]))
            elif kind == "cov":
                cov_entries.append((int(row[1]), int(row[2]), complex(float(row[3]), float(row[4]))))
            else:
                raise ValidationError(f"{path}: unknown record kind {kind!r}")
    if meta.get("format") != _FORMAT_TAG:
        raise ValidationError(f"{path}: unsupported format tag {meta.get('format')!r}")
    omegas = tuple(float(tok) for tok in meta["omegas"].split(";"))
    periods = tuple(int(tok) for tok in meta["periods"].split(";")) if meta["periods"] else None
    grid = FrequencyGrid(omegas=omegas, periods=periods, sample_period_label=meta["label"])
    n_assets = int(meta["n_assets"])
    half = grid.n_bins * n_assets
    full_mean = np.zeros(2 * half, dtype=np.complex128)
    for i, value in mean_entries.items():
        full_mean[i] = value
    cov = np.zeros((2 * half, 2 * half), dtype=np.complex128)
    for i, j, value in cov_entries:
        cov[i, j] = value
    mean = AugmentedVector(upper=full_mean[:half], lower=full_mean[half:], enforced=True)
    return SpectralMoments(
        grid=grid,
        n_assets=n_assets,
        mean=mean,
        covariance=cov,
        sample_count=int(meta["sample_count"]),
        mode=meta["mode"],
    )
