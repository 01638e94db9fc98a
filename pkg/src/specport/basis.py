"""Augmented spectral basis: the mapping between time domain and frequency domain.

A signal sample x(t) in R^N is represented on a discrete grid of M angular
frequencies through the row-orthonormal matrix

    B(t) = [ C(t) | conj(C(t)) ],   C(t) = (1/sqrt(2M)) [e^{j w_1 t} I_N, ..., e^{j w_M t} I_N]

so that x(t) = B(t) @ [u; conj(u)] = 2 Re(C(t) @ u) for any complex
coefficient vector u of length M*N.  B(t) B(t)^H = I_N exactly, which makes
B(t)^H a right inverse and the per-sample least-squares projection trivial.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SymmetryViolationError, ValidationError

__all__ = [
    "FrequencyGrid",
    "AugmentedVector",
    "AugmentedSpectralBasis",
    "build_basis",
    "synthesize_time_value",
    "synthesize_series",
    "project_spectrum",
    "commensurate_length",
]

_PERIOD_INT_TOL = 1e-9


def _as_period(omega: float) -> int | None:
    """Integer period 2*pi/omega if it is one to within tolerance, else None."""
    p = 2.0 * math.pi / omega
    rounded = round(p)
    if rounded >= 2 and abs(p - rounded) <= _PERIOD_INT_TOL * p:
        return rounded
    return None


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing angular frequencies in (0, pi], radians per sample.

    The DC bin (omega = 0) is excluded: it has no conjugate partner and would
    break the 2M column pairing; handle constant offsets by demeaning instead.
    Frequencies at exactly pi (Nyquist) are allowed but the conjugate pair is
    phase-degenerate, so construction warns.

    Prefer :meth:`from_periods`, which takes integer periods in samples and
    guarantees a commensurate grid (a finite least common period), which the
    moment estimators rely on.
    """

    omegas: tuple[float, ...]
    periods: tuple[int, ...] | None = None
    sample_period_label: str = "sample"

    def __post_init__(self) -> None:
        if len(self.omegas) < 1:
            raise ValidationError("frequency grid must contain at least one bin")
        prev = 0.0
        for w in self.omegas:
            if not (w > 0.0):
                raise ValidationError(f"frequency {w} is not strictly positive (DC excluded)")
            if w > math.pi + 1e-15:
                raise ValidationError(f"frequency {w} exceeds pi (super-Nyquist)")
            if w <= prev:
                raise ValidationError("frequencies must be strictly increasing with no duplicates")
            prev = w
        if self.periods is not None and len(self.periods) != len(self.omegas):
            raise ValidationError("periods metadata does not match number of bins")
        if any(abs(w - math.pi) <= 1e-12 for w in self.omegas):
            warnings.warn(
                "grid contains the Nyquist frequency pi; its conjugate pair is "
                "phase-degenerate",
                stacklevel=2,
            )

    @classmethod
    def from_periods(cls, periods, sample_period_label: str = "sample") -> "FrequencyGrid":
        """Build a grid from integer periods in samples (e.g. 12, 6, 3 for monthly data).

        Periods must be distinct integers >= 2; they are sorted so frequencies
        2*pi/period come out strictly increasing.
        """
        plist = [int(p) for p in periods]
        if any(p != float(q) for p, q in zip(periods, plist)):
            raise ValidationError("periods must be integers (samples per cycle)")
        if len(set(plist)) != len(plist):
            raise ValidationError(f"duplicate periods in {plist}")
        if any(p < 2 for p in plist):
            raise ValidationError("periods must be >= 2 samples (period 1 would be super-Nyquist)")
        plist.sort(reverse=True)
        omegas = tuple(2.0 * math.pi / p for p in plist)
        return cls(omegas=omegas, periods=tuple(plist), sample_period_label=sample_period_label)

    @property
    def n_bins(self) -> int:
        return len(self.omegas)

    def bin_periods(self) -> tuple[int, ...] | None:
        """Integer periods per bin, from metadata or inferred from the frequencies."""
        if self.periods is not None:
            return self.periods
        inferred = tuple(_as_period(w) for w in self.omegas)
        if any(p is None for p in inferred):
            return None
        return inferred  # type: ignore[return-value]

    def least_common_period(self) -> int:
        """Smallest window over which every bin (and every beat) completes whole cycles.

        For integer periods p_m the LCM also covers all sum/difference beats
        2*pi/(w_m +- w_n), since (p_n +- p_m)/gcd(p_m, p_n) is an integer.
        """
        periods = self.bin_periods()
        if periods is None:
            raise ValidationError(
                "grid frequencies do not correspond to integer periods; "
                "no commensurate window exists"
            )
        return math.lcm(*periods)


def commensurate_length(n_samples: int, grid: FrequencyGrid) -> tuple[int, int]:
    """Snap a window length down to a whole number of least common periods.

    Returns (snapped_length, discarded_count).  Raises if the window does not
    cover a single full least common period.
    """
    lcm = grid.least_common_period()
    snapped = (n_samples // lcm) * lcm
    if snapped == 0:
        raise ValidationError(
            f"window of {n_samples} samples is shorter than one least common "
            f"period ({lcm} samples) of the grid"
        )
    return snapped, n_samples - snapped


@dataclass(frozen=True)
class AugmentedVector:
    """A frequency-domain vector stacked with its conjugate half.

    ``upper`` holds the M*N coefficients (bin-major: bin 0 assets, bin 1
    assets, ...), ``lower`` the second half.  The vector is conjugate-symmetric
    iff lower == conj(upper), which is what makes the synthesized time-domain
    value real.  ``enforced`` records whether that invariant was imposed at
    construction.
    """

    upper: np.ndarray
    lower: np.ndarray
    enforced: bool = field(default=False)

    def __post_init__(self) -> None:
        upper = np.asarray(self.upper, dtype=np.complex128)
        lower = np.asarray(self.lower, dtype=np.complex128)
        if upper.ndim != 1 or lower.shape != upper.shape:
            raise ValidationError("upper and lower halves must be 1-d and equally long")
        upper.flags.writeable = False
        lower.flags.writeable = False
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "lower", lower)

    @classmethod
    def from_upper(cls, upper) -> "AugmentedVector":
        upper = np.asarray(upper, dtype=np.complex128)
        return cls(upper=upper, lower=np.conj(upper), enforced=True)

    @classmethod
    def zeros(cls, half_size: int) -> "AugmentedVector":
        return cls.from_upper(np.zeros(half_size, dtype=np.complex128))

    @property
    def half_size(self) -> int:
        return self.upper.shape[0]

    def full(self) -> np.ndarray:
        """The stacked 2*M*N vector [upper; lower]."""
        return np.concatenate([self.upper, self.lower])

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.upper), initial=0.0)))
        return bool(np.max(np.abs(self.lower - np.conj(self.upper)), initial=0.0) <= tol * scale)


@dataclass(frozen=True)
class AugmentedSpectralBasis:
    """The N x 2MN basis matrix at one sample index.

    ``values`` is partitioned as [C(t) | conj(C(t))] where the m-th block of
    C(t) is (1/sqrt(2M)) e^{j w_m t} I_N.  Rows are orthonormal:
    values @ values^H == I_N.
    """

    t: int
    grid: FrequencyGrid
    n_assets: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def half_columns(self) -> int:
        return self.grid.n_bins * self.n_assets


def build_basis(t: int, grid: FrequencyGrid, n_assets: int) -> AugmentedSpectralBasis:
    """Construct the augmented basis at sample index t.

    Parameters
    ----------
    t : int
        Sample index (may be negative; the basis is periodic).
    grid : FrequencyGrid
    n_assets : int
        N >= 1.

    Returns
    -------
    AugmentedSpectralBasis
        With entries exactly (1/sqrt(2M)) e^{+-j w_m t} on identity blocks.
    """
    if n_assets < 1:
        raise ValidationError("n_assets must be >= 1")
    m = grid.n_bins
    scale = 1.0 / math.sqrt(2 * m)
    phases = np.exp(1j * np.asarray(grid.omegas) * float(t)) * scale
    eye = np.eye(n_assets)
    upper = np.kron(phases[np.newaxis, :], eye).reshape(n_assets, m * n_assets)
    values = np.concatenate([upper, np.conj(upper)], axis=1)
    return AugmentedSpectralBasis(t=int(t), grid=grid, n_assets=n_assets, values=values)


def _check_spectrum(basis_half: int, spectrum: AugmentedVector) -> None:
    if spectrum.half_size != basis_half:
        raise ValidationError(
            f"spectrum half-size {spectrum.half_size} does not match basis ({basis_half})"
        )
    if not spectrum.is_conjugate_symmetric():
        raise SymmetryViolationError(
            "spectrum is not conjugate-symmetric (lower != conj(upper)); "
            "synthesis would not be real-valued"
        )


def synthesize_time_value(basis: AugmentedSpectralBasis, spectrum: AugmentedVector) -> np.ndarray:
    """Evaluate the time-domain value B(t) @ [u; conj(u)] and return its real part.

    Raises SymmetryViolationError for a non-conjugate-symmetric spectrum.  The
    imaginary residual of the product is checked against 1e-12 (relative)
    before it is discarded.
    """
    _check_spectrum(basis.half_columns, spectrum)
    value = basis.values @ spectrum.full()
    scale = max(1.0, float(np.max(np.abs(value), initial=0.0)))
    residual = float(np.max(np.abs(value.imag), initial=0.0))
    if residual > 1e-12 * scale:
        raise SymmetryViolationError(f"imaginary residual {residual:.3e} exceeds tolerance")
    return value.real.copy()


def synthesize_series(
    spectrum: AugmentedVector, grid: FrequencyGrid, t_indices, n_assets: int
) -> np.ndarray:
    """Evaluate the synthesis at many sample indices at once.

    Equivalent to stacking ``synthesize_time_value(build_basis(t, ...), spectrum)``
    over t, computed as (2/sqrt(2M)) Re(sum_m e^{j w_m t} u_m), which is exactly
    real by construction.

    Returns a (len(t_indices), n_assets) float array.
    """
    _check_spectrum(grid.n_bins * n_assets, spectrum)
    t = np.asarray(t_indices, dtype=np.float64)
    phases = np.exp(1j * np.outer(t, np.asarray(grid.omegas)))  # (T, M)
    coeff = spectrum.upper.reshape(grid.n_bins, n_assets)
    scale = 2.0 / math.sqrt(2 * grid.n_bins)
    return scale * np.real(phases @ coeff)


def project_spectrum(basis: AugmentedSpectralBasis, x) -> AugmentedVector:
    """Per-sample least-squares projection B(t)^H x, conjugate-symmetric by construction.

    Because the basis has orthonormal rows, synthesize(project(x)) == x exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (basis.n_assets,):
        raise ValidationError(f"expected real vector of length {basis.n_assets}, got {x.shape}")
    upper = np.conj(basis.values[:, : basis.half_columns]).T @ x
    return AugmentedVector.from_upper(upper)
