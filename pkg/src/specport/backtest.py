"""Price ingestion, return computation, sample splitting, and the backtest protocol.

The protocol: estimate spectral moments on the in-sample window, solve the
frequency-domain allocation once, then hold the resulting deterministic
time-varying weight path through the out-of-sample window (the global sample
index continues across the split, keeping basis phase aligned — no look-ahead,
since weights are a fixed function of the in-sample estimates).  Classical
variance-targeted MVO and equal weight run alongside for comparison.
"""

from __future__ import annotations

import csv
import datetime
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .basis import FrequencyGrid
from .errors import IngestionError, SpecportError, ValidationError
from .moments import SpectralMoments, estimate_moments, write_moments_csv
from .optimize import (
    RiskSpec,
    SpectralWeights,
    StaticWeights,
    equal_weight,
    retrieve_allocation,
    solve_classical_mvo,
    solve_spectral_mvo,
)

__all__ = [
    "PricePanel",
    "ReturnsPanel",
    "ingest_csv",
    "read_returns_csv",
    "compute_returns",
    "split_sample",
    "run_strategy",
    "sharpe_ratio",
    "ProtocolConfig",
    "StrategyResult",
    "BacktestReport",
    "run_protocol",
    "PERIOD_LETTERS",
]

logger = logging.getLogger(__name__)

# Shorthand letters for monthly data: annual / semiannual / quarterly cycles.
PERIOD_LETTERS = {12: "A", 6: "S", 3: "Q"}


def parse_timestamp(token: str):
    """Parse an integer index or ISO date (YYYY-MM-DD or YYYY-MM)."""
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return datetime.date.fromisoformat(token)
    except ValueError:
        pass
    try:
        return datetime.date.fromisoformat(token + "-01")
    except ValueError:
        raise IngestionError(f"cannot parse timestamp {token!r} (expected int or ISO date)")


def _validate_timestamps(timestamps) -> tuple:
    timestamps = tuple(timestamps)
    if len(timestamps) >= 2:
        kinds = {type(ts) for ts in timestamps}
        if len(kinds) > 1:
            raise ValidationError("timestamps mix integer and date types")
        for prev, cur in zip(timestamps, timestamps[1:]):
            if not cur > prev:
                raise ValidationError(f"timestamps not strictly increasing at {cur}")
    return timestamps


@dataclass(frozen=True)
class PricePanel:
    """Strictly positive prices on strictly increasing timestamps."""

    timestamps: tuple
    prices: np.ndarray
    asset_names: tuple[str, ...]

    def __post_init__(self) -> None:
        prices = np.asarray(self.prices, dtype=np.float64)
        timestamps = _validate_timestamps(self.timestamps)
        if prices.ndim != 2:
            raise ValidationError("prices must be a (T, N) matrix")
        if prices.shape != (len(timestamps), len(self.asset_names)):
            raise ValidationError("prices shape does not match timestamps/asset names")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise ValidationError("prices must be finite and strictly positive")
        prices.flags.writeable = False
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "asset_names", tuple(self.asset_names))

    @property
    def n_assets(self) -> int:
        return len(self.asset_names)


@dataclass(frozen=True)
class ReturnsPanel:
    """Simple returns per period; each entry > -1 (prices are positive)."""

    timestamps: tuple
    returns: np.ndarray
    periods_per_year: int
    asset_names: tuple[str, ...]

    def __post_init__(self) -> None:
        returns = np.asarray(self.returns, dtype=np.float64)
        timestamps = _validate_timestamps(self.timestamps)
        if returns.ndim != 2 or returns.shape != (len(timestamps), len(self.asset_names)):
            raise ValidationError("returns shape does not match timestamps/asset names")
        if not np.all(np.isfinite(returns)):
            raise ValidationError("returns contain non-finite values")
        if np.any(returns <= -1.0):
            raise ValidationError("returns must exceed -1 (total loss)")
        if self.periods_per_year < 1:
            raise ValidationError("periods_per_year must be >= 1")
        returns.flags.writeable = False
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "asset_names", tuple(self.asset_names))

    @property
    def n_assets(self) -> int:
        return len(self.asset_names)

    @property
    def n_samples(self) -> int:
        return self.returns.shape[0]

    def slice(self, start: int, stop: int) -> "ReturnsPanel":
        return ReturnsPanel(
            timestamps=self.timestamps[start:stop],
            returns=self.returns[start:stop],
            periods_per_year=self.periods_per_year,
            asset_names=self.asset_names,
        )


def _read_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    path = Path(path)
    try:
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            rows = [(line_no, row) for line_no, row in enumerate(reader, start=1) if row]
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise IngestionError(f"{path}: empty file")
    header = rows[0][1]
    if len(header) < 2:
        raise IngestionError(f"{path}: header must have a timestamp column plus assets")
    return header, rows[1:]


def _parse_panel_rows(path, rows, n_cells: int, require_positive: bool):
    """Shared row parsing: returns (timestamps, values, dropped_count).

    Rows with any missing, non-numeric, non-finite (or non-positive, for
    prices) cell are dropped with a logged warning.  Duplicate or
    non-increasing timestamps among the kept rows are an error naming the
    offending source row.
    """
    timestamps: list = []
    values: list[list[float]] = []
    line_numbers: list[int] = []
    dropped = 0
    for line_no, row in rows:
        ok = len(row) == n_cells + 1
        ts = None
        if ok:
            try:
                ts = parse_timestamp(row[0])
            except IngestionError:
                ok = False
        cells: list[float] = []
        if ok:
            for token in row[1:]:
                token = token.strip()
                if not token:
                    ok = False
                    break
                try:
                    value = float(token)
                except ValueError:
                    ok = False
                    break
                if not math.isfinite(value) or (require_positive and value <= 0.0):
                    ok = False
                    break
                cells.append(value)
        if not ok:
            dropped += 1
            logger.warning("%s: dropping unusable row %d", path, line_no)
            continue
        timestamps.append(ts)
        values.append(cells)
        line_numbers.append(line_no)
    if dropped:
        logger.warning("%s: dropped %d unusable row(s)", path, dropped)
    for i in range(1, len(timestamps)):
        if timestamps[i] == timestamps[i - 1]:
            raise IngestionError(
                f"{path}: duplicate timestamp {timestamps[i]} at row {line_numbers[i]}"
            )
        if type(timestamps[i]) is type(timestamps[i - 1]) and timestamps[i] < timestamps[i - 1]:
            raise IngestionError(
                f"{path}: non-increasing timestamp {timestamps[i]} at row {line_numbers[i]}"
            )
    return timestamps, values, dropped


def ingest_csv(path) -> PricePanel:
    """Read a price panel CSV: header ``date,ASSET1,...``, ISO dates, decimal prices.

    Rows with missing or non-positive cells are dropped with a logged warning
    and count; fewer than 3 usable rows, duplicate timestamps or non-increasing
    dates are errors with row context.
    """
    header, rows = _read_rows(path)
    timestamps, values, _ = _parse_panel_rows(path, rows, len(header) - 1, require_positive=True)
    if len(values) < 3:
        raise IngestionError(f"{path}: only {len(values)} usable rows; need at least 3")
    return PricePanel(
        timestamps=tuple(timestamps),
        prices=np.asarray(values, dtype=np.float64),
        asset_names=tuple(name.strip() for name in header[1:]),
    )


def read_returns_csv(path, periods_per_year: int = 12) -> ReturnsPanel:
    """Read a panel CSV of returns (same layout as the price format)."""
    header, rows = _read_rows(path)
    timestamps, values, _ = _parse_panel_rows(path, rows, len(header) - 1, require_positive=False)
    if len(values) < 2:
        raise IngestionError(f"{path}: only {len(values)} usable rows; need at least 2")
    return ReturnsPanel(
        timestamps=tuple(timestamps),
        returns=np.asarray(values, dtype=np.float64),
        periods_per_year=periods_per_year,
        asset_names=tuple(name.strip() for name in header[1:]),
    )


def compute_returns(panel: PricePanel, periods_per_year: int = 12) -> ReturnsPanel:
    """Simple returns (p(t) - p(t-1)) / p(t-1); timestamps follow the later price."""
    prices = panel.prices
    returns = prices[1:] / prices[:-1] - 1.0
    return ReturnsPanel(
        timestamps=panel.timestamps[1:],
        returns=returns,
        periods_per_year=periods_per_year,
        asset_names=panel.asset_names,
    )


def split_sample(returns: ReturnsPanel, boundary) -> tuple[ReturnsPanel, ReturnsPanel]:
    """Split into (strictly before boundary, at/after boundary).

    The boundary must fall strictly inside the timestamp range so both sides
    are non-empty; the union is the original panel.
    """
    if isinstance(boundary, str):
        boundary = parse_timestamp(boundary)
    first = returns.timestamps[0]
    if isinstance(boundary, datetime.date) != isinstance(first, datetime.date):
        raise ValidationError(
            f"boundary {boundary!r} does not match the panel's timestamp type "
            f"({type(first).__name__})"
        )
    split_at = sum(1 for ts in returns.timestamps if ts < boundary)
    if split_at == 0 or split_at == returns.n_samples:
        raise ValidationError(
            f"boundary {boundary} is outside the sample range "
            f"[{returns.timestamps[0]} .. {returns.timestamps[-1]}]"
        )
    return returns.slice(0, split_at), returns.slice(split_at, returns.n_samples)


def run_strategy(returns_out: ReturnsPanel, allocation) -> np.ndarray:
    """Portfolio return series r_p(t) = w(t)^T x(t).

    ``allocation`` is either a StaticWeights or a (T, N) path aligned with the
    out-sample rows (w(t) is the allocation held over the interval ending at t).
    """
    values = returns_out.returns
    if isinstance(allocation, StaticWeights):
        weights = allocation.weights
        if weights.shape[0] != values.shape[1]:
            raise ValidationError(
                f"static weights ({weights.shape[0]}) do not match assets ({values.shape[1]})"
            )
        return values @ weights
    path = np.asarray(allocation, dtype=np.float64)
    if path.shape != values.shape:
        raise ValidationError(
            f"allocation path shape {path.shape} misaligned with returns {values.shape}"
        )
    return np.sum(path * values, axis=1)


def sharpe_ratio(series, periods_per_year: int) -> float:
    """Annualized mean-to-standard-deviation ratio; NaN when the variance is zero.

    Sample standard deviation (denominator T-1), annualization by
    sqrt(periods_per_year).
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1 or series.size < 2:
        raise ValidationError("need a series of at least 2 returns")
    std = float(np.std(series, ddof=1))
    if std == 0.0 or np.all(series == series[0]):
        return float("nan")
    return float(np.mean(series)) / std * math.sqrt(periods_per_year)


# --- the protocol ----------------------------------------------------------------


@dataclass(frozen=True)
class ProtocolConfig:
    """Configuration for one full backtest run.

    ``data`` may be a CSV path, a PricePanel, or a ReturnsPanel.  ``grids``
    lists the period subsets to solve, one spectral strategy each.
    ``sigma0_annual`` is converted to a per-period target by dividing by
    sqrt(periods_per_year).
    """

    data: object
    boundary: object
    grids: tuple[tuple[int, ...], ...] = ((12,), (12, 6), (12, 6, 3))
    sigma0_annual: float = 0.01
    ridge: float | None = None
    mode: str = "paper-literal"
    demean: bool = False
    periods_per_year: int = 12
    input_type: str = "prices"


@dataclass(frozen=True)
class StrategyResult:
    name: str
    slug: str
    sharpe: float
    annualized_vol: float
    total_return: float
    portfolio_returns: np.ndarray
    cumulative: np.ndarray
    allocations: np.ndarray

    @property
    def sharpe_defined(self) -> bool:
        return not math.isnan(self.sharpe)


@dataclass(frozen=True)
class BacktestReport:
    strategies: tuple[StrategyResult, ...]
    out_timestamps: tuple
    metadata: dict = field(default_factory=dict)
    moments: SpectralMoments | None = None

    def strategy(self, slug: str) -> StrategyResult:
        for result in self.strategies:
            if result.slug == slug:
                return result
        raise KeyError(slug)

    def render_text(self) -> str:
        lines = ["backtest report", "=" * 15, ""]
        for key in sorted(self.metadata):
            lines.append(f"{key}: {self.metadata[key]}")
        lines.append("")
        names = [s.name for s in self.strategies]
        sharpes = [
            f"{s.sharpe:.4f}" if s.sharpe_defined else "undefined" for s in self.strategies
        ]
        widths = [max(len(n), len(v)) for n, v in zip(names, sharpes)]
        lines.append("annualized out-of-sample Sharpe ratios:")
        lines.append("| " + " | ".join(n.ljust(w) for n, w in zip(names, widths)) + " |")
        lines.append("| " + " | ".join(v.ljust(w) for v, w in zip(sharpes, widths)) + " |")
        lines.append("")
        for s in self.strategies:
            sharpe = f"{s.sharpe:.4f}" if s.sharpe_defined else "undefined (zero variance)"
            lines.append(
                f"{s.name}: sharpe={sharpe} ann_vol={s.annualized_vol:.6f} "
                f"total_return={s.total_return:.6f}"
            )
        lines.append("")
        return "\n".join(lines)

    def write_outputs(self, out_dir, asset_names: Sequence[str]) -> dict[str, Path]:
        """Write report.txt plus the CSV artifacts; returns the paths written."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths: dict[str, Path] = {}

        report_path = out_dir / "report.txt"
        report_path.write_text(self.render_text())
        paths["report"] = report_path

        cum_path = out_dir / "cumulative_returns.csv"
        with cum_path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["timestamp"] + [s.slug for s in self.strategies])
            for i, ts in enumerate(self.out_timestamps):
                writer.writerow([ts] + [repr(float(s.cumulative[i])) for s in self.strategies])
        paths["cumulative_returns"] = cum_path

        sharpe_path = out_dir / "plot_sharpe.csv"
        with sharpe_path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["strategy", "sharpe"])
            for s in self.strategies:
                writer.writerow([s.name, repr(float(s.sharpe))])
        paths["plot_sharpe"] = sharpe_path

        for s in self.strategies:
            alloc_path = out_dir / f"allocations_{s.slug}.csv"
            with alloc_path.open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["timestamp"] + list(asset_names))
                for i, ts in enumerate(self.out_timestamps):
                    writer.writerow([ts] + [repr(float(v)) for v in s.allocations[i]])
            paths[f"allocations_{s.slug}"] = alloc_path

        spectral = [s for s in self.strategies if s.slug.startswith("spectral")]
        if spectral:
            month_path = out_dir / "allocation_by_month.csv"
            ppy = int(self.metadata.get("periods_per_year", 12))
            target = spectral[-1]
            months = np.array([_month_of_year(ts, ppy) for ts in self.out_timestamps])
            with month_path.open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["month"] + list(asset_names))
                for month in range(1, ppy + 1):
                    mask = months == month
                    if not np.any(mask):
                        continue
                    means = target.allocations[mask].mean(axis=0)
                    writer.writerow([month] + [repr(float(v)) for v in means])
            paths["allocation_by_month"] = month_path

        if self.moments is not None:
            moments_path = out_dir / "spectral_moments.csv"
            write_moments_csv(self.moments, moments_path)
            paths["spectral_moments"] = moments_path
        return paths


def _month_of_year(ts, periods_per_year: int) -> int:
    if isinstance(ts, datetime.date):
        return ts.month
    return int(ts) % periods_per_year + 1


def grid_label(periods: Sequence[int], periods_per_year: int = 12) -> str:
    """Human label for a grid subset, using A/S/Q letters on monthly data."""
    tokens = []
    for p in periods:
        if periods_per_year == 12 and p in PERIOD_LETTERS:
            tokens.append(PERIOD_LETTERS[p])
        else:
            tokens.append(str(p))
    return ",".join(tokens)


def _slugify(label: str) -> str:
    return label.lower().replace(",", "_").replace(" ", "")


def _resolve_returns(config: ProtocolConfig) -> ReturnsPanel:
    data = config.data
    if isinstance(data, ReturnsPanel):
        return data
    if isinstance(data, PricePanel):
        return compute_returns(data, config.periods_per_year)
    if isinstance(data, (str, Path)):
        if config.input_type == "returns":
            return read_returns_csv(data, config.periods_per_year)
        panel = ingest_csv(data)
        return compute_returns(panel, config.periods_per_year)
    raise ValidationError(f"unsupported data source type {type(data).__name__}")


def _stage(name: str, exc: SpecportError) -> SpecportError:
    return type(exc)(f"[stage: {name}] {exc}")


def run_protocol(config: ProtocolConfig) -> BacktestReport:
    """Run the full in/out-of-sample comparison and assemble a report.

    Stages: ingest -> split -> spectral estimation + solve per grid subset ->
    classical MVO + equal weight -> out-of-sample evaluation.  Errors from any
    stage are re-raised with a stage label.
    """
    try:
        returns = _resolve_returns(config)
    except SpecportError as exc:
        raise _stage("ingest", exc) from exc

    try:
        in_panel, out_panel = split_sample(returns, config.boundary)
    except SpecportError as exc:
        raise _stage("split", exc) from exc

    ppy = returns.periods_per_year
    sigma0_period = config.sigma0_annual / math.sqrt(ppy)
    risk = RiskSpec(sigma0=sigma0_period, ridge=config.ridge)
    n_in = in_panel.n_samples
    n_out = out_panel.n_samples
    out_t = np.arange(n_in, n_in + n_out)

    est_values = in_panel.returns
    if config.demean:
        est_values = est_values - est_values.mean(axis=0, keepdims=True)

    strategies: list[StrategyResult] = []
    last_moments: SpectralMoments | None = None

    for periods in config.grids:
        label = grid_label(periods, ppy)
        name = f"Spectral MVO ({label})"
        try:
            grid = FrequencyGrid.from_periods(periods)
            moments = estimate_moments(est_values, grid, mode=config.mode)
            weights: SpectralWeights = solve_spectral_mvo(moments, risk)
            allocation = retrieve_allocation(weights, out_t)
        except SpecportError as exc:
            raise _stage(f"spectral[{label}]", exc) from exc
        series = run_strategy(out_panel, allocation)
        strategies.append(_evaluate(name, f"spectral_mvo_{_slugify(label)}", series, allocation, ppy))
        last_moments = moments

    try:
        mvo_mean = in_panel.returns.mean(axis=0)
        mvo_cov = np.cov(in_panel.returns, rowvar=False, ddof=1)
        mvo_cov = np.atleast_2d(mvo_cov)
        static = solve_classical_mvo(mvo_mean, mvo_cov, risk)
    except SpecportError as exc:
        raise _stage("classical-mvo", exc) from exc
    series = run_strategy(out_panel, static)
    strategies.append(
        _evaluate("MVO", "mvo", series, np.tile(static.weights, (n_out, 1)), ppy)
    )

    ew = equal_weight(returns.n_assets)
    series = run_strategy(out_panel, ew)
    strategies.append(_evaluate("EW", "ew", series, np.tile(ew.weights, (n_out, 1)), ppy))

    metadata = {
        "boundary": str(config.boundary),
        "grids": ";".join(grid_label(g, ppy) for g in config.grids),
        "sigma0_annual": repr(float(config.sigma0_annual)),
        "sigma0_per_period": repr(float(sigma0_period)),
        "ridge": "auto" if config.ridge is None else repr(float(config.ridge)),
        "mode": config.mode,
        "demean": str(config.demean),
        "periods_per_year": str(ppy),
        "in_sample_returns": str(n_in),
        "out_sample_returns": str(n_out),
        "assets": ",".join(returns.asset_names),
    }
    return BacktestReport(
        strategies=tuple(strategies),
        out_timestamps=out_panel.timestamps,
        metadata=metadata,
        moments=last_moments,
    )


def _evaluate(name, slug, series, allocations, ppy) -> StrategyResult:
    cumulative = np.cumprod(1.0 + series) - 1.0
    return StrategyResult(
        name=name,
        slug=slug,
        sharpe=sharpe_ratio(series, ppy),
        annualized_vol=float(np.std(series, ddof=1)) * math.sqrt(ppy),
        total_return=float(cumulative[-1]),
        portfolio_returns=series,
        cumulative=cumulative,
        allocations=np.asarray(allocations, dtype=np.float64),
    )
