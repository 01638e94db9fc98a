"""Command-line entry point: synth / estimate / backtest.

Exit codes: 0 success, 1 computation error, 2 input or usage error.  Every run
writes a ``*_config.json`` echo sufficient to reproduce it; all randomness
flows from --seed.

Allocation retrieval uses the full augmented (conjugate-paired) basis, which
is what makes the weight path real-valued; grids are specified as integer
periods in samples, with A/S/Q shortcuts for 12/6/3 on monthly data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import (
    PERIOD_LETTERS,
    ProtocolConfig,
    compute_returns,
    ingest_csv,
    read_returns_csv,
    run_protocol,
)
from .basis import FrequencyGrid
from .errors import (
    DegenerateMeanError,
    FactorizationError,
    IngestionError,
    SingularCovarianceError,
    SpecportError,
    ValidationError,
)
from .moments import compute_psd, estimate_moments, write_moments_csv
from .synthesis import example1_scenario, seasonal_market_spec, synthesize_values

_LETTER_PERIODS = {letter: period for period, letter in PERIOD_LETTERS.items()}


def _parse_periods(token: str) -> tuple[int, ...]:
    """Parse a comma list of periods; A/S/Q letters map to 12/6/3."""
    periods = []
    for part in token.split(","):
        part = part.strip()
        if not part:
            continue
        upper = part.upper()
        if upper in _LETTER_PERIODS:
            periods.append(_LETTER_PERIODS[upper])
        else:
            try:
                periods.append(int(part))
            except ValueError:
                raise ValidationError(f"cannot parse grid period {part!r}")
    if not periods:
        raise ValidationError(f"no grid periods in {token!r}")
    return tuple(periods)


def _parse_grids(token: str) -> tuple[tuple[int, ...], ...]:
    """Semicolon-separated list of grid subsets, e.g. 'A;A,S;A,S,Q' or '12;12,6'."""
    return tuple(_parse_periods(part) for part in token.split(";") if part.strip())


def _write_config_echo(path: Path, command: str, params: dict) -> None:
    payload = {"tool": "specport", "version": __version__, "command": command, **params}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _month_sequence(start: str, count: int) -> list[str]:
    """ISO first-of-month dates starting at YYYY-MM."""
    year, month = (int(tok) for tok in start.split("-")[:2])
    out = []
    for _ in range(count):
        out.append(f"{year:04d}-{month:02d}-01")
        month += 1
        if month > 12:
            month = 1
            year += 1
    return out


def _write_panel_csv(path: Path, timestamps, names, values) -> None:
    import csv

    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date"] + list(names))
        for ts, row in zip(timestamps, values):
            writer.writerow([ts] + [repr(float(v)) for v in row])


def _cmd_synth(args) -> int:
    if args.horizon < 1:
        raise ValidationError("horizon (-T) must be >= 1")
    if args.example1:
        spec = example1_scenario(seed=args.seed, horizon=args.horizon)
        default_format = "returns"
    else:
        spec = seasonal_market_spec(
            n_assets=args.n_assets,
            periods=_parse_periods(args.periods),
            seed=args.seed,
            mean_amp=args.mean_amp,
            noise_vol=args.noise_vol,
            horizon=args.horizon,
        )
        default_format = "prices"
    out_format = args.format or default_format

    values = synthesize_values(spec)
    names = [f"SYN{i + 1}" for i in range(spec.n_assets)]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)

    if out_format == "prices":
        prices = 100.0 * np.cumprod(1.0 + values, axis=0)
        prices = np.vstack([np.full((1, spec.n_assets), 100.0), prices])
        timestamps = _month_sequence(args.start_date, prices.shape[0])
        _write_panel_csv(out, timestamps, names, prices)
    else:
        timestamps = list(range(values.shape[0]))
        _write_panel_csv(out, timestamps, names, values)

    _write_config_echo(
        out.with_name(out.name + ".config.json"),
        "synth",
        {
            "out": str(out),
            "horizon": args.horizon,
            "seed": args.seed,
            "example1": bool(args.example1),
            "periods": args.periods,
            "n_assets": args.n_assets,
            "mean_amp": args.mean_amp,
            "noise_vol": args.noise_vol,
            "format": out_format,
            "start_date": args.start_date,
        },
    )
    print(f"wrote {values.shape[0]} samples x {spec.n_assets} assets to {out}")
    return 0


def _cmd_estimate(args) -> int:
    data = Path(args.data)
    if not data.exists():
        raise IngestionError(f"input file {data} does not exist")
    if args.input_type == "prices":
        returns = compute_returns(ingest_csv(data), args.periods_per_year)
    else:
        returns = read_returns_csv(data, args.periods_per_year)
    values = returns.returns
    if args.demean:
        values = values - values.mean(axis=0, keepdims=True)
    grid = FrequencyGrid.from_periods(_parse_periods(args.periods))
    moments = estimate_moments(values, grid, mode=args.mode)
    psd = compute_psd(moments)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_moments_csv(moments, out_dir / "spectral_moments.csv")

    periods = grid.bin_periods()
    header = f"{'bin':>3} {'period':>7} {'|mean|':>12} {'||R||':>12} {'||P||':>12} {'psd':>12}"
    print(header)
    rows = []
    for m in range(grid.n_bins):
        mean_norm = float(np.linalg.norm(moments.bin_mean(m)))
        r_norm = float(np.linalg.norm(moments.bin_covariance(m), 2))
        p_norm = float(np.linalg.norm(moments.bin_pseudo_covariance(m), 2))
        psd_trace = float(np.trace(psd.matrices[m]).real)
        rows.append((m, periods[m] if periods else "", mean_norm, r_norm, p_norm, psd_trace))
        print(f"{m:>3} {rows[-1][1]:>7} {mean_norm:>12.6e} {r_norm:>12.6e} {p_norm:>12.6e} {psd_trace:>12.6e}")

    import csv

    with (out_dir / "moments_summary.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin", "period", "mean_norm", "cov_norm", "pseudo_norm", "psd_trace"])
        for row in rows:
            writer.writerow([row[0], row[1]] + [repr(v) for v in row[2:]])

    _write_config_echo(
        out_dir / "estimate_config.json",
        "estimate",
        {
            "data": str(data),
            "periods": args.periods,
            "mode": args.mode,
            "demean": bool(args.demean),
            "input_type": args.input_type,
            "periods_per_year": args.periods_per_year,
            "out_dir": str(out_dir),
        },
    )
    print(f"wrote {out_dir / 'spectral_moments.csv'}")
    return 0


def _cmd_backtest(args) -> int:
    data = Path(args.data)
    if not data.exists():
        raise IngestionError(f"input file {data} does not exist")
    config = ProtocolConfig(
        data=str(data),
        boundary=args.boundary,
        grids=_parse_grids(args.grids),
        sigma0_annual=args.sigma0_annual,
        ridge=args.ridge,
        mode=args.mode,
        demean=args.demean,
        periods_per_year=args.periods_per_year,
        input_type=args.input_type,
    )
    report = run_protocol(config)
    out_dir = Path(args.out_dir)
    asset_names = report.metadata["assets"].split(",")
    paths = report.write_outputs(out_dir, asset_names)
    _write_config_echo(
        out_dir / "backtest_config.json",
        "backtest",
        {
            "data": str(data),
            "boundary": args.boundary,
            "grids": args.grids,
            "sigma0_annual": args.sigma0_annual,
            "ridge": args.ridge,
            "mode": args.mode,
            "demean": bool(args.demean),
            "periods_per_year": args.periods_per_year,
            "input_type": args.input_type,
            "out_dir": str(out_dir),
        },
    )
    print(report.render_text())
    print(f"report written to {paths['report']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specport",
        description=(
            "Frequency-domain mean-variance portfolio optimization: synthesize "
            "panels, estimate spectral moments, and backtest time-varying "
            "allocations against classical baselines."
        ),
    )
    parser.add_argument("--version", action="version", version=f"specport {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="write a synthetic price or returns panel CSV")
    synth.add_argument("--out", required=True, help="output CSV path")
    synth.add_argument("-T", "--horizon", type=int, default=120, help="number of samples")
    synth.add_argument("--seed", type=int, default=0, help="RNG seed (single source of randomness)")
    synth.add_argument(
        "--example1",
        action="store_true",
        help="canned identifiability scenario: two harmonics in strong cyclostationary noise",
    )
    synth.add_argument("--periods", default="12,6", help="comma list of grid periods (or A/S/Q)")
    synth.add_argument("--n-assets", type=int, default=5)
    synth.add_argument("--mean-amp", type=float, default=0.015, help="seasonal mean amplitude")
    synth.add_argument("--noise-vol", type=float, default=0.02, help="per-period noise volatility")
    synth.add_argument(
        "--format",
        choices=["prices", "returns"],
        default=None,
        help="output kind (default: returns for --example1, prices otherwise)",
    )
    synth.add_argument("--start-date", default="2010-01", help="first month for price output")
    synth.set_defaults(func=_cmd_synth)

    estimate = sub.add_parser("estimate", help="estimate spectral moments from a panel CSV")
    estimate.add_argument("--data", required=True, help="input CSV")
    estimate.add_argument("--periods", default="12,6,3", help="comma list of grid periods (or A/S/Q)")
    estimate.add_argument("--mode", choices=["paper-literal", "consistent"], default="paper-literal")
    estimate.add_argument("--demean", action="store_true", help="subtract the grand mean first")
    estimate.add_argument("--input-type", choices=["prices", "returns"], default="prices")
    estimate.add_argument("--periods-per-year", type=int, default=12)
    estimate.add_argument("--out-dir", default="estimate_out")
    estimate.set_defaults(func=_cmd_estimate)

    backtest = sub.add_parser(
        "backtest",
        help="run the in/out-of-sample protocol",
        epilog=(
            "Allocation paths are retrieved through the full augmented "
            "(conjugate-paired) basis so weights are real-valued; the time "
            "origin is the first in-sample return and the index runs unbroken "
            "into the out-of-sample window, keeping seasonal phase aligned."
        ),
    )
    backtest.add_argument("--data", required=True, help="input CSV")
    backtest.add_argument("--boundary", required=True, help="in/out split timestamp (e.g. 2015-01)")
    backtest.add_argument(
        "--grids",
        default="A;A,S;A,S,Q",
        help="semicolon list of grid subsets, each a comma list of periods or A/S/Q letters",
    )
    backtest.add_argument("--sigma0-annual", type=float, default=0.01, help="annual vol target")
    backtest.add_argument("--ridge", type=float, default=None)
    backtest.add_argument("--mode", choices=["paper-literal", "consistent"], default="paper-literal")
    backtest.add_argument("--demean", action="store_true")
    backtest.add_argument("--periods-per-year", type=int, default=12)
    backtest.add_argument("--input-type", choices=["prices", "returns"], default="prices")
    backtest.add_argument("--out-dir", default="backtest_out")
    backtest.set_defaults(func=_cmd_backtest)

    return parser


_INPUT_ERRORS = (ValidationError, IngestionError, FileNotFoundError)
_COMPUTE_ERRORS = (FactorizationError, DegenerateMeanError, SingularCovarianceError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _COMPUTE_ERRORS as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 1
    except SpecportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
