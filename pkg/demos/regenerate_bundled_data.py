"""Regenerate data/synthetic_monthly_prices.csv, the bundled demo market.

Five synthetic assets with annual + semiannual seasonal expected returns and
white noise, monthly from 2010-01 through 2020-05 (125 price rows), prices
normalized to 100 at the start.  Deterministic: fixed seed.
"""

import csv
from pathlib import Path

import numpy as np

from specport import seasonal_market_spec, synthesize_values

SEED = 20100101
HORIZON = 124  # returns; prices add the initial row

ROOT = Path(__file__).resolve().parent.parent


def month_sequence(start_year: int, start_month: int, count: int):
    year, month = start_year, start_month
    for _ in range(count):
        yield f"{year:04d}-{month:02d}-01"
        month += 1
        if month > 12:
            month, year = 1, year + 1


def main() -> None:
    spec = seasonal_market_spec(n_assets=5, periods=(12, 6), seed=SEED, horizon=HORIZON)
    returns = synthesize_values(spec)
    prices = 100.0 * np.vstack([np.ones((1, 5)), np.cumprod(1.0 + returns, axis=0)])
    out = ROOT / "data" / "synthetic_monthly_prices.csv"
    out.parent.mkdir(exist_ok=True)
    with out.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "SYN1", "SYN2", "SYN3", "SYN4", "SYN5"])
        for date, row in zip(month_sequence(2010, 1, prices.shape[0]), prices):
            writer.writerow([date] + [f"{v:.10f}" for v in row])
    print(f"wrote {out} ({prices.shape[0]} rows)")


if __name__ == "__main__":
    main()
