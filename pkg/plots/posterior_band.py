#!/usr/bin/env python3
"""Posterior mean with a 95% credible band from a (x, mean, stddev[, dof]) CSV.

The band is mean +- 1.96 * stddev, or the Student-t 97.5% quantile times the
stddev when a dof column is present.  Usage:

    python posterior_band.py posterior.csv --out band.png
"""

import argparse
import sys

import matplotlib.pyplot as plt

from common import POSTERIOR_COLUMNS, SchemaMismatch, fnum, read_csv, save_figure

GAUSSIAN_Q = 1.959963984540054  # two-sided 95%


def render(csv_path: str, out: str) -> None:
    rows = read_csv(csv_path, POSTERIOR_COLUMNS, optional=["dof"])
    if not rows:
        raise SchemaMismatch(f"{csv_path}: no data rows")
    xs = [fnum(r["x"]) for r in rows]
    means = [fnum(r["mean"]) for r in rows]
    stds = [fnum(r["stddev"]) for r in rows]
    if "dof" in rows[0]:
        from scipy.stats import t

        q = float(t.ppf(0.975, df=fnum(rows[0]["dof"])))
    else:
        q = GAUSSIAN_Q
    lo = [m - q * s for m, s in zip(means, stds)]
    hi = [m + q * s for m, s in zip(means, stds)]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.fill_between(xs, lo, hi, color="0.8", label="95% credible band")
    ax.plot(xs, means, color="#1f77b4", lw=1.5, label="posterior mean")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    ax.legend(loc="best")
    save_figure(fig, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="posterior profile CSV")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    render(args.csv, args.out)
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)
