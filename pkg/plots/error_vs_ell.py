#!/usr/bin/env python3
"""Relative integration error against the kernel length-scale, one series per method.

Log-log axes.  Usage:

    python error_vs_ell.py sweep.csv --out errors.png
"""

import argparse
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

from common import (
    BENCH_COLUMNS,
    MissingTruthColumn,
    SchemaMismatch,
    error_rows,
    fnum,
    read_csv,
    save_figure,
    series_color,
)


def render(csv_path: str, out: str) -> None:
    rows = error_rows(read_csv(csv_path, BENCH_COLUMNS))
    series = defaultdict(list)
    for r in rows:
        if r["ell"] == "":
            continue  # length-scale-free baselines have no place on this axis
        series[r["method"]].append((fnum(r["ell"]), fnum(r["rel_error"])))
    if not series:
        raise MissingTruthColumn("no rows with a populated ell column")
    colors = series_color(series)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for method in sorted(series):
        pts = sorted(series[method])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, lw=1.2,
                color=colors[method], label=method)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("length-scale")
    ax.set_ylabel("relative error")
    ax.legend(loc="best")
    save_figure(fig, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="length-scale sweep CSV")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    render(args.csv, args.out)
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except (SchemaMismatch, MissingTruthColumn) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)
