#!/usr/bin/env python3
"""Relative integration error against the node count, log-log, one series per method.

Series are keyed by (method, length-scale); multiple seeds of the same series
are drawn as individual thin lines sharing a color, so nothing is aggregated
here.  Usage:

    python error_vs_n.py run.csv --out errors.png
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


def _series_label(method: str, ell: str) -> str:
    return method if ell == "" else f"{method} (ell={ell})"


def render(csv_path: str, out: str) -> None:
    rows = error_rows(read_csv(csv_path, BENCH_COLUMNS))
    series = defaultdict(lambda: defaultdict(list))
    for r in rows:
        key = _series_label(r["method"], r["ell"])
        series[key][r["seed"]].append((int(r["n"]), fnum(r["rel_error"])))
    colors = series_color(series)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for key in sorted(series):
        first = True
        for seed in sorted(series[key]):
            pts = sorted(series[key][seed])
            ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                "o-",
                ms=3,
                lw=1.0,
                alpha=0.9 if first else 0.45,
                color=colors[key],
                label=key if first else None,
            )
            first = False
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("number of nodes")
    ax.set_ylabel("relative error")
    ax.legend(loc="best")
    save_figure(fig, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="convergence-run CSV")
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
