"""Shared CSV parsing, schema validation, and deterministic figure saving.

These scripts consume the documented CSV artifacts only; they never import
the library that produced them.  Any drift from the expected column layout
fails loudly.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

BENCH_COLUMNS = ["method", "n", "d", "ell", "error", "rel_error", "sigma", "jitter", "seed"]
POSTERIOR_COLUMNS = ["x", "mean", "stddev"]

# stable series colors, assigned to sorted series keys
PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


class SchemaMismatch(Exception):
    """The CSV does not carry the expected column layout."""


class MissingTruthColumn(Exception):
    """An error plot needs populated error columns (no truth was available)."""


def read_csv(path: str, expected: list[str], optional: list[str] | None = None):
    """Read a CSV artifact; returns a list of row dicts.

    Leading '#' comment lines are skipped.  The header must equal ``expected``
    (plus, optionally, a suffix of ``optional`` columns) or
    :class:`SchemaMismatch` is raised.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line for line in fh if not line.startswith("#")]
    except OSError as exc:
        raise SchemaMismatch(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(lines))
    if not rows:
        raise SchemaMismatch(f"{path}: empty file, expected header {','.join(expected)}")
    header = rows[0]
    if header != expected and not (optional and header == expected + optional):
        raise SchemaMismatch(
            f"{path}: header {','.join(header)!r} does not match the "
            f"expected schema {','.join(expected)!r}"
        )
    out = []
    for raw in rows[1:]:
        if len(raw) != len(header):
            raise SchemaMismatch(f"{path}: row with {len(raw)} cells, header has {len(header)}")
        out.append(dict(zip(header, raw)))
    return out


def fnum(cell: str):
    """Parse a numeric cell; empty cells become None."""
    return None if cell == "" else float(cell)


def error_rows(rows):
    """Rows carrying a populated relative error; raises if the truth was absent."""
    kept = [r for r in rows if r["rel_error"] != ""]
    if not kept:
        raise MissingTruthColumn("no populated rel_error cells; the run had no reference value")
    return kept


def save_figure(fig, out: str) -> None:
    """Write the figure with a fixed size/dpi and no identifying metadata."""
    kwargs = {"dpi": 150, "bbox_inches": "tight"}
    if out.endswith(".png"):
        kwargs["metadata"] = {"Software": None}
    elif out.endswith(".svg"):
        kwargs["metadata"] = {"Date": None, "Creator": None}
    fig.savefig(out, **kwargs)
    plt.close(fig)


def series_color(keys):
    """Deterministic color per sorted series key."""
    return {key: PALETTE[i % len(PALETTE)] for i, key in enumerate(sorted(keys))}
