"""Render time-series panels from simulation CSV files.

Each --csv argument becomes one panel (typically a 1-day and a 7-day run
side by side).  The plotted values are taken verbatim from the CSV; the
only derived numbers are the optional horizontal guides (the admissible
band of the observable), computed from the run manifest written next to
each CSV.

Exit codes: 0 success, 1 missing/unknown column, 2 bad arguments or
unreadable input.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DAY = 2.0 * np.pi  # time units per day (Omega3 = 1 rad per unit)

AXIS_LABELS = {
    "c": "polar semi-axis c [length]",
    "c_minus_c0": "c - c0 [length]",
    "H": "dynamical flattening H",
    "J2": "second zonal harmonic J2",
    "J2_minus_J20": "J2 - J2(0)",
    "f_geo": "geometric flattening f",
}


class FigureError(Exception):
    """Input problem that should abort with a message, not a traceback."""


@dataclass
class FigureSpec:
    """One multi-panel figure: n CSVs -> n side-by-side panels."""
    csv_paths: tuple
    column: str
    out_path: Path
    labels: tuple = ()
    title: str = ""
    guides: tuple = ()
    band: bool = False  # shade mean +- 2 SE when an se_<name> column exists


def load_table(path) -> dict:
    """CSV -> {column: ndarray}; header row required, at least one data row."""
    path = Path(path)
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            if not header:
                raise FigureError(f"{path}: empty CSV")
            names = header.split(",")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise FigureError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise FigureError(f"{path}: malformed CSV: {exc}") from exc
    if data.size == 0:
        raise FigureError(f"{path}: no data rows")
    if data.shape[1] != len(names):
        raise FigureError(f"{path}: {len(names)} header fields but "
                          f"{data.shape[1]} columns")
    return {name: data[:, i] for i, name in enumerate(names)}


def load_manifest(csv_path) -> dict:
    """The run_manifest.json sitting next to a CSV, or {} if absent."""
    mpath = Path(csv_path).parent / "run_manifest.json"
    if not mpath.exists():
        return {}
    with open(mpath) as fh:
        return json.load(fh)


def guides_for_column(column: str, manifest: dict) -> tuple:
    """Band edges of an observable, from the manifest's ellipsoid block.

    For c - c0 the band is (d_min, d_max) directly.  For J2 - J2(0) the
    closed form J2(c) = -1/5 + (4 pi / 15 V) c^3 maps the c band to the
    J2 band (the one place this package evaluates a formula; values only,
    never curves).
    """
    ell = manifest.get("config", {}).get("ellipsoid")
    if not ell:
        return ()
    c0 = float(ell["c0"])
    d_min, d_max = float(ell["d_min"]), float(ell["d_max"])
    if column in ("c_minus_c0", "mean_c_minus_c0"):
        return (d_min, d_max)
    if column == "c" or column == "mean_c":
        return (c0 + d_min, c0 + d_max)
    if column in ("J2_minus_J20", "J2", "mean_J2"):
        a0 = float(ell.get("a0", 1.0))
        volume = (4.0 / 3.0) * np.pi * a0 * a0 * c0

        def j2(c):
            return -0.2 + 4.0 * np.pi / (15.0 * volume) * c ** 3

        lo, hi = j2(c0 + d_min), j2(c0 + d_max)
        if column == "J2_minus_J20":
            lo, hi = lo - j2(c0), hi - j2(c0)
        return tuple(sorted((lo, hi)))
    return ()


def plot_series(spec: FigureSpec) -> Path:
    """Render the figure described by `spec` and return the image path."""
    if not spec.csv_paths:
        raise FigureError("no input CSV given")
    tables = [load_table(p) for p in spec.csv_paths]
    for path, table in zip(spec.csv_paths, tables):
        if "t" not in table:
            raise FigureError(f"{path}: missing column 't'")
        if spec.column not in table:
            raise FigureError(f"{path}: missing column {spec.column!r} "
                              f"(have: {', '.join(table)})")

    n = len(tables)
    fig, axes = plt.subplots(1, n, figsize=(5.5 * n, 4.0), squeeze=False)
    for ax, path, table in zip(axes[0], spec.csv_paths, tables):
        t_days = table["t"] / DAY
        ax.plot(t_days, table[spec.column], lw=0.8, color="tab:blue")
        se_col = spec.column.replace("mean_", "se_", 1)
        if spec.band and se_col != spec.column and se_col in table:
            mean, se = table[spec.column], table[se_col]
            ax.fill_between(t_days, mean - 2.0 * se, mean + 2.0 * se,
                            alpha=0.3, color="tab:blue",
                            label="mean +- 2 SE")
            ax.legend(loc="best", fontsize=8)
        for y in spec.guides:
            ax.axhline(y, color="tab:red", ls="--", lw=0.8)
        ax.set_xlabel("time [days]")
        ax.set_ylabel(AXIS_LABELS.get(spec.column, spec.column))
        ax.grid(True, alpha=0.3)
    for ax, label in zip(axes[0], spec.labels):
        ax.set_title(label, fontsize=10)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)
    return spec.out_path


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-series",
        description="Plot one observable column from simulation CSVs, "
                    "one panel per file.")
    parser.add_argument("--csv", action="append", required=True,
                        help="input CSV (repeat for side-by-side panels)")
    parser.add_argument("--column", required=True,
                        help="observable column to plot (e.g. c_minus_c0)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--label", action="append", default=[],
                        help="panel title (repeat, one per CSV)")
    parser.add_argument("--title", default=None,
                        help="figure title (default: scenario and seed "
                             "from the run manifest)")
    parser.add_argument("--guide", action="append", type=float, default=[],
                        help="horizontal guide value (repeatable); "
                             "default: band edges from the run manifest")
    parser.add_argument("--no-guides", action="store_true",
                        help="suppress the automatic band guides")
    parser.add_argument("--band", action="store_true",
                        help="shade mean +- 2 SE if an se_ column exists")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    manifest = load_manifest(args.csv[0])
    title = args.title
    if title is None and manifest:
        scenario = manifest.get("config", {}).get("ensemble", {}) \
                           .get("scenario", "run")
        title = f"{scenario} (seed {manifest.get('seed', '?')})"
    guides = tuple(args.guide)
    if not guides and not args.no_guides:
        guides = guides_for_column(args.column, manifest)
    spec = FigureSpec(
        csv_paths=tuple(args.csv),
        column=args.column,
        out_path=Path(args.out),
        labels=tuple(args.label),
        title=title or "",
        guides=guides,
        band=args.band,
    )
    try:
        path = plot_series(spec)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if "missing column" in str(exc) else 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
