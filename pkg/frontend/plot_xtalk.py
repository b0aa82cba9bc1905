#!/usr/bin/env python3
"""Render sweep CSV output from the crosstalk harness into figures.

Three figure kinds, one per experiment schema:

  leakage    -- leakage populations vs detuning (log y), two curves
  infidelity -- ideal / crosstalk / mitigation infidelities vs detuning
                (log y), shaded straddling and beyond-straddling bands
  coupling   -- exchange strength J and conditional shift zeta vs coupler
                frequency

Usage:
    plot_xtalk.py --kind infidelity --csv runs/fig3b/mitigation_sweep.csv \
                  --out fig3b.png [--boundary-ghz 0.3]

The CSV files carry their column schema in a leading '#' comment line; a file
missing a required column is rejected with an error naming it.  Rendering is
a pure function of the CSV bytes and the options.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

KINDS = ("leakage", "infidelity", "coupling")


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSV, figure kind, straddling boundary, output path."""

    csv_path: str
    kind: str
    out_path: str
    boundary_ghz: float = 0.3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got '{self.kind}'")

REQUIRED_COLUMNS = {
    "leakage": ("delta_ghz", "leak_q0_200", "leak_q1_002"),
    "infidelity": ("delta_ghz", "infidelity_ideal", "infidelity_crosstalk",
                   "infidelity_mitigated"),
    "coupling": ("omega_c_ghz", "j_ghz", "zeta_ghz"),
}


class SchemaError(ValueError):
    """CSV does not match the documented schema; message names the column."""


def read_csv(path: str) -> dict[str, list[float]]:
    """Parse a harness CSV: '#'-prefixed header line, comma-separated rows."""
    header: list[str] | None = None
    columns: dict[str, list[float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header is None:
                    header = [c.strip() for c in line.lstrip("#").split(",")]
                    columns = {name: [] for name in header}
                continue
            if header is None:
                raise SchemaError("missing '#' header line with column names")
            parts = line.split(",")
            for name, raw in zip(header, parts):
                try:
                    value = float(raw) if raw != "" else math.nan
                except ValueError:
                    value = math.nan  # flag strings etc.
                columns[name].append(value)
    if header is None:
        raise SchemaError("missing '#' header line with column names")
    if not any(len(v) for v in columns.values()):
        raise SchemaError("CSV contains a header but no data rows")
    return columns


def check_schema(columns: dict, kind: str):
    for name in REQUIRED_COLUMNS[kind]:
        if name not in columns:
            raise SchemaError(f"column '{name}' required for kind '{kind}' is missing")


def _finite(xs, ys):
    pairs = [(x, y) for x, y in zip(xs, ys) if not (math.isnan(x) or math.isnan(y))]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def _shade_bands(ax, xs, boundary: float):
    lo, hi = min(xs), max(xs)
    if lo < boundary:
        ax.axvspan(lo, min(boundary, hi), color="red", alpha=0.12,
                   label="straddling ($\\Delta < |\\eta|$)")
    if hi > boundary:
        ax.axvspan(max(boundary, lo), hi, color="gold", alpha=0.18,
                   label="beyond straddling ($\\Delta > |\\eta|$)")


def render_spec(spec: FigureSpec) -> str:
    return render(spec.kind, spec.csv_path, spec.out_path, spec.boundary_ghz)


def render(kind: str, csv_path: str, out_path: str, boundary_ghz: float = 0.3):
    """Draw one figure from a sweep CSV and write a raster image."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    columns = read_csv(csv_path)
    check_schema(columns, kind)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if kind == "leakage":
        x = columns["delta_ghz"]
        for col, label, style in (("leak_q1_002", "Q1 $\\to |002\\rangle$", "o-"),
                                  ("leak_q0_200", "Q0 $\\to |200\\rangle$", "s-")):
            xs, ys = _finite(x, columns[col])
            ax.semilogy(xs, ys, style, ms=3.5, label=label)
        _shade_bands(ax, x, boundary_ghz)
        ax.set_xlabel("$\\Delta/2\\pi$ (GHz)")
        ax.set_ylabel("leakage population")
    elif kind == "infidelity":
        x = columns["delta_ghz"]
        for col, label, style in (("infidelity_ideal", "Ideal", "o-"),
                                  ("infidelity_crosstalk", "Crosstalk", "s-"),
                                  ("infidelity_mitigated", "Mitigation", "^-")):
            xs, ys = _finite(x, columns[col])
            ax.semilogy(xs, ys, style, ms=3.5, label=label)
        _shade_bands(ax, x, boundary_ghz)
        ax.set_xlabel("$\\Delta/2\\pi$ (GHz)")
        ax.set_ylabel("infidelity $1 - F$")
    else:
        x = columns["omega_c_ghz"]
        for col, label, style in (("j_ghz", "$J/2\\pi$", "-"),
                                  ("zeta_ghz", "$\\zeta/2\\pi$", "--")):
            xs, ys = _finite(x, columns[col])
            ax.plot(xs, [v * 1e3 for v in ys], style, label=label)
        ax.axhline(0.0, color="gray", lw=0.8)
        ax.set_xlabel("$\\omega_c/2\\pi$ (GHz)")
        ax.set_ylabel("coupling strength (MHz)")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--csv", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--boundary-ghz", type=float, default=0.3,
                        help="straddling edge |eta|/2pi (default 0.3)")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.csv, args.out, args.boundary_ghz)
    except (SchemaError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
