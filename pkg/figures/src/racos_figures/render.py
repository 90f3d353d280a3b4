"""Render experiment CSV outputs into static figures.

Three kinds are supported, matching the two CSV schemas the detection
harness emits:

  curves  — success-rate lines from a sweep CSV, one line per `param` label;
            with --rescaled the x-axis uses the rescaled_value column and a
            vertical reference line marks ratio 1.
  heatmap — success-rate matrix from a phase CSV.
  contour — speedup contours from a phase CSV, with labeled level lines.

Rendering is a pure file-to-file transformation: fixed style, no timestamps,
so identical CSV input yields byte-identical images.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SWEEP_COLUMNS = [
    "param",
    "value",
    "rescaled_value",
    "trials",
    "successes",
    "success_rate",
    "mean_runtime_ms",
]
PHASE_COLUMNS = ["param1", "param2", "success_rate", "mean_runtime_ms", "speedup"]

KINDS = ("curves", "heatmap", "contour")

# fixed style so output bytes depend only on the input CSV
STYLE = {
    "figure.figsize": (6.0, 4.2),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.6,
    "lines.markersize": 5.0,
}


class SchemaError(ValueError):
    """CSV header or rows do not match the expected schema."""


@dataclass(frozen=True)
class FigureSpec:
    csv_path: Path
    kind: str  # curves | heatmap | contour
    out_path: Path
    rescaled: bool = False


def _read_rows(path: Path, expected: list[str]) -> list[dict]:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {','.join(expected)}") from None
        if [h.strip() for h in header] != expected:
            missing = [c for c in expected if c not in header]
            extra = [c for c in header if c not in expected]
            raise SchemaError(
                f"{path}: header mismatch; missing columns {missing or 'none'}, "
                f"unexpected columns {extra or 'none'}"
            )
        rows = []
        for i, rec in enumerate(reader):
            if not rec or rec == [""]:
                continue
            if len(rec) != len(expected):
                raise SchemaError(
                    f"{path}: row {i} has {len(rec)} fields, expected {len(expected)}"
                )
            rows.append(dict(zip(expected, rec)))
    return rows


def read_sweep(path: Path) -> list[dict]:
    rows = _read_rows(path, SWEEP_COLUMNS)
    out = []
    for i, row in enumerate(rows):
        try:
            out.append(
                {
                    "param": row["param"],
                    "value": float(row["value"]),
                    "rescaled_value": float(row["rescaled_value"])
                    if row["rescaled_value"]
                    else None,
                    "success_rate": float(row["success_rate"]),
                }
            )
        except ValueError as exc:
            raise SchemaError(f"{path}: row {i}: {exc}") from None
    return out


def read_phase(path: Path) -> list[dict]:
    rows = _read_rows(path, PHASE_COLUMNS)
    out = []
    for i, row in enumerate(rows):
        try:
            out.append({key: float(row[key]) for key in PHASE_COLUMNS})
        except ValueError as exc:
            raise SchemaError(f"{path}: row {i}: {exc}") from None
    return out


def _phase_grid(rows: list[dict], field: str):
    v1 = sorted({row["param1"] for row in rows})
    v2 = sorted({row["param2"] for row in rows})
    grid = np.full((len(v1), len(v2)), np.nan)
    index1 = {v: i for i, v in enumerate(v1)}
    index2 = {v: j for j, v in enumerate(v2)}
    for row in rows:
        grid[index1[row["param1"]], index2[row["param2"]]] = row[field]
    return np.array(v1), np.array(v2), grid


def _curves_figure(rows: list[dict], rescaled: bool):
    fig, ax = plt.subplots()
    x_field = "rescaled_value" if rescaled else "value"
    labels = list(dict.fromkeys(row["param"] for row in rows))
    for label in labels:
        pts = [r for r in rows if r["param"] == label]
        xs = [p[x_field] for p in pts]
        if rescaled and any(x is None for x in xs):
            raise SchemaError(
                f"series {label!r} has empty rescaled_value entries; "
                "cannot plot in rescaled mode"
            )
        order = np.argsort(xs)
        xs = np.asarray(xs, dtype=float)[order]
        ys = np.asarray([p["success_rate"] for p in pts])[order]
        ax.plot(xs, ys, marker="o", label=label)
    if rescaled:
        ax.axvline(1.0, color="0.3", linestyle="--", linewidth=1.0, label="ratio 1")
        ax.set_xlabel("rescaled parameter (ratio to threshold)")
    else:
        ax.set_xlabel("parameter value")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.05, 1.05)
    if labels:
        ax.legend(loc="best")
    return fig


def _heatmap_figure(rows: list[dict]):
    fig, ax = plt.subplots()
    if not rows:
        ax.set_xlabel("param2")
        ax.set_ylabel("param1")
        return fig
    v1, v2, grid = _phase_grid(rows, "success_rate")
    im = ax.imshow(
        grid,
        origin="lower",
        aspect="auto",
        vmin=0.0,
        vmax=1.0,
        cmap="viridis",
        extent=(v2.min(), v2.max(), v1.min(), v1.max()) if len(v1) > 1 and len(v2) > 1 else None,
    )
    fig.colorbar(im, ax=ax, label="success rate")
    ax.set_xlabel("param2")
    ax.set_ylabel("param1")
    return fig


def _contour_figure(rows: list[dict]):
    fig, ax = plt.subplots()
    if not rows:
        ax.set_xlabel("param2")
        ax.set_ylabel("param1")
        return fig
    v1, v2, grid = _phase_grid(rows, "speedup")
    if len(v1) < 2 or len(v2) < 2:
        # degenerate grid: fall back to a labeled image
        im = ax.imshow(grid, origin="lower", aspect="auto", cmap="plasma")
        fig.colorbar(im, ax=ax, label="speedup")
    else:
        xx, yy = np.meshgrid(v2, v1)
        cs = ax.contour(xx, yy, grid, colors="k", linewidths=1.0)
        ax.clabel(cs, inline=True, fontsize=8, fmt="%.1f")
        filled = ax.contourf(xx, yy, grid, cmap="plasma", alpha=0.75)
        fig.colorbar(filled, ax=ax, label="speedup")
    ax.set_xlabel("param2")
    ax.set_ylabel("param1")
    return fig


def build_figure(spec: FigureSpec):
    """Figure object for the spec; exposed separately for tests."""
    if spec.kind == "curves":
        return _curves_figure(read_sweep(spec.csv_path), spec.rescaled)
    if spec.kind == "heatmap":
        return _heatmap_figure(read_phase(spec.csv_path))
    if spec.kind == "contour":
        return _contour_figure(read_phase(spec.csv_path))
    raise SchemaError(f"unknown figure kind {spec.kind!r}; expected one of {KINDS}")


def render(spec: FigureSpec) -> None:
    """Write the figure to spec.out_path; deterministic for identical CSV input."""
    with plt.rc_context(STYLE):
        fig = build_figure(spec)
        try:
            fig.savefig(spec.out_path, format="png", metadata={"Software": None})
        finally:
            plt.close(fig)


def entrypoint() -> None:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render a sweep or phase CSV into a static PNG figure.",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csv", type=Path)
    parser.add_argument("out", type=Path)
    parser.add_argument("--rescaled", action="store_true", help="use the rescaled x-axis")
    args = parser.parse_args()
    spec = FigureSpec(csv_path=args.csv, kind=args.kind, out_path=args.out, rescaled=args.rescaled)
    try:
        render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)
    sys.exit(0)


if __name__ == "__main__":
    entrypoint()
