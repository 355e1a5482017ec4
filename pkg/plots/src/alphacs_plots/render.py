"""Render mean-curve figures from benchmark and localization results CSVs.

Input is the documented results schema: a header row naming at least the
grouping column (solver), an x-axis column (m, k, or snr_db), and one column
per metric. Means are computed per (solver, x) group with the same semantics
as the benchmark aggregator: rows with a failed status are excluded from rse
and iteration means but stay in the exact-rate denominator.

Alongside each figure a small CSV of the plotted means is written, so the
numbers behind every curve can be checked without parsing the image.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import numpy as np

VALID_METRICS = ("rse", "exact", "iterations", "loc_error_m")
# metrics averaged only over rows whose status is ok (when a status column exists)
OK_ONLY_METRICS = {"rse", "iterations", "loc_error_m"}

X_LABELS = {
    "m": "measurements m",
    "k": "sparsity k",
    "snr_db": "SNR (dB)",
}
METRIC_LABELS = {
    "rse": "mean RSE",
    "exact": "exact recovery rate",
    "iterations": "mean iterations",
    "loc_error_m": "mean localization error (m)",
}

# fixed hash salt keeps SVG element ids, and therefore bytes, reproducible
plt.rcParams["svg.hashsalt"] = "alphacs-plots"


@dataclass(frozen=True)
class FigureSpec:
    """What to plot: input CSV, x column, metric panels, grouping, output path."""

    input_path: str
    x: str = "m"
    metrics: tuple[str, ...] = ("rse", "exact", "iterations")
    group: str = "solver"
    out: str = "figure.svg"
    image_format: str = "svg"

    def __post_init__(self):
        object.__setattr__(self, "metrics", tuple(self.metrics))
        unknown = [m for m in self.metrics if m not in VALID_METRICS]
        if unknown:
            raise ValueError(
                f"unknown metric(s) {unknown}; valid metrics: {', '.join(VALID_METRICS)}"
            )
        if not self.metrics:
            raise ValueError("at least one metric is required")
        if self.image_format not in ("svg", "png"):
            raise ValueError(f"unknown image format {self.image_format!r} (use svg or png)")


@dataclass
class RenderResult:
    """Plotted series and output file locations."""

    image_path: Path
    data_path: Path
    panels: int
    # metric -> group label -> (x values, means), all sorted by x
    series: dict = field(default_factory=dict)


def read_table(path):
    """Parse a headered CSV into a dict of columns (floats where possible)."""
    lines = Path(path).read_text().splitlines()
    rows = [line.split(",") for line in lines if line.strip()]
    if len(rows) < 2:
        raise ValueError(f"{path}: expected a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, found {len(row)}")
    columns: dict[str, list] = {h: [] for h in header}
    for row in rows[1:]:
        for h, cell in zip(header, row):
            columns[h].append(cell.strip())
    for h, cells in columns.items():
        try:
            columns[h] = [float(c) for c in cells]
        except ValueError:
            pass  # non-numeric column (e.g. solver, status)
    return columns


def _require(columns, name, path):
    if name not in columns:
        raise ValueError(
            f"{path}: missing column {name!r}; available: {', '.join(sorted(columns))}"
        )
    return columns[name]


def group_means(columns, x: str, metric: str, group: str, path="input"):
    """Mean of `metric` per (group, x), sorted by x.

    Returns {group label: (x array, mean array)}; groups with no usable rows
    are dropped with a warning on stderr.
    """
    xs = _require(columns, x, path)
    ys = _require(columns, metric, path)
    labels = _require(columns, group, path)
    status = columns.get("status")
    n = len(xs)
    ok = [True] * n
    if status is not None and metric in OK_ONLY_METRICS:
        ok = [s == "ok" for s in status]
    buckets: dict[tuple, list] = {}
    for i in range(n):
        if not ok[i]:
            continue
        buckets.setdefault((str(labels[i]), float(xs[i])), []).append(float(ys[i]))
    out: dict[str, tuple] = {}
    for label in sorted({str(l) for l in labels}):
        pts = sorted(
            (x_val, float(np.mean(vals)))
            for (lab, x_val), vals in buckets.items()
            if lab == label
        )
        if not pts:
            print(f"warning: group {label!r} has no usable rows for {metric!r}; skipped",
                  file=sys.stderr)
            continue
        arr = np.array(pts)
        out[label] = (arr[:, 0], arr[:, 1])
    return out


def render(spec: FigureSpec) -> RenderResult:
    """Draw one panel per metric (mean vs x, one line per group) and save it.

    Writes the image plus a `<stem>_data.csv` listing every plotted mean.
    Output is deterministic for a given input file.
    """
    columns = read_table(spec.input_path)
    series = {
        metric: group_means(columns, spec.x, metric, spec.group, spec.input_path)
        for metric in spec.metrics
    }
    n_panels = len(spec.metrics)
    fig, axes = plt.subplots(1, n_panels, figsize=(4.0 * n_panels, 3.2), squeeze=False)
    for ax, metric in zip(axes[0], spec.metrics):
        for label, (xs, means) in series[metric].items():
            ax.plot(xs, means, marker="o", markersize=3, label=label)
        ax.set_xlabel(X_LABELS.get(spec.x, spec.x))
        ax.set_ylabel(METRIC_LABELS[metric])
        ax.grid(True, alpha=0.3)
        if series[metric]:
            ax.legend()
    fig.tight_layout()
    image_path = Path(spec.out)
    if image_path.suffix.lstrip(".") != spec.image_format:
        image_path = image_path.with_suffix("." + spec.image_format)
    image_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(image_path, format=spec.image_format, metadata={"Date": None})
    plt.close(fig)

    data_path = image_path.with_name(image_path.stem + "_data.csv")
    with open(data_path, "w") as fh:
        fh.write(f"{spec.group},{spec.x},metric,mean\n")
        for metric in spec.metrics:
            for label, (xs, means) in series[metric].items():
                for x_val, mean in zip(xs, means):
                    fh.write(f"{label},{x_val:.17g},{metric},{mean:.17g}\n")
    return RenderResult(
        image_path=image_path, data_path=data_path, panels=n_panels, series=series
    )
