"""Render sweep CSV files (alpha vs the three entanglement measures) to images.

The input schema is the sweep CSV emitted by the anyonent command line:
header ``alpha,E_ACE,E_CE,E_total,method,gap``, one data row per grid point.
Rendering is a pure function of the CSV content.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

EXPECTED_HEADER = ["alpha", "E_ACE", "E_CE", "E_total", "method", "gap"]
CURVE_COLUMNS = ("E_ACE", "E_CE", "E_total")
LN2 = math.log(2.0)


class SchemaError(Exception):
    """Input does not follow the sweep CSV schema."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    image_path: str
    title: str = "Entanglement of the anyonic isotropic family"
    bits: bool = False

    @property
    def unit(self) -> str:
        return "bits" if self.bits else "nats"


@dataclass(frozen=True)
class SweepData:
    alpha: list[float]
    curves: dict[str, list[float]]


def load_sweep(path: str) -> SweepData:
    """Parse and validate a sweep CSV; raises SchemaError on any mismatch."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows or rows[0] != EXPECTED_HEADER:
        raise SchemaError(f"expected header {','.join(EXPECTED_HEADER)}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise SchemaError("no data rows")
    alpha: list[float] = []
    curves: dict[str, list[float]] = {name: [] for name in CURVE_COLUMNS}
    for i, row in enumerate(body, start=2):
        if len(row) != len(EXPECTED_HEADER):
            raise SchemaError(f"row {i}: expected {len(EXPECTED_HEADER)} fields, got {len(row)}")
        try:
            alpha.append(float(row[0]))
            for j, name in enumerate(CURVE_COLUMNS, start=1):
                curves[name].append(float(row[j]))
        except ValueError as exc:
            raise SchemaError(f"row {i}: non-numeric value ({exc})") from exc
    return SweepData(alpha, curves)


CURVE_STYLES = {
    "E_ACE": dict(color="tab:blue", linestyle="-"),
    "E_CE": dict(color="tab:orange", linestyle="--"),
    "E_total": dict(color="tab:green", linestyle="-."),
}


def render(spec: PlotSpec):
    """Write the three-curve figure for ``spec``; returns the matplotlib figure.

    The curves carry the CSV values exactly (converted to bits when asked), so
    callers can inspect the figure's line data against the file.
    """
    data = load_sweep(spec.csv_path)
    scale = 1.0 / LN2 if spec.bits else 1.0
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name in CURVE_COLUMNS:
        values = [v * scale for v in data.curves[name]]
        ax.plot(data.alpha, values, label=name.replace("_", " "), **CURVE_STYLES[name])
    ax.set_xlabel(r"mixing parameter $\alpha$")
    ax.set_ylabel(f"entanglement ({spec.unit})")
    ax.set_title(spec.title)
    ax.legend(frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.image_path)
    plt.close(fig)
    return fig
