"""Render sweep metrics to matplotlib figures next to the CSV output."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_MODE_STYLE = {
    "wl": dict(color="tab:blue", marker="o", label="WL deployment"),
    "sl": dict(color="tab:red", marker="s", label="SL deployment"),
}


def read_metrics_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader)


def _series(rows, column):
    out = {}
    for row in rows:
        out.setdefault(row["mode"], []).append(
            (float(row["attack_rate_pps"]), float(row[column]))
        )
    for pts in out.values():
        pts.sort()
    return out


def _line_figure(rows, column, ylabel, title, out_path, scale=1.0):
    fig, ax = plt.subplots(figsize=(6, 4))
    for mode, pts in _series(rows, column).items():
        style = _MODE_STYLE.get(mode, dict(marker="x", label=mode))
        ax.plot([x for x, _ in pts], [y * scale for _, y in pts], **style)
    ax.set_xlabel("attack rate per attacker (pkt/s)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def render_sweep_figures(metrics_csv, out_dir=None):
    """Throughput / utilization / time-to-inference vs. attack rate."""
    metrics_csv = Path(metrics_csv)
    out_dir = Path(out_dir) if out_dir else metrics_csv.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = read_metrics_csv(metrics_csv)
    if not rows:
        raise ValueError(f"no data rows in {metrics_csv}")
    written = [
        _line_figure(rows, "throughput_bps", "benign goodput (Mbit/s)",
                     "Average network throughput", out_dir / "throughput.png",
                     scale=1e-6),
        _line_figure(rows, "hosting_mean_util", "mean CPU utilization (%)",
                     "Hosting switch utilization", out_dir / "cpu_utilization.png",
                     scale=100.0),
        _line_figure(rows, "tti_mean_ms", "time to inference (ms)",
                     "Mean time to inference", out_dir / "time_to_inference.png"),
    ]
    return written
