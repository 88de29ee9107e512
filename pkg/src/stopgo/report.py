"""Figure rendering for the report path.

Renders two files next to the delimited output: the per-class queuing-delay
envelope with observed delays overlaid, and per-(link, class) buffer budgets
against peak occupancy.  Purely optional; all numbers are also in the CSV.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .framing import NS_PER_MS
from .metrics import BoundReport, Metrics, delay_bounds, verify_bounds


def render_delay_figure(metrics: Metrics, destination: Path,
                        report: BoundReport | None = None) -> Path:
    """Analytic min/max queuing delay per class with observed min/mean/max."""
    if report is None:
        report = verify_bounds(metrics)
    classes = metrics.classes
    idx = np.arange(len(classes))
    env_min, env_max, obs_min, obs_mean, obs_max = [], [], [], [], []
    for cls in classes:
        stats = report.per_class.get(cls.class_id)
        hops = stats.max_hops if stats and stats.delivered else 5
        lo, hi = delay_bounds(cls, hops)
        env_min.append(lo / NS_PER_MS)
        env_max.append(hi / NS_PER_MS)
        if stats and stats.delivered:
            obs_min.append(stats.min_total_ns / NS_PER_MS)
            obs_mean.append(stats.mean_total_ns() / NS_PER_MS)
            obs_max.append(stats.max_total_ns / NS_PER_MS)
        else:
            obs_min.append(np.nan)
            obs_mean.append(np.nan)
            obs_max.append(np.nan)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    width = 0.35
    ax.bar(idx - width / 2, env_min, width, label="envelope min (hops*f)", color="#8ecae6")
    ax.bar(idx + width / 2, env_max, width, label="envelope max (2*hops*f)", color="#219ebc")
    ax.plot(idx, obs_max, "kv", label="observed max")
    ax.plot(idx, obs_mean, "k.", label="observed mean")
    ax.plot(idx, obs_min, "k^", label="observed min")
    ax.set_xticks(idx)
    ax.set_xticklabels([f"class {c.class_id}\nf={c.frame_ns / NS_PER_MS:g} ms" for c in classes])
    ax.set_ylabel("queuing delay (ms)")
    ax.set_title("Queuing delay vs analytic envelope")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(destination, dpi=150)
    plt.close(fig)
    return Path(destination)


def render_buffer_figure(metrics: Metrics, destination: Path) -> Path:
    """Buffer budgets vs observed peak occupancy per (link, class)."""
    items = sorted(metrics.link_class.items())
    labels = [f"{link}:{cid}" for (link, cid), _ in items]
    budgets = [s.budget_bits for _, s in items]
    peaks = [s.peak_occupancy_bits for _, s in items]
    idx = np.arange(len(items))

    fig, ax = plt.subplots(figsize=(max(7, 0.5 * len(items)), 4.5))
    width = 0.4
    ax.bar(idx - width / 2, budgets, width, label="budget (y*D*T)", color="#219ebc")
    ax.bar(idx + width / 2, peaks, width, label="peak occupancy", color="#fb8500")
    ax.set_xticks(idx)
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("bits")
    ax.set_title("Buffer budgets vs peak occupancy")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(destination, dpi=150)
    plt.close(fig)
    return Path(destination)


def render_figures(metrics: Metrics, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = verify_bounds(metrics)
    return [
        render_delay_figure(metrics, out_dir / "queuing_delay.png", report),
        render_buffer_figure(metrics, out_dir / "buffers.png"),
    ]
