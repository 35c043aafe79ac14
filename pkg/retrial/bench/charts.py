"""Static SVG charts: grouped bars with error bars, histograms, monitor traces.

Rendered with matplotlib's non-interactive backend.  ``svg.hashsalt`` and
an empty ``Date`` keep repeated renders byte-identical.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

FIGSIZE = (8.0, 4.0)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams.update(
        {
            "font.family": "DejaVu Sans",
            "axes.unicode_minus": False,
            "svg.hashsalt": "retrial",
            "svg.fonttype": "none",
        }
    )
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Union[str, Path]) -> Path:
    plt = _pyplot()
    path = Path(path)
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path


def grouped_bars(
    path: Union[str, Path],
    groups: Sequence[str],
    series: Sequence[str],
    values: Dict[Tuple[str, str], Tuple[float, float]],
    *,
    title: str,
    y_label: str,
    y_max: Optional[float] = None,
) -> Path:
    """Bars for each (group, series) with ``(mean, err)`` error bars."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIGSIZE, constrained_layout=True)
    x = np.arange(len(groups))
    width = 0.8 / max(len(series), 1)
    for si, s in enumerate(series):
        means = [values.get((g, s), (0.0, 0.0))[0] for g in groups]
        errs = [values.get((g, s), (0.0, 0.0))[1] for g in groups]
        ax.bar(x + si * width, means, width * 0.9, yerr=errs, capsize=3, label=s)
    ax.set_xticks(x + width * (len(series) - 1) / 2)
    ax.set_xticklabels(groups)
    ax.set_title(title)
    ax.set_ylabel(y_label)
    if y_max is not None:
        ax.set_ylim(0.0, y_max)
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def histogram(
    path: Union[str, Path],
    buckets: Sequence[int],
    counts: Dict[str, Sequence[int]],
    *,
    bucket_width: int,
    title: str,
    x_label: str,
    marker: Optional[float] = None,
) -> Path:
    """Side-by-side bucket counts per series; ``marker`` draws a vertical reference line."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIGSIZE, constrained_layout=True)
    series = list(counts)
    width = bucket_width / max(len(series), 1)
    left = np.asarray(buckets, dtype=float)
    for si, s in enumerate(series):
        ax.bar(left + si * width, counts[s], width * 0.9, align="edge", label=s)
    if marker is not None:
        ax.axvline(marker, color="black", linestyle="--", linewidth=1, label="mean expert length")
    ax.set_title(title)
    ax.set_xlabel(x_label)
    ax.set_ylabel("recoveries")
    ax.grid(True, axis="y", alpha=0.3)
    if series or marker is not None:
        ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def line_trace(
    path: Union[str, Path],
    steps: Sequence[int],
    values: Sequence[float],
    triggered: Sequence[bool],
    *,
    title: str,
    y_label: str,
) -> Path:
    """Line of ``values`` over ``steps`` with a zero line and triggered steps marked."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIGSIZE, constrained_layout=True)
    if steps:
        ax.plot(steps, values, linewidth=1.5, label="progress vs expected")
        hits = [(s, v) for s, v, t in zip(steps, values, triggered) if t]
        if hits:
            ax.scatter(*zip(*hits), color="tab:red", s=12, zorder=3, label="triggered")
        ax.legend(loc="best", fontsize=8)
    else:
        ax.text(0.5, 0.5, "no judged steps", ha="center", va="center", transform=ax.transAxes)
    ax.axhline(0.0, color="grey", linestyle="--", linewidth=1)
    ax.set_title(title)
    ax.set_xlabel("step")
    ax.set_ylabel(y_label)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)
