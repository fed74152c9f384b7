"""Render experiment CSVs into figures.

Input is the flat experiment schema
``experiment,strategy,hops,cost_std,instance,trial,metric,value,seed``;
each figure kind draws exactly one series per strategy (or per policy for
the retransmission chart). Styling is pinned per series and the SVG hash
salt is fixed, so re-rendering a job overwrites its output byte for byte.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "es-figures"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

KINDS = ("hops", "hops_diff", "std", "std_diff", "retrans", "runtime")

STRATEGIES = (
    "pses-layer-greedy",
    "ibt-layer-greedy",
    "pses-segment-greedy",
    "ibt-segment-greedy",
    "bbt",
)
DIFF_SERIES = ("diff-layer-greedy", "diff-segment-greedy")
POLICIES = ("on-demand", "full-path")

# fixed styling keeps series comparable across runs and figures
STYLE = {
    "pses-layer-greedy": ("#1f77b4", "o"),
    "ibt-layer-greedy": ("#ff7f0e", "s"),
    "pses-segment-greedy": ("#2ca02c", "^"),
    "ibt-segment-greedy": ("#d62728", "v"),
    "bbt": ("#9467bd", "D"),
    "diff-layer-greedy": ("#1f77b4", "o"),
    "diff-segment-greedy": ("#2ca02c", "^"),
    "on-demand": ("#d62728", None),
    "full-path": ("#1f3d7a", None),
}


class FigureError(ValueError):
    """Raised when a CSV cannot support the requested figure."""


@dataclass(frozen=True)
class FigureJob:
    kind: str
    csv_path: str
    out_path: str

    @property
    def format(self) -> str:
        suffix = Path(self.out_path).suffix.lower()
        return "vector" if suffix == ".svg" else "raster"


def read_rows(csv_path: str) -> list[dict]:
    try:
        with open(csv_path, newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as exc:
        raise FigureError(f"cannot read {csv_path}: {exc}") from None
    if not rows:
        raise FigureError(f"{csv_path}: no data rows")
    return rows


def _series_means(rows, series_names, x_field, metric):
    """Mean of ``metric`` per (series, x); trial rows only."""
    sums: dict = defaultdict(lambda: [0.0, 0])
    for row in rows:
        if row["metric"] != metric or row["strategy"] not in series_names:
            continue
        if row["instance"] == "":  # aggregate rows are recomputable from trials
            continue
        key = (row["strategy"], float(row[x_field]))
        cell = sums[key]
        cell[0] += float(row["value"])
        cell[1] += 1
    series: dict = defaultdict(dict)
    for (name, x), (total, count) in sums.items():
        series[name][x] = total / count
    missing = [name for name in series_names if name not in series]
    if missing:
        raise FigureError(f"missing strategy series: {', '.join(sorted(missing))}")
    return series


def _line_figure(series, xlabel, ylabel, log_y=False):
    fig, ax = plt.subplots(figsize=(5.2, 3.6), dpi=120)
    for name in sorted(series, key=lambda n: list(STYLE).index(n)):
        xs = sorted(series[name])
        ys = [series[name][x] for x in xs]
        color, marker = STYLE[name]
        ax.plot(xs, ys, label=name, color=color, marker=marker, markersize=4)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def _render_lines(rows, series_names, x_field, metric, xlabel, ylabel, log_y=False):
    series = _series_means(rows, series_names, x_field, metric)
    return _line_figure(series, xlabel, ylabel, log_y=log_y), sorted(series)


def _render_diff(rows, x_field, xlabel):
    pairs = {
        "diff-layer-greedy": ("ibt-layer-greedy", "pses-layer-greedy"),
        "diff-segment-greedy": ("ibt-segment-greedy", "pses-segment-greedy"),
    }
    base = _series_means(rows, STRATEGIES, x_field, "completion_time")
    series = {}
    for name, (worse, better) in pairs.items():
        series[name] = {
            x: base[worse][x] - base[better][x] for x in base[better]
        }
    fig = _line_figure(series, xlabel, "mean time gap (attempts)")
    return fig, sorted(series)


def _render_retrans(rows):
    series: dict = {}
    for policy in POLICIES:
        times = [float(r["value"]) for r in rows
                 if r["strategy"] == policy and r["metric"] == "completion_time"
                 and r["instance"] != ""]
        pairs = [float(r["value"]) for r in rows
                 if r["strategy"] == policy and r["metric"] == "pairs_prepared"
                 and r["instance"] != ""]
        if not times or not pairs:
            continue
        series[policy] = (sum(times) / len(times), sum(pairs) / len(pairs))
    missing = [p for p in POLICIES if p not in series]
    if missing:
        raise FigureError(f"missing strategy series: {', '.join(sorted(missing))}")

    fig, (ax_time, ax_pairs) = plt.subplots(1, 2, figsize=(6.4, 3.4), dpi=120)
    width = 0.55
    for ax, idx, ylabel in ((ax_time, 0, "mean completion time (time units)"),
                            (ax_pairs, 1, "mean pairs prepared")):
        for i, policy in enumerate(POLICIES):
            ax.bar(i, series[policy][idx], width, label=policy, color=STYLE[policy][0])
        ax.set_xticks(range(len(POLICIES)))
        ax.set_xticklabels(POLICIES, fontsize=8)
        ax.set_ylabel(ylabel)
        ax.grid(True, axis="y", alpha=0.3)
    handles, labels = ax_time.get_legend_handles_labels()
    fig.legend(handles, labels, loc="upper center", ncol=2, fontsize=8)
    fig.tight_layout(rect=(0, 0, 1, 0.92))
    return fig, sorted(series)


def render(job: FigureJob) -> dict:
    """Render one figure; returns {'series': [...], 'out': path}."""
    if job.kind not in KINDS:
        raise FigureError(f"unknown figure kind {job.kind!r} (known: {KINDS})")
    rows = read_rows(job.csv_path)
    if job.kind == "hops":
        fig, series = _render_lines(
            rows, STRATEGIES, "hops", "completion_time",
            "path hops", "mean swap time (attempts)",
        )
    elif job.kind == "hops_diff":
        fig, series = _render_diff(rows, "hops", "path hops")
    elif job.kind == "std":
        fig, series = _render_lines(
            rows, STRATEGIES, "cost_std", "completion_time",
            "node cost standard deviation (attempts)", "mean swap time (attempts)",
        )
    elif job.kind == "std_diff":
        fig, series = _render_diff(
            rows, "cost_std", "node cost standard deviation (attempts)"
        )
    elif job.kind == "retrans":
        fig, series = _render_retrans(rows)
    else:  # runtime
        fig, series = _render_lines(
            rows, STRATEGIES, "hops", "plan_wall_time_us",
            "path hops", "median planning time (us)", log_y=True,
        )
    out = Path(job.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Date": None} if job.format == "vector" else None)
    plt.close(fig)
    return {"series": series, "out": str(out)}
