"""Deterministic report emission: canonical JSON, CSV with exact float
round-trips, and SVG figures rendered with pinned matplotlib settings so
repeated runs produce byte-identical artifacts.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "causal-scope"
matplotlib.rcParams["svg.fonttype"] = "none"

_METHOD_ORDER = ("full", "ibd", "oracle", "mi", "variance", "cond_mi", "grad_attr")
_METHOD_COLORS = {
    "full": "#444444",
    "ibd": "#1f77b4",
    "oracle": "#2ca02c",
    "mi": "#d62728",
    "variance": "#9467bd",
    "cond_mi": "#ff7f0e",
    "grad_attr": "#8c564b",
}


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_json(obj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_csv(rows, path, fieldnames=None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    if fieldnames is None:
        if not rows:
            raise ValueError("cannot infer fieldnames from empty rows")
        fieldnames = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in fieldnames})


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _save_svg(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _group_mean(rows, keys, value):
    """Mean of rows[value] grouped by the tuple of `keys`, insertion order."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(float(row[value]))
    return {k: sum(v) / len(v) for k, v in groups.items()}


def render_scaling_figure(rows, path) -> None:
    """Mean evaluation return per distractor level, one line per method."""
    levels = list(dict.fromkeys(row["level"] for row in rows))
    means = _group_mean(rows, ("method", "level"), "return")
    methods = [m for m in _METHOD_ORDER if any(k[0] == m for k in means)]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    x = range(len(levels))
    for method in methods:
        y = [means.get((method, lvl)) for lvl in levels]
        ax.plot(x, y, marker="o", label=method,
                color=_METHOD_COLORS.get(method, "#333333"))
    ax.set_xticks(list(x))
    ax.set_xticklabels(levels)
    ax.set_xlabel("distractor level")
    ax.set_ylabel("mean return")
    ax.set_title("Control performance vs. distractor load")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save_svg(fig, path)


def render_partial_figure(rows, path) -> None:
    """Recall and precision of the discovered mask vs. mixing coefficient."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for metric, color in (("recall", "#1f77b4"), ("precision", "#d62728")):
        means = _group_mean(rows, ("alpha",), metric)
        alphas = sorted(k[0] for k in means)
        ax.plot(alphas, [means[(a,)] for a in alphas],
                marker="o", label=metric, color=color)
    ax.set_xlabel("causal mixing coefficient")
    ax.set_ylabel("score")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title("Boundary recovery under partial controllability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save_svg(fig, path)


def render_scout_figure(rows, path) -> None:
    """Mean boundary F1 per probe policy, grouped by environment."""
    envs = list(dict.fromkeys(row["env"] for row in rows))
    policies = ("structured_random", "uniform_random")
    means = _group_mean(rows, ("env", "policy"), "f1")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    width = 0.35
    for j, policy in enumerate(policies):
        xs = [i + (j - 0.5) * width for i in range(len(envs))]
        ys = [means.get((env, policy), 0.0) for env in envs]
        ax.bar(xs, ys, width=width, label=policy)
    ax.set_xticks(range(len(envs)))
    ax.set_xticklabels(envs, fontsize=8)
    ax.set_ylabel("boundary F1")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Probe policy comparison")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save_svg(fig, path)


def render_pvalue_figure(report: dict, path) -> None:
    """Per-dimension minimum adjusted p-values on a log scale, colored by
    inclusion in the discovered mask."""
    pvals = [min(e["adjusted_p_by_horizon"].values()) for e in report["per_dim"]]
    mask = report["mask"]
    labels = [e["label_if_known"] for e in report["per_dim"]]
    if any(lb is None for lb in labels):
        labels = None
    alpha = report["config"]["alpha"]
    d = len(pvals)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.25 * d), 4.0))
    colors = ["#1f77b4" if m else "#bbbbbb" for m in mask]
    floor = 1e-300
    ax.bar(range(d), [max(p, floor) for p in pvals], color=colors)
    ax.set_yscale("log")
    ax.axhline(alpha, color="#d62728", linewidth=1.0, linestyle="--")
    ax.set_xlabel("observation dimension")
    ax.set_ylabel("min adjusted p (log)")
    ax.set_title("Discovered boundary (blue = selected)")
    if labels is not None and d <= 40:
        ax.set_xticks(range(d))
        ax.set_xticklabels(labels, rotation=90, fontsize=6)
    fig.tight_layout()
    _save_svg(fig, path)


def render_ranking_figure(report: dict, path) -> None:
    """Baseline score ranking bar chart, colored by inclusion."""
    scores = report["scores"]
    mask = report["mask"]
    d = len(scores)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.25 * d), 4.0))
    colors = ["#1f77b4" if m else "#bbbbbb" for m in mask]
    ax.bar(range(d), scores, color=colors)
    ax.set_xlabel("observation dimension")
    ax.set_ylabel(f"{report['method']} score")
    ax.set_title(f"Baseline ranking ({report['method']}), budget={report['budget']}")
    fig.tight_layout()
    _save_svg(fig, path)


SWEEP_FIGURES = {
    "scaling": render_scaling_figure,
    "partial": render_partial_figure,
    "scout": render_scout_figure,
}
