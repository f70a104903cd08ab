"""Figure rendering for CLI reports.

Each renderer takes the already-built report dictionary and writes one PNG
next to the delimited output. Rendering is presentation only; nothing here
feeds back into scores.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

PLOT_STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "figure.autolayout": True,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "axes.titlesize": 11,
}


def render_score_figure(report: dict, path) -> Path:
    """Bar chart of per-degradation responses with the mean marked."""
    path = Path(path)
    with plt.rc_context(PLOT_STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        names = list(report["ddr"])
        values = [report["ddr"][n] for n in names]
        ax.bar(names, values, color="#4878cf")
        ax.axhline(report["q_ddr"], color="#d65f5f", linestyle="--", label="mean")
        ax.set_ylabel("degradation response")
        ax.set_title(Path(report["image"]).name)
        ax.legend()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_eval_figures(report: dict, out_base) -> list[Path]:
    """Scatter of score vs label plus a score histogram."""
    out_base = Path(out_base)
    scores = [row["q_ddr"] for row in report["per_image"]]
    labels = [row["mos"] for row in report["per_image"]]
    written = []
    with plt.rc_context(PLOT_STYLE):
        fig, ax = plt.subplots(figsize=(4.4, 4.0))
        ax.scatter(scores, labels, s=18, alpha=0.7, color="#4878cf")
        ax.set_xlabel("quality score (mean response)")
        ax.set_ylabel("labeled opinion score")
        ax.set_title(f"{report['dataset_id']}: srcc={report['srcc']:.4f}")
        scatter_path = out_base.with_name(out_base.stem + "_scatter.png")
        fig.savefig(scatter_path)
        plt.close(fig)
        written.append(scatter_path)

        fig, ax = plt.subplots(figsize=(4.4, 3.2))
        ax.hist(scores, bins=min(20, max(5, len(scores))), color="#6acc65")
        ax.set_xlabel("quality score")
        ax.set_ylabel("images")
        ax.set_title(f"{report['dataset_id']}: score distribution")
        hist_path = out_base.with_name(out_base.stem + "_hist.png")
        fig.savefig(hist_path)
        plt.close(fig)
        written.append(hist_path)
    return written


def render_correlation_figure(report: dict, path) -> Path:
    """Grouped bars: one cluster per degradation type, one bar per column."""
    path = Path(path)
    columns = report["columns"]
    rows = report["rows"]
    with plt.rc_context(PLOT_STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 3.4))
        width = 0.8 / len(columns)
        for ci, column in enumerate(columns):
            xs = [ri + ci * width for ri in range(len(rows))]
            ax.bar(xs, [row[column] for row in rows], width=width, label=column)
        ax.set_xticks([ri + 0.4 - width / 2 for ri in range(len(rows))])
        ax.set_xticklabels([row["degradation"] for row in rows])
        ax.set_ylabel("rank correlation")
        ax.set_ylim(-1.0, 1.0)
        ax.legend(fontsize=8)
        ax.set_title(report["dataset_id"])
        fig.savefig(path)
        plt.close(fig)
    return path


def render_ladder_figure(levels, values, ylabel: str, path) -> Path:
    """Response curve across a degradation ladder."""
    path = Path(path)
    with plt.rc_context(PLOT_STYLE):
        fig, ax = plt.subplots(figsize=(4.6, 3.2))
        ax.plot(levels, values, marker="o", color="#4878cf")
        ax.set_xlabel("degradation level")
        ax.set_ylabel(ylabel)
        fig.savefig(path)
        plt.close(fig)
    return path


def render_objective_figure(report: dict, path) -> Path:
    """Weighted response terms entering the objective."""
    path = Path(path)
    terms = report["ddr"]
    with plt.rc_context(PLOT_STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        names = list(terms)
        weighted = [report["lambda_d"] * terms[n] for n in names]
        ax.bar(names, weighted, color="#6acc65")
        ax.set_ylabel(f"weighted response (lambda={report['lambda_d']:g})")
        title = "objective terms"
        if report.get("identical_inputs"):
            title += " (identical inputs)"
        ax.set_title(title)
        fig.savefig(path)
        plt.close(fig)
    return path
