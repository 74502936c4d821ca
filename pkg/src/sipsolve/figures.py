"""Matplotlib renderings of experiment outputs, written next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_METHOD_COLORS = {"sgd": "tab:blue", "mlsgd": "tab:green", "landweber": "tab:orange"}
_METHOD_LABELS = {"sgd": "SGD", "mlsgd": "ML-SGD", "landweber": "Landweber"}


def render_fitted(w: np.ndarray, f_true: np.ndarray,
                  fits: dict[str, np.ndarray], out_path: Path) -> None:
    """Recovered functions against the truth (truth shown as black dots)."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    stride = max(1, len(w) // 60)
    ax.plot(w[::stride], f_true[::stride], "k.", markersize=4, label="truth")
    for method, values in fits.items():
        ax.plot(w, values, color=_METHOD_COLORS.get(method, "gray"),
                linewidth=1.2, label=_METHOD_LABELS.get(method, method))
    ax.set_xlabel("w")
    ax.set_ylabel("f(w)")
    ax.legend(frameon=False)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_mse_bars(stats: dict[str, tuple[float, float]], out_path: Path) -> None:
    """Mean MSE per method with 2-standard-deviation error bars."""
    methods = list(stats)
    means = [stats[m][0] for m in methods]
    two_sd = [stats[m][1] for m in methods]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    colors = [_METHOD_COLORS.get(m, "gray") for m in methods]
    ax.bar(range(len(methods)), means, yerr=two_sd, capsize=5,
           color=colors, alpha=0.85)
    ax.set_xticks(range(len(methods)))
    ax.set_xticklabels([_METHOD_LABELS.get(m, m) for m in methods])
    ax.set_ylabel("MSE (mean over replicates, bars = 2 sd)")
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_cv_bars(rows: list[tuple[str, int, float, float]], out_path: Path) -> None:
    """Per-fold accuracy and kappa, grouped by method.

    Rows are ``(method, fold, accuracy, kappa)``.
    """
    methods = sorted({r[0] for r in rows})
    fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharex=True)
    for ax, idx, title in ((axes[0], 2, "accuracy"), (axes[1], 3, "kappa")):
        width = 0.8 / max(len(methods), 1)
        for mi, method in enumerate(methods):
            pts = [(r[1], r[idx]) for r in rows if r[0] == method]
            folds = [p[0] for p in pts]
            vals = [p[1] for p in pts]
            ax.bar([f + mi * width for f in folds], vals, width=width,
                   color=_METHOD_COLORS.get(method, "gray"),
                   label=_METHOD_LABELS.get(method, method))
        ax.set_title(title)
        ax.set_xlabel("fold")
        ax.spines["right"].set_visible(False)
        ax.spines["top"].set_visible(False)
    axes[0].legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
