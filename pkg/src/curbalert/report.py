"""Experiment report figures, written next to the CSV they summarize."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiment import Condition, TrialRow

_CONDITION_LABELS = {
    Condition.CANE_ALONE: "cane alone",
    Condition.BEEPS_SONIFICATION: "beeps + sonification",
    Condition.BEEPS_SPEECH: "beeps + speech",
}
_CONDITION_COLORS = {
    Condition.CANE_ALONE: "#b0b0b0",
    Condition.BEEPS_SONIFICATION: "#4c9f70",
    Condition.BEEPS_SPEECH: "#4c72b0",
}


def _grouped(rows: list[TrialRow], value):
    groups: dict[tuple[Condition, float], list[float]] = {}
    for row in rows:
        if row.result is None:
            continue
        groups.setdefault((row.condition, row.approach_deg), []).append(value(row.result))
    return groups


def _boxplot(groups, ylabel: str, path: Path) -> None:
    conditions = [c for c in Condition if any(k[0] is c for k in groups)]
    approaches = sorted({k[1] for k in groups})
    data, labels, colors = [], [], []
    for cond in conditions:
        for angle in approaches:
            if (cond, angle) in groups:
                data.append(groups[(cond, angle)])
                labels.append(f"{_CONDITION_LABELS[cond]}\n{angle:g}\N{DEGREE SIGN}")
                colors.append(_CONDITION_COLORS[cond])
    fig, ax = plt.subplots(figsize=(1.4 * max(len(data), 4), 4.2))
    boxes = ax.boxplot(data, patch_artist=True, tick_labels=labels)
    for patch, color in zip(boxes["boxes"], colors):
        patch.set_facecolor(color)
        patch.set_alpha(0.6)
    ax.set_ylabel(ylabel)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_experiment_figures(rows: list[TrialRow], out_dir: str | Path) -> list[Path]:
    """Boxplots of safety window and orientation error by condition and angle."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    window_path = out_dir / "safety_window.png"
    error_path = out_dir / "orientation_error.png"
    _boxplot(
        _grouped(rows, lambda r: r.safety_window_cm),
        "safety window (cm)",
        window_path,
    )
    _boxplot(
        _grouped(rows, lambda r: r.orientation_error_deg),
        "orientation error (deg)",
        error_path,
    )
    return [window_path, error_path]
