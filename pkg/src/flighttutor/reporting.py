"""Delimited report tables and the figures rendered alongside them.

Tables are tab-separated with full round-trip float precision so that
identical runs produce byte-identical files. Figures are best-effort
PNG renderings of the same data (training curve, per-trial heading
error) written next to the tables.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalReport
from .training import TrainingCurve


def _fmt(value) -> str:
    return "" if value is None else repr(value)


def write_eval_table(report: EvalReport, path: str) -> None:
    """One row per (trial, tick) with the absolute heading error."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("trial\ttick\terror\n")
        for trial, series in enumerate(report.error_series):
            for tick, err in enumerate(series):
                fh.write(f"{trial}\t{tick}\t{_fmt(err)}\n")


def write_training_curve(curve: TrainingCurve, path: str) -> None:
    evals = dict(zip(curve.eval_epochs, curve.eval_metric))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\ttrain_loss\tval_loss\teval_heading_error\n")
        for epoch, train_loss, val_loss in zip(curve.epochs, curve.train_loss, curve.val_loss):
            fh.write(
                f"{epoch}\t{_fmt(train_loss)}\t{_fmt(val_loss)}\t{_fmt(evals.get(epoch))}\n"
            )


def save_eval_figure(report: EvalReport, path: str, dt: float) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    n_ticks = max(len(s) for s in report.error_series)
    t = [k * dt for k in range(n_ticks)]
    for trial, series in enumerate(report.error_series):
        ax.plot(t[: len(series)], series, color="steelblue", alpha=0.35, linewidth=0.8)
    mean_series = [
        sum(s[k] for s in report.error_series if k < len(s))
        / max(1, sum(1 for s in report.error_series if k < len(s)))
        for k in range(n_ticks)
    ]
    ax.plot(t, mean_series, color="crimson", linewidth=1.8, label="mean over trials")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("|heading error| (deg)")
    ax.set_title(
        f"heading error over {report.n_trials} randomized trials "
        f"(avg {report.avg_heading_error:.2f} deg)"
    )
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_training_figure(curve: TrainingCurve, path: str) -> None:
    fig, (ax_loss, ax_eval) = plt.subplots(1, 2, figsize=(10, 4))
    ax_loss.plot(curve.epochs, curve.train_loss, label="train", color="steelblue")
    if any(v is not None for v in curve.val_loss):
        epochs = [e for e, v in zip(curve.epochs, curve.val_loss) if v is not None]
        vals = [v for v in curve.val_loss if v is not None]
        ax_loss.plot(epochs, vals, label="validation", color="darkorange")
    ax_loss.set_yscale("log")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("per-sample loss")
    ax_loss.set_title("imitation loss")
    ax_loss.legend()
    ax_loss.grid(alpha=0.3)

    if curve.eval_epochs:
        ax_eval.plot(curve.eval_epochs, curve.eval_metric, marker="o", color="seagreen")
        if curve.best_metric is not None:
            ax_eval.axvline(curve.best_epoch, color="gray", linestyle="--", linewidth=0.8)
    ax_eval.set_xlabel("epoch")
    ax_eval.set_ylabel("avg heading error (deg)")
    ax_eval.set_title("rollout evaluation")
    ax_eval.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
