"""Report figures rendered next to the delimited outputs.

All figures go through the Agg backend and are saved as SVG with a
fixed hash salt and no creation date, so rerunning a pipeline rewrites
byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "hessianscope"

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _new_axes(xlabel: str, ylabel: str, title: str):
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _finish(fig, path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_curvature_series(series, path):
    """Curvature of a frozen direction across training time."""
    fig, ax = _new_axes("training step t", "v(t0)' H(t) v(t0)",
                        f"curvature of the step-{series.t0} direction over time")
    ax.plot(series.steps, series.curvatures, marker="o", ms=3)
    ax.axvline(series.t0, color="crimson", ls="--", lw=1,
               label=f"t0 = {series.t0}")
    ax.axhline(series.probe.lam, color="gray", ls=":", lw=1,
               label="lambda at t0")
    ax.legend()
    _finish(fig, path)


def plot_profile(profile, path, index: int = 0):
    """True loss vs local quadratic model along one eigendirection."""
    fig, ax = _new_axes("step scale alpha", "loss",
                        f"direction {index}: lambda = {profile.pair.lam:.4g}")
    ax.plot(profile.alphas, profile.true_losses, label="true loss")
    ax.plot(profile.alphas, profile.model_losses, ls="--",
            label="quadratic model")
    ax.axvline(0.0, color="gray", lw=0.8)
    ax.legend()
    _finish(fig, path)


def plot_fit_scatter(fits, path):
    """Finite-range curvature y against eigenvalue lambda, with y = x."""
    lams = np.array([f.lam for f in fits if not f.degenerate])
    ys = np.array([f.curvature for f in fits if not f.degenerate])
    fig, ax = _new_axes("eigenvalue lambda", "fitted curvature y",
                        "finite-range vs infinitesimal curvature")
    if lams.size:
        lo = float(min(lams.min(), ys.min()))
        hi = float(max(lams.max(), ys.max()))
        ax.plot([lo, hi], [lo, hi], color="gray", lw=1, label="y = x")
        ax.scatter(lams, ys, s=18)
    ax.legend()
    _finish(fig, path)


def plot_step_scatter(results, path):
    """Inverse optimal step against eigenvalue, with the 1/alpha = lambda line."""
    ok = [r for r in results if not r.degenerate and r.alpha_star != 0.0]
    lams = np.array([r.lam for r in ok])
    inv = np.array([1.0 / r.alpha_star for r in ok])
    fig, ax = _new_axes("eigenvalue lambda", "1 / alpha*",
                        "inverse optimal step vs curvature")
    if lams.size:
        lo = float(min(lams.min(), inv.min()))
        hi = float(max(lams.max(), inv.max()))
        ax.plot([lo, hi], [lo, hi], color="gray", lw=1, label="1/alpha* = lambda")
        ax.scatter(lams, inv, s=18)
    ax.legend()
    _finish(fig, path)


def plot_improvement_scatter(results, path):
    """Best achievable per-direction improvement against eigenvalue."""
    ok = [r for r in results if not r.degenerate]
    lams = np.array([r.lam for r in ok])
    gains = np.array([r.improvement for r in ok])
    fig, ax = _new_axes("eigenvalue lambda", "loss improvement",
                        "optimal-step improvement vs curvature")
    if lams.size:
        ax.scatter(lams, gains, s=18)
        ax.set_yscale("symlog", linthresh=1e-12)
    _finish(fig, path)


def plot_negcurve_comparison(baseline_losses, rows, path):
    """Paired baseline vs alternating losses plus the tracked curvature."""
    steps = np.arange(1, len(baseline_losses) + 1)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True,
                                   constrained_layout=True)
    ax1.plot(steps, baseline_losses, label="baseline")
    ax1.plot([r.step for r in rows], [r.loss for r in rows],
             label="with curvature escape")
    ax1.set_ylabel("loss")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    ax2.plot([r.step for r in rows], [r.lam for r in rows], color="crimson")
    ax2.axhline(0.0, color="gray", lw=0.8)
    fired = [r.step for r in rows if r.fired]
    if fired:
        ax2.scatter(fired, [0.0] * len(fired), marker="|", color="black",
                    label="extra step fired")
        ax2.legend()
    ax2.set_xlabel("training step")
    ax2.set_ylabel("tracked curvature")
    ax2.grid(True, alpha=0.3)
    _finish(fig, path)
