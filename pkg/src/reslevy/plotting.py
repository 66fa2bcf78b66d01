"""PNG figures for CLI reports, rendered with the non-interactive Agg backend."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_criteria_map", "plot_trace", "plot_lifetimes", "plot_verify"]

_VERDICT_COLORS = {
    "AbsorbedAS": "tab:red",
    "Conservative": "tab:blue",
    "NotAbsorbedWProb1": "tab:green",
    "Unknown": "tab:gray",
}
# fixed metadata keeps repeated renders byte-stable
_META = {"Software": None}


def _save(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata=_META)
    plt.close(fig)
    return path


def plot_criteria_map(rows: list[dict], path: str) -> str:
    """Verdict per admissible ``(alpha, rhobar)`` with the ``alpha rhobar = 1/2`` line."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for verdict, color in _VERDICT_COLORS.items():
        pts = [(r["alpha"], r["rhobar"]) for r in rows if r["verdict"] == verdict]
        if pts:
            a, r = np.array(pts).T
            ax.scatter(a, r, s=14, c=color, label=verdict)
    alpha = np.linspace(0.5, 2.0, 200)
    ax.plot(alpha, 0.5 / alpha, "k--", lw=1, label=r"$\alpha\bar\rho = 1/2$")
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel(r"$\bar\rho$")
    ax.set_ylim(0, 1)
    ax.legend(fontsize=8, loc="upper right")
    ax.set_title("Stable absorption map")
    return _save(fig, path)


def plot_trace(times, values, tau_seq, pos_seq, path: str, title: str = "") -> str:
    """A resurrected path with its resurrection epochs marked."""
    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    ax.step(times, values, where="post", lw=0.8, color="k")
    if len(tau_seq):
        ax.plot(tau_seq, pos_seq, "o", ms=3, color="tab:red", label="resurrections")
        ax.legend(fontsize=8)
    ax.axhline(0.0, color="0.6", lw=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("Z")
    ax.set_title(title)
    return _save(fig, path)


def plot_lifetimes(samples: dict[float, np.ndarray], path: str, exponent: float | None = None) -> str:
    """Empirical CDFs of lifetimes per start, optionally rescaled by ``x^exponent``."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for x, zeta in sorted(samples.items()):
        z = np.sort(np.asarray(zeta, dtype=float))
        if exponent is not None:
            z = z / x**exponent
        ax.step(z, np.arange(1, z.size + 1) / z.size, where="post", lw=1, label=f"x = {x:g}")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\zeta$" if exponent is None else rf"$\zeta / x^{{{exponent:g}}}$")
    ax.set_ylabel("empirical CDF")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_verify(blocks: list[dict], path: str) -> str:
    """Pass/fail overview of verification blocks."""
    fig, ax = plt.subplots(figsize=(6.0, 0.5 + 0.4 * max(len(blocks), 1)))
    names = [b["check"] for b in blocks]
    ok = [bool(b["pass"]) for b in blocks]
    ax.barh(range(len(names)), [1] * len(names), color=["tab:green" if o else "tab:red" for o in ok])
    ax.set_yticks(range(len(names)), names)
    ax.set_xticks([])
    ax.invert_yaxis()
    ax.set_title("verification checks (green = pass)")
    return _save(fig, path)
