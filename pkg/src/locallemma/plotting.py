"""Figure rendering for the CLI report paths.

Plots are written straight to files (Agg backend, no display), always
alongside the delimited data they visualize, never instead of it.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def save_threshold_curve(rows: Sequence, path: str) -> None:
    """Smallest valid k and its approximation against epsilon (log-log)."""
    eps = [r.epsilon for r in rows]
    exact = [r.k_exact for r in rows]
    approx = [r.k_approx for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.loglog(eps, exact, "o-", markersize=3, label="exact smallest valid k")
    ax.loglog(eps, approx, "--", label="double-log approximation")
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel("smallest valid k")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ramsey_bounds(rows: Sequence[tuple[int, int, int]], path: str) -> None:
    """Certified lower bounds on R(k,k) for both dependency counts (log y)."""
    ks = [r[0] for r in rows]
    ver3 = [r[1] for r in rows]
    ver4 = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.semilogy(ks, ver3, "o-", markersize=4, label="union-bound count (ver3)")
    ax.semilogy(ks, ver4, "s--", markersize=4, label="exact count (ver4)")
    ax.set_xlabel("k")
    ax.set_ylabel("certified lower bound on R(k,k)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_rainbow_caps(rows: Sequence[tuple[int, int, int, int]], path: str) -> None:
    """Intersection caps A and B for the tabulated (r, k) pairs."""
    labels = [f"({r},{k})" for r, k, _a, _b in rows]
    a_vals = [a for _r, _k, a, _b in rows]
    b_vals = [b for _r, _k, _a, b in rows]
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.bar([i - 0.2 for i in x], a_vals, width=0.4, label="A (union bound)")
    ax.bar([i + 0.2 for i in x], b_vals, width=0.4, label="B (exact probability)")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_xlabel("(r, k)")
    ax.set_ylabel("intersection cap")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
