"""SVG price-trajectory charts with competitive and monopoly reference lines."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed salt and no date keep SVG output byte-stable across runs
matplotlib.rcParams["svg.hashsalt"] = "collusionlab"


def plot_run(log, p_competitive: float, p_monopoly: float, path, title: str = "",
             labels=None) -> None:
    prices = log.prices()
    t = [r.t for r in log.records]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for i in range(prices.shape[1]):
        ax.plot(t, prices[:, i], lw=1.2, label=labels[i] if labels else f"Seller {i + 1}")
    ax.axhline(p_competitive, ls="--", color="gray", lw=1, label=f"$p^C$ = {p_competitive:.2f}")
    ax.axhline(p_monopoly, ls="--", color="black", lw=1, label=f"$p^M$ = {p_monopoly:.2f}")
    ax.set_xlabel("Period")
    ax.set_ylabel("Price")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
