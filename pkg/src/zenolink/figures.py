# figures.py
#
# Matplotlib renderings written next to the delimited outputs.  Figures are
# a convenience view; the CSV/JSON/PGM files stay the canonical record and
# the only ones covered by byte-level reproducibility.

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_sweep_figure(points, path) -> None:
    """S0 and S1 versus N, one curve pair per M."""
    by_m: Dict[int, list] = {}
    for p in points:
        by_m.setdefault(p.m, []).append(p)
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.6), sharey=True)
    for m, pts in sorted(by_m.items()):
        pts = sorted(pts, key=lambda p: p.n)
        ns = [p.n for p in pts]
        ax0.plot(ns, [p.s0 for p in pts], marker=".", label=f"M={m}")
        ax1.plot(ns, [p.s1 for p in pts], marker=".", label=f"M={m}")
    ax0.set_title("$S_0$ (bit 0)")
    ax1.set_title("$S_1$ (bit 1)")
    for ax in (ax0, ax1):
        ax.set_xlabel("N")
        ax.grid(True, linestyle="--", linewidth=0.5)
    ax0.set_ylabel("conditional success probability")
    ax1.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_counts_figure(result, path) -> None:
    """Detector count bars for one bit trial."""
    names = list(result.counts)
    vals = [result.counts[k] for k in names]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(names, vals, color=["#3a7ca5" if n in ("D0", "D1") else "#d1603d" for n in names])
    ax.set_ylabel("clicks")
    ax.set_title(f"bit {result.bit_sent}, T={result.duration_s:g} s, decoded {result.bit_decoded}")
    for x, v in enumerate(vals):
        ax.text(x, v, str(v), ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_trace_figure(reports: Sequence, path) -> None:
    """Per-segment weak-trace magnitudes, one panel per audited case."""
    n = len(reports)
    fig, axes = plt.subplots(n, 1, figsize=(7, 2.4 * n), squeeze=False)
    for ax, rep in zip(axes[:, 0], reports):
        xs = range(len(rep.rows))
        ys = [max(r.trace, 1e-20) for r in rep.rows]
        ax.semilogy(list(xs), ys, ".", markersize=4)
        ax.axhline(1e-10, color="red", linewidth=0.8, linestyle="--", label="1e-10 audit bound")
        ax.set_ylabel("|fwd*bwd|")
        ax.set_title(
            f"bit {rep.bit}, postselect {rep.postselect}: max trace {rep.max_trace:.2e}",
            fontsize=9,
        )
        ax.legend(fontsize=7, loc="upper right")
    axes[-1, 0].set_xlabel("channel segment index")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_image_figure(sent, received, path, metrics: Optional[Dict] = None) -> None:
    """Sent/received rasters side by side."""
    import numpy as np

    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(7, 3.6))
    a = np.array(sent.pixels, dtype=float).reshape(sent.height, sent.width)
    b = np.array(received.pixels, dtype=float).reshape(received.height, received.width)
    ax0.imshow(a, cmap="gray", vmin=0, vmax=255)
    ax0.set_title("sent (binarized)")
    sub = ""
    if metrics:
        sub = f"BER {metrics['ber']:.2%}, {metrics['simulated_time_s']:.0f} s simulated"
    ax1.imshow(b, cmap="gray", vmin=0, vmax=255)
    ax1.set_title(f"received\n{sub}", fontsize=9)
    for ax in (ax0, ax1):
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
