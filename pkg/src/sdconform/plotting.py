"""Figures written next to the text reports (``--plot``)."""

from __future__ import annotations

from collections import Counter


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_semantics(m, path, title="semantics"):
    """Two panels: traces per obligation, and how trace lengths are distributed."""
    from .semantics import sorted_semantics

    plt = _pyplot()
    obligations = sorted_semantics(m)
    sizes = [len(o) for o in obligations]
    lengths = Counter(len(t) for o in obligations for t in o)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.bar(range(1, len(sizes) + 1), sizes, color="tab:blue")
    ax1.set_xlabel("obligation (canonical order)")
    ax1.set_ylabel("traces")
    ax1.set_title("traces per obligation")
    xs = sorted(lengths)
    ax2.bar(xs, [lengths[x] for x in xs], color="tab:orange")
    ax2.set_xlabel("trace length (tokens)")
    ax2.set_ylabel("occurrences")
    ax2.set_title("trace lengths")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_witnesses(witnesses, path, title="witnesses"):
    """Size of each inferred witness: renamed names and hidden events."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = list(range(1, len(witnesses) + 1))
    ax.bar([x - 0.2 for x in xs], [len(w.rho) for w in witnesses], width=0.4, label="rho entries")
    ax.bar([x + 0.2 for x in xs], [len(w.hidden) for w in witnesses], width=0.4, label="hidden events")
    ax.set_xlabel("witness")
    ax.set_xticks(xs)
    ax.legend()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
