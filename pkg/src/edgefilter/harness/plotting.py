"""SVG rendering of eigenmode and denoising figures.

Uses the object-oriented matplotlib API (no pyplot state), so figures can be
drawn from worker threads. Output is byte-stable: fixed hash salt, no date.
"""

import matplotlib

matplotlib.use("Agg")

from matplotlib.figure import Figure  # noqa: E402

RC = {
    "svg.hashsalt": "edgefilter",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
}
WIDTH = 6.4
GOLDEN = 0.618


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})


def plot_eigenmodes(eigs, path, title, edge_index=None):
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(WIDTH, WIDTH * GOLDEN))
        ax = fig.add_subplot()
        for j in range(len(eigs)):
            ax.plot(eigs.mode(j), label=f"mode {j}  ({eigs.values[j]:.3g})")
        if edge_index is not None:
            ax.axvline(edge_index + 0.5, color="0.5", linestyle=":", linewidth=0.8)
        ax.set_xlabel("sample index")
        ax.set_ylabel("component")
        ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        _save(fig, path)


def plot_denoising(clean, noisy, outputs, psnrs, path, title):
    """Noisy samples as grey dots, clean signal and each filter output as lines."""
    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(WIDTH, WIDTH * GOLDEN))
        ax = fig.add_subplot()
        ax.plot(noisy, ".", color="0.65", markersize=2.5, label="noisy")
        ax.plot(clean, color="k", linewidth=0.8, label="clean")
        for name, x in outputs.items():
            p = psnrs.get(name)
            label = name if p is None else f"{name}  PSNR {p:.2f} dB"
            ax.plot(x, label=label)
        ax.set_xlabel("sample index")
        ax.set_ylabel("value")
        ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        _save(fig, path)
