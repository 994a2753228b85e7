"""Figures written next to CLI output.  Uses the non-interactive Agg backend."""
from __future__ import annotations

import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

log = logging.getLogger(__name__)

plt.rcParams.update({"font.size": 10, "axes.grid": True, "grid.alpha": 0.3,
                     "savefig.dpi": 120, "figure.figsize": (6.4, 4.0)})


def _save(fig, path):
    log.info("writing %s", path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def measure_figure(t, mass, accumulation=(), path="measure.png", interval=None):
    """Stem plot of atom masses, accumulation points as dashed lines."""
    fig, ax = plt.subplots()
    t = np.asarray(t)
    mass = np.asarray(mass)
    if interval is not None:
        keep = (t > interval[0]) & (t < interval[1])
        t, mass = t[keep], mass[keep]
    ax.vlines(t, 0, mass, lw=0.8)
    ax.set_yscale("log")
    for x in accumulation:
        ax.axvline(x, color="C3", ls="--", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("atom mass")
    return _save(fig, path)


def spectrum_figure(atoms, eigenvalues, tau, path="spectrum.png"):
    """Atoms and extension eigenvalues on two rows, to show interlacing."""
    fig, ax = plt.subplots(figsize=(6.4, 2.2))
    ax.plot(atoms, np.zeros(len(atoms)), "|", ms=14, label="atoms")
    ax.plot(eigenvalues, np.ones(len(eigenvalues)), "|", ms=14, color="C1",
            label=f"eigenvalues, tau={tau:g}")
    ax.set_yticks([0, 1])
    ax.set_yticklabels(["atoms", "eigs"])
    ax.set_ylim(-0.5, 1.5)
    ax.set_xlabel("lambda")
    return _save(fig, path)


def series_figure(x, ys, labels, xlabel, ylabel, path, logy=False):
    fig, ax = plt.subplots()
    for y, lab in zip(ys, labels):
        ax.plot(x, y, marker=".", label=lab)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(labels) > 1:
        ax.legend()
    return _save(fig, path)
