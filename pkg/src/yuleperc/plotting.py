"""Figures written next to the CLI's tabular output (PNG, headless backend)."""
from __future__ import annotations

from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "font.size": 9,
}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps reruns byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def ecdf_figure(samples: Mapping[str, np.ndarray], path: Path, *, xlabel: str,
                reference: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                reference_label: str = "limit") -> Path:
    """Empirical CDFs of one or more samples, optionally against a reference CDF."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        lo, hi = np.inf, -np.inf
        for label, x in samples.items():
            xs = np.sort(np.asarray(x, dtype=float))
            ax.step(xs, np.arange(1, xs.size + 1) / xs.size, where="post", label=label, lw=1.0)
            lo, hi = min(lo, xs[0]), max(hi, xs[-1])
        if reference is not None and np.isfinite(lo):
            grid = np.linspace(lo, hi, 200)
            ax.plot(grid, reference(grid), "k--", lw=1.0, label=reference_label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("CDF")
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)


def cf_figure(thetas: Sequence[float], empirical: Sequence[complex], analytic: Sequence[complex],
              path: Path, *, title: str = "") -> Path:
    """Real and imaginary parts of an empirical CF against its closed form."""
    th = np.asarray(thetas, dtype=float)
    emp = np.asarray(empirical, dtype=complex)
    ana = np.asarray(analytic, dtype=complex)
    order = np.argsort(th)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(th[order], ana.real[order], "-", color="C0", label="Re analytic")
        ax.plot(th[order], ana.imag[order], "-", color="C1", label="Im analytic")
        ax.plot(th[order], emp.real[order], "o", color="C0", ms=4, label="Re empirical")
        ax.plot(th[order], emp.imag[order], "s", color="C1", ms=4, label="Im empirical")
        ax.set_xlabel(r"$\theta$")
        if title:
            ax.set_title(title)
        ax.legend(ncol=2)
        fig.tight_layout()
        return _save(fig, path)


def curve_figure(x: Sequence[float], y: Sequence[float], path: Path, *, xlabel: str,
                 ylabel: str) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(np.asarray(x), np.asarray(y), "-o", ms=3, lw=1.0)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        fig.tight_layout()
        return _save(fig, path)
