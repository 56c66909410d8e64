"""Plot-ready data files and matplotlib figures for spectra and fits."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import IncompatibleOperands
from .spectral import ExponentFit, counting_pairs


def counting_columns(eigenvalues: Sequence[float], window: tuple[int, int] | None = None):
    """(log lambda_s, log N(lambda_s)) restricted to a 1-based rank window."""
    lam, N = counting_pairs(eigenvalues)
    lo, hi = window if window is not None else (1, len(lam))
    return np.log(lam[lo - 1:hi]), np.log(N[lo - 1:hi])


def emit_plot_data(path, x: Sequence[float], y: Sequence[float], meta: Mapping | None = None,
                   columns: tuple[str, str] = ("log_lambda", "log_N")) -> Path:
    """Write two whitespace-delimited columns with '#'-prefixed metadata lines."""
    path = Path(path)
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise IncompatibleOperands("columns must have the same length")
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    lines.append(f"# columns: {columns[0]} {columns[1]}")
    lines += [f"{a:.17g} {b:.17g}" for a, b in zip(x, y)]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_plot_data(path) -> tuple[np.ndarray, np.ndarray, dict]:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif line.strip():
            rows.append([float(v) for v in line.split()])
    arr = np.array(rows).reshape(-1, 2)
    return arr[:, 0], arr[:, 1], meta


def fit_metadata(fit: ExponentFit, predicted=None) -> dict:
    meta = {"fit_slope": f"{fit.slope:.12g}", "fit_stderr": f"{fit.stderr:.3g}",
            "fit_intercept": f"{fit.intercept:.12g}", "fit_window": f"{fit.window[0]}:{fit.window[1]}"}
    if predicted is not None:
        meta["predicted_slope"] = str(predicted)
    return meta


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_loglog(path, x, y, fit: ExponentFit | None = None, title: str = "",
                  labels: tuple[str, str] = ("log lambda", "log N(lambda)")) -> Path:
    """Scatter of the data columns with the fitted line over the fit window."""
    plt = _pyplot()
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.plot(x, y, ".", ms=3, label="data")
    if fit is not None:
        xs = np.linspace(float(np.min(x)), float(np.max(x)), 50)
        ax.plot(xs, fit.intercept + fit.slope * xs, "-", lw=1, label=f"slope {fit.slope:.4f}")
        ax.legend()
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def render_spectrum(path, spectra: Mapping[int, Sequence[float]], reference: Sequence[float] | None = None,
                    title: str = "") -> Path:
    """Eigenvalue against index for each grid size, optionally with a reference curve."""
    plt = _pyplot()
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for N, vals in sorted(spectra.items()):
        ax.plot(np.arange(1, len(vals) + 1), vals, ".", ms=4, label=f"N = {N}")
    if reference is not None:
        ax.plot(np.arange(1, len(reference) + 1), reference, "-", lw=1, color="k", label="reference")
    ax.set_xlabel("index s")
    ax.set_ylabel("eigenvalue")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
