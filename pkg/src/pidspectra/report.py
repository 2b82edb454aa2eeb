"""Delimited output and stacked-bar figures for grid results.

CSV rows are written with shortest round-trip float formatting, so reruns
with the same seeds produce byte-identical files.  Figures show one stacked
bar per transfer function with the five spectrum components in fixed legend
order; panels are laid out scenario by method, one figure per (model, d).
Negative components (possible for the ccs method) extend below the axis.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import transfer
from .runner import GridResult, METHOD_ORDER, TRANSFER_ORDER

CSV_COLUMNS = ("model", "transfer", "scenario", "d", "method", "normalized",
               "UnqR", "UnqC", "Shd", "Syn", "Hres", "HY", "seed", "n")

COMPONENT_ORDER = ("UnqR", "UnqC", "Shd", "Syn", "Hres")
COMPONENT_COLORS = {
    "UnqR": "#1f77b4",
    "UnqC": "#ff7f0e",
    "Shd": "#2ca02c",
    "Syn": "#d62728",
    "Hres": "#9467bd",
}


def _fmt(x) -> str:
    return repr(float(x))


def emit_csv(result: GridResult, path) -> str:
    """Write one CSV row per (cell, method); returns the path written."""
    if not result.rows:
        raise ValueError("empty grid result")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            cfg, s = row.config, row.spectrum
            writer.writerow([
                cfg.model, cfg.transfer, cfg.scenario, _fmt(cfg.d), row.method,
                int(s.normalized),
                _fmt(s.unq_r), _fmt(s.unq_c), _fmt(s.shd), _fmt(s.syn),
                _fmt(s.hres), _fmt(s.hy),
                cfg.seed, cfg.n,
            ])
    return str(path)


def emit_svg(result: GridResult, path) -> list:
    """Render stacked-bar spectra; returns the list of files written.

    One figure per (model, d) present in the result.  If there is exactly
    one such group the figure lands at ``path``; otherwise each file name
    gains a ``_<model>_d<d>`` suffix.
    """
    if not result.rows:
        raise ValueError("empty grid result")
    groups: dict[tuple, list] = {}
    for row in result.rows:
        groups.setdefault((row.config.model, row.config.d), []).append(row)

    written = []
    single = len(groups) == 1
    for (model, d), rows in sorted(groups.items()):
        target = str(path)
        if not single:
            root, ext = os.path.splitext(target)
            target = f"{root}_{model}_d{_slug(d)}{ext or '.svg'}"
        _render_group(model, d, rows, target)
        written.append(target)
    return written


def _slug(d: float) -> str:
    return repr(float(d)).replace(".", "p").replace("-", "m")


def _render_group(model: str, d: float, rows, path: str) -> None:
    scenarios = sorted({r.config.scenario for r in rows})
    methods = [m for m in METHOD_ORDER if any(r.method == m for r in rows)]
    transfers = [t for t in TRANSFER_ORDER if any(r.config.transfer == t for r in rows)]
    by_key = {(r.config.scenario, r.method, r.config.transfer): r.spectrum for r in rows}

    plt.rcParams["svg.hashsalt"] = "pidspectra"
    nrow, ncol = len(scenarios), len(methods)
    fig, axes = plt.subplots(nrow, ncol, figsize=(3.2 * ncol, 2.4 * nrow),
                             sharex=True, sharey=True, squeeze=False)
    xs = range(len(transfers))
    for i, sid in enumerate(scenarios):
        for j, method in enumerate(methods):
            ax = axes[i][j]
            for k, tag in enumerate(transfers):
                spectrum = by_key.get((sid, method, tag))
                if spectrum is None:
                    continue
                pos = 0.0
                neg = 0.0
                for name, value in zip(COMPONENT_ORDER, spectrum.terms()):
                    if value >= 0:
                        ax.bar(k, value, bottom=pos, color=COMPONENT_COLORS[name], width=0.75)
                        pos += value
                    else:
                        ax.bar(k, value, bottom=neg, color=COMPONENT_COLORS[name], width=0.75)
                        neg += value
            ax.axhline(0.0, color="black", linewidth=0.6)
            ax.set_xticks(list(xs))
            ax.set_xticklabels(transfers)
            if i == 0:
                ax.set_title(method)
            if j == 0:
                ax.set_ylabel(f"scenario {sid}")
    unit = "fraction of H(Y)" if rows and rows[0].spectrum.normalized else "bits"
    handles = [plt.Rectangle((0, 0), 1, 1, color=COMPONENT_COLORS[n]) for n in COMPONENT_ORDER]
    fig.legend(handles, COMPONENT_ORDER, ncol=5, loc="upper center", frameon=False)
    fig.suptitle(f"{model.upper()} spectra, d = {d} ({unit})", y=0.02, va="bottom")
    fig.tight_layout(rect=(0, 0.04, 1, 0.93))
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_samples_csv(batch, path) -> str:
    """Debug export of a sample batch as r, c, y columns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "c", "y"])
        y = batch.y if batch.y is not None else [""] * batch.n
        for r, c, yv in zip(batch.r, batch.c, y):
            writer.writerow([_fmt(r), _fmt(c), yv])
    return str(path)
