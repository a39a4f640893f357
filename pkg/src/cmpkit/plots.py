"""SVG rendering of sweeps, minima traces and fits.

Figures are drawn on matplotlib ``Figure`` objects directly (no pyplot
state machine) and saved with a pinned hash salt, path-rendered text and
no Date metadata, so identical inputs produce byte-identical SVG files.
Heatmaps rasterize their quad mesh into an embedded image, which keeps
file sizes flat in the grid size.  All files are self-contained.
"""
from __future__ import annotations

import numpy as np
from matplotlib import rc_context
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .sweeps import MinimaTrace, SweepResult

__all__ = ["render_sweep", "render_sweep_set", "render_minima", "render_fit"]

_RC = {"svg.hashsalt": "cmpkit", "svg.fonttype": "path"}

_AXIS_LABEL = {
    "omega_m_MHz": "magnon frequency (MHz)",
    "x_mm": "displacement (mm)",
    "delta_phi_rad": "feed phase difference (rad)",
    "q": "feed power ratio",
}

_QUANTITY_LABEL = {
    "total": "total output power (dB)",
    "s11": "|S11|^2 (dB)",
    "s21": "|S21|^2 (dB)",
}


def _new_figure(width: float = 7.0, height: float = 4.6) -> Figure:
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasSVG(fig)
    return fig


def _save(fig: Figure, path) -> None:
    with rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def _sweep_label(result: SweepResult) -> str:
    return _AXIS_LABEL.get(result.sweep_param, result.sweep_param)


def _pick_style(result: SweepResult) -> str:
    if result.sweep_param in ("delta_phi_rad", "q"):
        return "lines"
    if result.sweep_values.size == 1:
        return "spectrum"
    return "heatmap"


def _draw_heatmap(ax, result: SweepResult) -> None:
    mesh = ax.pcolormesh(
        result.sweep_values,
        result.freqs,
        result.power_db.T,
        shading="nearest",
        cmap="viridis",
        rasterized=True,
    )
    for ov in result.overlays:
        ax.plot(
            ov.sweep_values,
            ov.freqs,
            linestyle="none",
            marker="o",
            markersize=3.0,
            markerfacecolor="none",
            markeredgecolor="white",
            markeredgewidth=0.7,
        )
    ax.set_xlabel(_sweep_label(result))
    ax.set_ylabel("probe frequency (MHz)")
    ax.figure.colorbar(mesh, ax=ax, label=_QUANTITY_LABEL[result.quantity])


def _draw_lines(ax, result: SweepResult, label_prefix: str = "") -> None:
    db = result.power_db
    for j, f in enumerate(result.freqs):
        label = f"probe {f:g} MHz"
        if label_prefix:
            label = f"{label_prefix}, {label}"
        ax.plot(result.sweep_values, db[:, j], linewidth=1.2, label=label)
    ax.set_xlabel(_sweep_label(result))
    ax.set_ylabel(_QUANTITY_LABEL[result.quantity])
    ax.legend(loc="best", fontsize="small")


def _draw_spectrum(ax, result: SweepResult) -> None:
    ax.plot(result.freqs, result.power_db[0], linewidth=1.2)
    ax.set_xlabel("probe frequency (MHz)")
    ax.set_ylabel(_QUANTITY_LABEL[result.quantity])


def render_sweep(result: SweepResult, path, style: str = "auto") -> None:
    """Render one sweep to SVG.

    ``style`` "auto" picks a heatmap for 2-D grids (with overlay curves
    as open circles), a line-per-probe-frequency plot for phase and
    ratio sweeps, and a plain spectrum for single-row grids.  Explicit
    values "heatmap", "lines" and "spectrum" force a style.
    """
    if style == "auto":
        style = _pick_style(result)
    fig = _new_figure()
    ax = fig.add_subplot(1, 1, 1)
    if style == "heatmap":
        _draw_heatmap(ax, result)
    elif style == "lines":
        _draw_lines(ax, result)
    elif style == "spectrum":
        _draw_spectrum(ax, result)
    else:
        raise ValueError(f"unknown style {style!r}")
    fig.tight_layout()
    _save(fig, path)


def render_sweep_set(results, path) -> None:
    """Render several 1-D sweeps on one axes.

    Single-row members are drawn as spectra against probe frequency;
    multi-row members as traces against the swept value.
    """
    results = list(results)
    if not results:
        raise ValueError("empty sweep set")
    fig = _new_figure()
    ax = fig.add_subplot(1, 1, 1)
    spectra = all(r.sweep_values.size == 1 for r in results)
    for result in results:
        prefix = str(result.metadata.get("label", ""))
        if spectra:
            label = prefix or _QUANTITY_LABEL[result.quantity]
            ax.plot(result.freqs, result.power_db[0], linewidth=1.2, label=label)
        else:
            _draw_lines(ax, result, label_prefix=prefix)
    if spectra:
        ax.set_xlabel("probe frequency (MHz)")
        ax.set_ylabel("power (dB)")
        ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    _save(fig, path)


def render_minima(trace: MinimaTrace, path) -> None:
    """Render a minima trace: per-sweep-point minimum output in dB."""
    fig = _new_figure()
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(trace.sweep_values, trace.power_db, linewidth=1.2, color="C0")
    averaged = trace.branch_averaged
    if np.any(averaged):
        ax.plot(
            trace.sweep_values[averaged],
            trace.power_db[averaged],
            linestyle="none",
            marker="o",
            markersize=3.0,
            markerfacecolor="none",
            markeredgecolor="C0",
            label="mean of two absorption dips",
        )
        ax.legend(loc="best", fontsize="small")
    ax.set_xlabel(_AXIS_LABEL.get(trace.sweep_param, trace.sweep_param))
    ax.set_ylabel("minimum output power (dB)")
    fig.tight_layout()
    _save(fig, path)


def render_fit(dataset, model_values, path) -> None:
    """Render a fitted spectrum: data as open circles, model as a line."""
    data = np.asarray(dataset.values)
    model = np.asarray(model_values)
    if np.iscomplexobj(data):
        data = np.abs(data) ** 2
        model = np.abs(model) ** 2
        ylabel = "|S|^2"
    else:
        ylabel = "power"
    fig = _new_figure()
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(
        dataset.freqs,
        data,
        linestyle="none",
        marker="o",
        markersize=2.5,
        markerfacecolor="none",
        markeredgecolor="C0",
        label="data",
    )
    ax.plot(dataset.freqs, model, linewidth=1.2, color="C1", label="fit")
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel(ylabel)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    _save(fig, path)
