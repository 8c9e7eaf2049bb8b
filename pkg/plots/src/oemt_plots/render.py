"""Figure rendering for result bundles.

Every renderer works purely from the CSV tables and JSON sidecars of one
bundle directory; nothing is recomputed from model parameters and the bundle
is never written to. Repeated renders of the same bundle produce
byte-identical image files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

# Stable glyph ids and searchable text keep SVG output reproducible.
matplotlib.rcParams["svg.hashsalt"] = "oemt-plots"
matplotlib.rcParams["svg.fonttype"] = "none"

from matplotlib.figure import Figure

from .bundle import Bundle, PlotError, Table

_LINESTYLES = {"solid": "-", "dashed": "--", "dotted": ":", "dashdot": "-."}


@dataclass(frozen=True)
class PlotJob:
    """One figure request: a bundle, a plot kind, and style options."""

    bundle: str | Path
    kind: str
    out: str | Path
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    logx: str = "auto"
    logy: bool = False


def _style(name: str) -> str:
    return _LINESTYLES.get(name, "-")


def _log_friendly(values) -> bool:
    finite = [v for v in values if isinstance(v, (int, float)) and math.isfinite(v)]
    if not finite or min(finite) <= 0.0:
        return False
    return max(finite) / min(finite) > 30.0


def _legend_if_labeled(ax) -> None:
    handles, labels = ax.get_legend_handles_labels()
    if any(labels):
        ax.legend(loc="best", frameon=False)


# -- sweep-table helpers ----------------------------------------------------


def _sweep_groups(table: Table) -> tuple[list[str], list[tuple], dict]:
    """Regroup the long-format sweep rows.

    Returns the variant names in first-appearance order, the group keys
    (variant, axis values) in row order, and a mapping from group key to its
    {metric: value} dictionary.
    """
    axes = table.sidecar.get("axes", [])
    for needed in axes + ["metric", "value"]:
        table.column(needed)
    has_variant = table.has_column("variant")
    variants: list[str] = []
    order: list[tuple] = []
    groups: dict[tuple, dict] = {}
    idx = {name: table.columns.index(name) for name in table.columns}
    for row in table.rows:
        vname = row[idx["variant"]] if has_variant else ""
        key = (vname, tuple(row[idx[a]] for a in axes))
        if vname not in variants:
            variants.append(vname)
        if key not in groups:
            groups[key] = {}
            order.append(key)
        groups[key][row[idx["metric"]]] = row[idx["value"]]
    return variants, order, groups


def _require_metric(table: Table, metric: str) -> None:
    available = sorted({row[table.columns.index("metric")] for row in table.rows})
    if metric not in available:
        raise PlotError(
            f"sweep table '{table.name}' has no metric '{metric}'; "
            f"available metrics: {', '.join(available)}"
        )


def _variant_styles(table: Table) -> dict:
    return {
        entry.get("name", ""): entry.get("style", "solid")
        for entry in table.sidecar.get("variants", [])
    }


def _metric_series(order, groups, variant: str, metric: str):
    return [
        groups[key][metric]
        for key in order
        if key[0] == variant and metric in groups[key]
    ]


# -- renderers ---------------------------------------------------------------


def _spectrum_tables(bundle: Bundle, kind: str, expect: str) -> list[Table]:
    tables = bundle.require_tables("spectrum", kind)
    for table in tables:
        found = table.sidecar.get("kind")
        if found and found != expect:
            raise PlotError(
                f"kind '{kind}' expects a '{expect}' spectrum but table "
                f"'{table.name}' holds a '{found}' spectrum"
            )
    return tables


def _plot_conversion(ax, tables) -> None:
    for table in tables:
        ax.plot(
            table.column("omega"),
            table.column("t31_abs"),
            linestyle=_style(table.sidecar.get("style", "solid")),
            label=table.sidecar.get("variant", ""),
        )
    ax.set_xlabel("frequency offset from resonance")
    ax.set_ylabel("conversion amplitude |T31|")
    ax.set_ylim(bottom=0.0)
    _legend_if_labeled(ax)


def _render_conversion_spectrum(bundle: Bundle, fig: Figure):
    ax = fig.add_subplot(111)
    _plot_conversion(ax, _spectrum_tables(bundle, "conversion_spectrum", "conversion"))
    return ax, False


def _render_probe_spectrum(bundle: Bundle, fig: Figure):
    ax = fig.add_subplot(111)
    tables = _spectrum_tables(bundle, "probe_spectrum", "probe")
    for table in tables:
        ax.plot(
            table.column("omega"),
            table.column("power"),
            linestyle=_style(table.sidecar.get("style", "solid")),
            label=table.sidecar.get("variant", ""),
        )
        for entry in table.sidecar.get("metrics", {}).get("minima", []):
            # sidecar stores (omega, power) pairs for each local minimum
            ax.axvline(entry[0], color="0.6", linestyle=":", linewidth=0.8)
    ax.set_xlabel("probe detuning from cavity resonance")
    ax.set_ylabel("probe output power")
    _legend_if_labeled(ax)
    return ax, False


def _render_fidelity_vs_temperature(bundle: Bundle, fig: Figure):
    table = bundle.require_tables("sweep", "fidelity_vs_T")[0]
    _require_metric(table, "fidelity")
    _require_metric(table, "bath_temperature")
    variants, order, groups = _sweep_groups(table)
    styles = _variant_styles(table)
    ax = fig.add_subplot(111)
    temps: list[float] = []
    for vname in variants:
        x = _metric_series(order, groups, vname, "bath_temperature")
        y = _metric_series(order, groups, vname, "fidelity")
        temps.extend(x)
        ax.plot(x, y, linestyle=_style(styles.get(vname, "solid")), label=vname)
    ax.set_xlabel("bath temperature")
    ax.set_ylabel("state-transfer fidelity")
    _legend_if_labeled(ax)

    if "t_eff_after_precool" in table.sidecar.get("metrics", []):
        # variants without precooling carry NaN here; draw only real readings
        twin = ax.twinx()
        teff_all: list[float] = []
        for vname in variants:
            x = _metric_series(order, groups, vname, "bath_temperature")
            y = _metric_series(order, groups, vname, "t_eff_after_precool")
            finite = [v for v in y
                      if isinstance(v, (int, float)) and math.isfinite(v)]
            if finite:
                twin.plot(x, y, linestyle="-.", color="0.35")
                teff_all.extend(finite)
        twin.set_ylabel("effective temperature after precooling (dash-dot)")
        if _log_friendly(teff_all):
            twin.set_yscale("log")
    return ax, _log_friendly(temps)


def _render_entanglement_sweep(bundle: Bundle, fig: Figure):
    table = bundle.require_tables("sweep", "entanglement_sweep")[0]
    _require_metric(table, "log_negativity_cavities")
    axes = table.sidecar.get("axes", [])
    if not axes:
        raise PlotError(
            "entanglement_sweep needs at least one sweep axis; "
            "this bundle swept none"
        )
    variants, order, groups = _sweep_groups(table)
    styles = _variant_styles(table)
    ax = fig.add_subplot(111)
    xs: list[float] = []
    for vname in variants:
        keys = [key for key in order if key[0] == vname]
        x = [key[1][0] for key in keys]
        y = [groups[key]["log_negativity_cavities"] for key in keys]
        xs.extend(x)
        ax.plot(x, y, linestyle=_style(styles.get(vname, "solid")), label=vname)
    ax.set_xlabel(axes[0])
    ax.set_ylabel("logarithmic negativity")
    ax.set_ylim(bottom=0.0)
    _legend_if_labeled(ax)
    return ax, _log_friendly(xs)


def _render_pulse_io(bundle: Bundle, fig: Figure):
    tables = bundle.require_tables("fields", "pulse_io")
    spectra = bundle.tables("spectrum")
    ax = fig.add_subplot(1, 2, 1) if spectra else fig.add_subplot(111)
    for table in tables:
        t = table.column("t")
        style = _style(table.sidecar.get("style", "solid"))
        variant = table.sidecar.get("variant", "")
        ins = [c for c in table.columns if c.startswith("in_") and c.endswith("_power")]
        outs = [c for c in table.columns if c.startswith("out_") and c.endswith("_power")]
        peak = max(
            (math.sqrt(max(table.column(c))) for c in ins if table.column(c)),
            default=0.0,
        )
        norm = peak if peak > 0.0 else 1.0
        for col in ins:
            amp = [math.sqrt(v) / norm for v in table.column(col)]
            label = f"{variant} input".strip()
            ax.plot(t, amp, linestyle=style, color="0.6", linewidth=1.0, label=label)
        for col in outs:
            amp = [math.sqrt(v) / norm for v in table.column(col)]
            label = f"{variant} output".strip()
            ax.plot(t, amp, linestyle=style, label=label)
    ax.set_xlabel("time")
    ax.set_ylabel("field amplitude / peak input amplitude")
    ax.set_ylim(bottom=0.0)
    _legend_if_labeled(ax)
    if spectra:
        _plot_conversion(fig.add_subplot(1, 2, 2), spectra)
        fig.set_size_inches(9.6, 4.0)
    return ax, False


KINDS = {
    "conversion_spectrum": _render_conversion_spectrum,
    "entanglement_sweep": _render_entanglement_sweep,
    "fidelity_vs_T": _render_fidelity_vs_temperature,
    "probe_spectrum": _render_probe_spectrum,
    "pulse_io": _render_pulse_io,
}

_SAVE = {
    ".png": {"format": "png"},
    ".svg": {"format": "svg", "metadata": {"Date": None}},
}


def render(job: PlotJob) -> Path:
    """Render one figure and return the written image path."""
    if job.kind not in KINDS:
        raise PlotError(
            f"unknown plot kind '{job.kind}'; "
            f"available kinds: {', '.join(sorted(KINDS))}"
        )
    out = Path(job.out)
    if out.suffix not in _SAVE:
        raise PlotError(
            f"unsupported image format '{out.suffix}'; "
            f"supported: {', '.join(sorted(_SAVE))}"
        )
    bundle = Bundle(job.bundle)
    if out.resolve().is_relative_to(bundle.root.resolve()):
        raise PlotError("output path must lie outside the bundle directory")

    # plain Figure, never registered with pyplot, so it is freed on return
    fig = Figure(figsize=(6.4, 4.8), dpi=150)
    ax, logx_default = KINDS[job.kind](bundle, fig)
    if job.logx == "on" or (job.logx == "auto" and logx_default):
        ax.set_xscale("log")
    if job.logy:
        ax.set_yscale("log")
    if job.title is not None:
        ax.set_title(job.title)
    if job.xlabel is not None:
        ax.set_xlabel(job.xlabel)
    if job.ylabel is not None:
        ax.set_ylabel(job.ylabel)
    fig.tight_layout()
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150, **_SAVE[out.suffix])
    return out
