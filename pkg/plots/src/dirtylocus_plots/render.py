"""Figure rendering for dirtylocus analysis files.

Each render function takes parsed analysis files and returns a matplotlib
Figure; the CLI saves it to disk.  Rendering is read-only and
deterministic: identical inputs produce identical plotted data.  Every
figure carries the config digest of its first input in a footer caption.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .io import AnalysisFile, SchemaError, validate_for_kind

_TRACKED_COLOR = "tab:blue"
_PARASITIC_COLOR = "tab:red"


def _caption(fig, files: list[AnalysisFile]) -> None:
    digest = files[0].digest
    fig.text(0.01, 0.005, f"source {digest}", fontsize=6, color="0.4")


def render_sweep(files: list[AnalysisFile]):
    """Complex-plane root trajectories: tracked solid, parasitic dashed,
    tau=0 ancestors starred, imaginary axis drawn."""
    if len(files) != 1:
        raise SchemaError("sweep figures take exactly one input file")
    data = files[0]
    validate_for_kind(data, "sweep")
    fig, ax = plt.subplots(figsize=(7, 6))
    paths: dict[str, list[dict]] = {}
    for row in data.rows:
        paths.setdefault(row["path_id"], []).append(row)
    for path_id in sorted(paths):
        rows = sorted(paths[path_id], key=lambda r: float(r["tau"]))
        re = [float(r["re"]) for r in rows]
        im = [float(r["im"]) for r in rows]
        taus = [float(r["tau"]) for r in rows]
        parasitic = rows[0]["family"] == "parasitic"
        color = _PARASITIC_COLOR if parasitic else _TRACKED_COLOR
        style = "--" if parasitic else "-"
        ax.plot(re, im, style, color=color, linewidth=1.0, alpha=0.7, label=path_id)
        ax.scatter(re, im, c=taus, cmap="viridis", s=12, zorder=3)
        if not parasitic and taus[0] == 0.0:
            ax.plot(re[0], im[0], "*", color="black", markersize=12, zorder=4)
    ax.axvline(0.0, color="0.3", linewidth=0.8)
    ax.set_xlabel("Re s")
    ax.set_ylabel("Im s")
    ax.set_title("closed-loop root paths over tau")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    _caption(fig, files)
    return fig


def render_nyquist(files: list[AnalysisFile]):
    """H(j*omega) curve with the origin marked; annotates the winding
    number when the input carries the JSON trailer."""
    if len(files) != 1:
        raise SchemaError("nyquist figures take exactly one input file")
    data = files[0]
    validate_for_kind(data, "nyquist")
    fig, ax = plt.subplots(figsize=(7, 6))
    re = data.column("H_re")
    im = data.column("H_im")
    ax.plot(re, im, "-", color=_TRACKED_COLOR, linewidth=1.0)
    ax.plot(0.0, 0.0, "+", color="red", markersize=14, markeredgewidth=2)
    if data.trailer is not None and "winding" in data.trailer:
        ax.annotate(
            f"winding {data.trailer['winding']}",
            xy=(0.02, 0.96),
            xycoords="axes fraction",
            fontsize=11,
            fontweight="bold",
        )
    ax.set_xlabel("Re H")
    ax.set_ylabel("Im H")
    tau = data.manifest.get("settings", {}).get("tau", "?")
    ax.set_title(f"Nyquist curve of H at tau = {tau}")
    ax.grid(True, alpha=0.3)
    _caption(fig, files)
    return fig


def render_sensitivity(files: list[AnalysisFile]):
    """Semilog-omega panel of the log-magnitude sensitivity; several
    inputs overlay, asymptote guides come from the manifest."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for data in files:
        validate_for_kind(data, "sensitivity")
        pairs = sorted(
            (
                (float(r["omega"]), float(r["sensitivity"]))
                for r in data.rows
                if float(r["omega"]) > 0
            ),
        )
        if not pairs:
            raise SchemaError(f"{data.path}: no positive-omega rows to plot")
        tau = data.manifest.get("settings", {}).get("tau", "?")
        ax.semilogx(
            [w for w, _ in pairs],
            [v for _, v in pairs],
            "-",
            linewidth=1.2,
            label=f"tau = {tau}",
        )
        asym = data.manifest.get("asymptotes")
        if asym:
            for key, style in (("small_s", ":"), ("large_s", "--")):
                value = complex(*asym[key])
                ax.axhline(
                    abs(value),
                    linestyle=style,
                    color="0.5",
                    linewidth=0.8,
                    label=f"|{key}| = {abs(value):.3g}",
                )
    ax.set_xlabel("omega (rad/s)")
    ax.set_ylabel("d/dtau log ||H||^2")
    ax.set_title("log-magnitude sensitivity to the filter time constant")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _caption(fig, files)
    return fig


def render_locus(files: list[AnalysisFile]):
    """Complex-plane level-set trace colored by tau."""
    if len(files) != 1:
        raise SchemaError("locus figures take exactly one input file")
    data = files[0]
    validate_for_kind(data, "locus")
    fig, ax = plt.subplots(figsize=(7, 6))
    re = data.column("re")
    im = data.column("im")
    taus = data.column("tau")
    ax.plot(re, im, "-", color="0.6", linewidth=0.8)
    pts = ax.scatter(re, im, c=taus, cmap="viridis", s=16, zorder=3)
    fig.colorbar(pts, ax=ax, label="tau")
    ax.plot(re[0], im[0], "*", color="black", markersize=12, zorder=4)
    ax.plot(re[-1], im[-1], "s", color="black", markersize=6, zorder=4)
    ax.axvline(0.0, color="0.3", linewidth=0.8)
    status = next((s for s in data.status_lines if s.startswith("status=")), "")
    ax.set_title(f"level-set trace ({status or 'no status line'})")
    ax.set_xlabel("Re s")
    ax.set_ylabel("Im s")
    ax.grid(True, alpha=0.3)
    _caption(fig, files)
    return fig


RENDERERS = {
    "sweep": render_sweep,
    "nyquist": render_nyquist,
    "sensitivity": render_sensitivity,
    "locus": render_locus,
}


def render_job(kind: str, files: list[AnalysisFile]):
    try:
        renderer = RENDERERS[kind]
    except KeyError:
        raise SchemaError(f"unknown figure kind {kind!r}") from None
    return renderer(files)


def save_figure(fig, out_path: str, dpi: int = 150) -> None:
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)
