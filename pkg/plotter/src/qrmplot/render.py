"""Heatmap and wavefunction rendering.

Any value transformation (power scaling for contrast) is declared in the
colorbar label, and the only curves drawn on top of data are the declared
dimensionless boundary overlays in g/g_s units.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import read_scan_csv, read_scan_json, read_wave_csv, read_wave_sweep, to_grid
from .spec import PlotSpec

__all__ = ["render_heatmap", "render_wave", "BOUNDARY_OVERLAYS", "apply_scale"]

# dashed reference curves in (lambda, g/g_s) axis units
BOUNDARY_OVERLAYS = {
    "conventional": lambda lam: 2.0 / (1.0 + np.abs(lam)),
    "primary": lambda lam: np.where(
        np.abs(lam) < 1.0, 2.0 / np.sqrt(np.clip(1.0 - lam * lam, 1e-12, None)), np.inf
    ),
}


def apply_scale(values: np.ndarray, kind: str, exponent: float) -> tuple[np.ndarray, str]:
    """Transform values for display; returns (scaled, label suffix)."""
    if kind == "linear":
        return values, ""
    scaled = np.sign(values) * np.abs(values) ** exponent
    return scaled, f"^{exponent:.4g}"


def _load_table(path):
    if str(path).endswith(".json"):
        return read_scan_json(path)
    return read_scan_csv(path)


def _color_limits(z: np.ndarray, symmetric: bool) -> tuple[float, float]:
    finite = z[np.isfinite(z)]
    lo, hi = float(np.min(finite)), float(np.max(finite))
    if symmetric:
        bound = max(abs(lo), abs(hi))
        lo, hi = -bound, bound
    if lo == hi:  # constant input still renders as a uniform panel
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.05
        lo, hi = lo - pad, hi + pad
    return lo, hi


def render_heatmap(spec: PlotSpec) -> str:
    spec.validate()
    table = _load_table(spec.input)
    lam, g, z = to_grid(table, spec.quantity)
    z, suffix = apply_scale(z, spec.scale_kind, spec.exponent)
    lo, hi = _color_limits(z, spec.symmetric)

    fig, ax = plt.subplots(figsize=(5.4, 4.2), layout="constrained")
    mesh = ax.pcolormesh(lam, g, z, cmap=spec.cmap, vmin=lo, vmax=hi, shading="nearest")
    bar = fig.colorbar(mesh, ax=ax)
    bar.set_label(spec.quantity + suffix)

    if spec.overlay:
        dense = np.linspace(lam[0], lam[-1], 801)
        for name, curve in BOUNDARY_OVERLAYS.items():
            values = curve(dense)
            inside = (values >= g[0]) & (values <= g[-1])
            if inside.any():
                ax.plot(
                    dense[inside],
                    values[inside],
                    ls="--",
                    lw=1.1,
                    color="w" if spec.cmap != "RdBu_r" else "k",
                    label=name,
                )
        ax.legend(loc="upper right", fontsize=7, framealpha=0.4)

    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$g/g_s$")
    omega = table.metadata.get("omega")
    title = spec.title or spec.quantity
    if omega is not None:
        title += rf"  ($\omega={omega}$)"
    ax.set_title(title)
    fig.savefig(spec.output, dpi=160)
    plt.close(fig)
    return spec.output


def render_wave(spec: PlotSpec) -> str:
    """Single wave file: overlaid component line plot.  Directory or glob:
    lambda-x color map of the selected component, power-scaled so the
    zero lines show as the diverging colormap's white center."""
    spec.validate()
    try:
        waves = [read_wave_csv(spec.input)]
        sweep = False
    except (IsADirectoryError, ValueError, OSError):
        waves = read_wave_sweep(spec.input)
        sweep = len(waves) > 1

    if not sweep and len(waves) == 1:
        wave = waves[0]
        fig, ax = plt.subplots(figsize=(5.4, 3.4), layout="constrained")
        ax.plot(wave.x, wave.psi_plus, label=r"$\psi_+$")
        ax.plot(wave.x, wave.psi_minus, label=r"$\psi_-$")
        ax.axhline(0.0, color="0.8", lw=0.6)
        ax.set_xlabel("x")
        ax.set_ylabel(r"$\psi$")
        lam = wave.metadata.get("lambda")
        ax.set_title(spec.title or (rf"$\lambda={lam}$" if lam is not None else "wave"))
        ax.legend()
        fig.savefig(spec.output, dpi=160)
        plt.close(fig)
        return spec.output

    lams = np.array([w.metadata.get("lambda", math.nan) for w in waves])
    x = waves[0].x
    for w in waves[1:]:
        if len(w.x) != len(x):
            raise ValueError("wave sweep files must share one grid")
    comp = np.stack(
        [w.psi_minus if spec.component == "psi_minus" else w.psi_plus for w in waves]
    )
    z, suffix = apply_scale(comp, spec.scale_kind, spec.exponent)
    bound = float(np.max(np.abs(z)))

    fig, ax = plt.subplots(figsize=(5.4, 4.2), layout="constrained")
    mesh = ax.pcolormesh(x, lams, z, cmap=spec.cmap, vmin=-bound, vmax=bound, shading="nearest")
    bar = fig.colorbar(mesh, ax=ax)
    bar.set_label(spec.component + suffix)
    ax.set_xlabel("x")
    ax.set_ylabel(r"$\lambda$")
    ax.set_title(spec.title or spec.component)
    fig.savefig(spec.output, dpi=160)
    plt.close(fig)
    return spec.output
