"""Render phase-diagram heatmaps and wavefunction plots from rabiscan scan
exports.  Strictly read-only over its inputs: all physics lives in the CSV."""

from .io import ScanTable, read_scan_csv, read_scan_json, read_wave_csv, read_wave_sweep, to_grid
from .spec import PlotSpec, available_presets, spec_from_file, spec_from_preset
from .render import render_heatmap, render_wave, BOUNDARY_OVERLAYS

__version__ = "0.1.0"
