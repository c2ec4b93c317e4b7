"""Declarative plot descriptions.

Every figure's styling (quantity, color scale, overlays) lives in the
committed styles.json so a figure is reproducible from a scan CSV alone;
a PlotSpec is that entry plus input/output paths.
"""

import json
from dataclasses import dataclass
from importlib import resources

__all__ = ["PlotSpec", "available_presets", "spec_from_preset", "spec_from_file", "load_styles"]


@dataclass(frozen=True)
class PlotSpec:
    input: str
    output: str
    kind: str = "heatmap"  # "heatmap" | "wave"
    quantity: str = "gap"
    scale_kind: str = "linear"  # "linear" | "power"
    exponent: float = 1.0
    overlay: bool = False
    cmap: str = "viridis"
    symmetric: bool = False
    component: str = "psi_minus"
    title: str = ""

    def validate(self) -> None:
        if self.kind not in ("heatmap", "wave"):
            raise ValueError(f"unknown plot kind {self.kind!r}")
        if self.scale_kind not in ("linear", "power"):
            raise ValueError(f"unknown scale {self.scale_kind!r}")
        if self.scale_kind == "power" and not 0.0 < self.exponent <= 1.0:
            raise ValueError(f"power exponent must be in (0, 1], got {self.exponent}")


def load_styles() -> dict:
    with resources.files("qrmplot").joinpath("styles.json").open() as fh:
        return json.load(fh)


def available_presets() -> list[str]:
    return sorted(load_styles())


def _from_mapping(entry: dict, input_path: str, output_path: str, title: str) -> PlotSpec:
    scale = entry.get("scale", {"kind": "linear"})
    spec = PlotSpec(
        input=input_path,
        output=output_path,
        kind=entry.get("kind", "heatmap"),
        quantity=entry.get("quantity", "gap"),
        scale_kind=scale.get("kind", "linear"),
        exponent=float(scale.get("exponent", 1.0)),
        overlay=bool(entry.get("overlay", False)),
        cmap=entry.get("cmap", "viridis"),
        symmetric=bool(entry.get("symmetric", False)),
        component=entry.get("component", "psi_minus"),
        title=title,
    )
    spec.validate()
    return spec


def spec_from_preset(name: str, input_path: str, output_path: str) -> PlotSpec:
    styles = load_styles()
    if name not in styles:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(sorted(styles))}")
    return _from_mapping(styles[name], input_path, output_path, title=name)


def spec_from_file(path: str) -> PlotSpec:
    with open(path) as fh:
        entry = json.load(fh)
    input_path = entry.pop("input")
    output_path = entry.pop("output")
    return _from_mapping(entry, input_path, output_path, title=entry.get("title", ""))
