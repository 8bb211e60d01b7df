"""Figure recipes: a YAML description of panels, series, and styling.

Schema:

    title: ...                  # optional figure title
    output: path/to/figure.png
    layout: [rows, cols]        # optional; default single column
    panels:
      - title: ...
        xlabel: ...
        ylabel: ...
        magnitude: false        # plot |value| instead of the real part
        series:
          - csv: path/to/series.csv
            label: NaF-TW
            style: naf-tw       # method style key, or inline mapping
            select: scatter_transmit_1   # required for sweep files
            component: re       # re | im | abs (overrides panel magnitude)

Loading validates that every referenced CSV exists and parses.
"""

import os
from dataclasses import dataclass, field

import yaml

from .csvio import SERIES_MAGIC, SchemaError, read_series, read_sweep

_RECIPE_KEYS = {"title", "output", "layout", "panels"}
_PANEL_KEYS = {"title", "xlabel", "ylabel", "magnitude", "series"}
_SERIES_KEYS = {"csv", "label", "style", "select", "component"}


@dataclass
class SeriesSpec:
    csv: str
    label: str = ""
    style: object = None
    select: str = None
    component: str = None
    data: object = None  # loaded Series


@dataclass
class PanelSpec:
    series: list
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    magnitude: bool = False


@dataclass
class FigureRecipe:
    output: str
    panels: list
    title: str = ""
    layout: tuple = None


def _check_keys(d, allowed, where):
    unknown = set(d) - allowed
    if unknown:
        raise SchemaError(f"unknown keys in {where}: {sorted(unknown)}")


def _load_data(spec):
    try:
        with open(spec.csv) as fh:
            magic = fh.readline().strip()
    except OSError as err:
        raise SchemaError(f"{spec.csv}: cannot open ({err})") from err
    if magic == SERIES_MAGIC:
        return read_series(spec.csv)
    if spec.select is None:
        raise SchemaError(f"{spec.csv}: sweep file needs a 'select' series name")
    return read_sweep(spec.csv, spec.select)


def load_recipe(path):
    """Load a recipe; relative csv/output paths resolve against its folder."""
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return recipe_from_dict(doc, base_dir=os.path.dirname(str(path)))


def _resolve(base_dir, path):
    if base_dir and not os.path.isabs(path):
        return os.path.join(base_dir, path)
    return path


def recipe_from_dict(doc, base_dir=""):
    if not isinstance(doc, dict):
        raise SchemaError("recipe must be a mapping")
    _check_keys(doc, _RECIPE_KEYS, "recipe")
    if "output" not in doc or not doc.get("panels"):
        raise SchemaError("recipe needs 'output' and at least one panel")
    panels = []
    for i, p in enumerate(doc["panels"]):
        _check_keys(p, _PANEL_KEYS, f"panel[{i}]")
        series = []
        for j, s in enumerate(p.get("series") or []):
            _check_keys(s, _SERIES_KEYS, f"panel[{i}].series[{j}]")
            if "csv" not in s:
                raise SchemaError(f"panel[{i}].series[{j}]: missing 'csv'")
            spec = SeriesSpec(csv=_resolve(base_dir, s["csv"]),
                              label=s.get("label", ""),
                              style=s.get("style"), select=s.get("select"),
                              component=s.get("component"))
            spec.data = _load_data(spec)  # existence + parse check up front
            series.append(spec)
        if not series:
            raise SchemaError(f"panel[{i}] has no series")
        panels.append(PanelSpec(series=series, title=p.get("title", ""),
                                xlabel=p.get("xlabel", ""), ylabel=p.get("ylabel", ""),
                                magnitude=bool(p.get("magnitude", False))))
    layout = tuple(doc["layout"]) if doc.get("layout") else None
    return FigureRecipe(output=_resolve(base_dir, doc["output"]), panels=panels,
                        title=doc.get("title", ""), layout=layout)
