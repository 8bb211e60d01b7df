"""Recipe rendering.  Undefined points stay NaN so matplotlib breaks the
line there -- gaps are drawn as gaps, never interpolated."""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .recipes import FigureRecipe, load_recipe

# line conventions for method comparisons (overridable per series)
STYLES = {
    "exact": {"color": "black", "linestyle": "none", "marker": "o", "markersize": 3},
    "dvr": {"color": "black", "linestyle": "none", "marker": "o", "markersize": 3},
    "ehrenfest": {"color": "cyan", "linestyle": (0, (6, 3))},
    "fssh": {"color": "orange", "linestyle": (0, (2, 2))},
    "naf": {"color": "green", "linestyle": "-"},
    "sqc-tw": {"color": "purple", "linestyle": "-"},
    "naf-tw": {"color": "red", "linestyle": "-"},
    "naf-tw2": {"color": "blue", "linestyle": "-", "marker": "s",
                "markevery": 5, "markerfacecolor": "none"},
    "sqc-tw2": {"color": "red", "linestyle": (0, (5, 2))},
}


def _style_for(spec):
    if isinstance(spec.style, dict):
        return dict(spec.style)
    if spec.style in STYLES:
        return dict(STYLES[spec.style])
    return {}


def _component(spec, panel, values):
    comp = spec.component or ("abs" if panel.magnitude else "re")
    if comp == "re":
        return values.real
    if comp == "im":
        return values.imag
    if comp == "abs":
        out = np.abs(values)
        out[np.isnan(values.real)] = np.nan  # keep gaps as gaps
        return out
    raise ValueError(f"unknown component {comp!r}")


def plot_series(recipe, dpi=150):
    """Render a FigureRecipe (or a path to one) and write its output file."""
    if not isinstance(recipe, FigureRecipe):
        recipe = load_recipe(recipe)
    n = len(recipe.panels)
    rows, cols = recipe.layout if recipe.layout else (n, 1)
    if rows * cols < n:
        raise ValueError(f"layout {rows}x{cols} cannot hold {n} panels")
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.0 * rows),
                             squeeze=False)
    flat = axes.ravel()
    for ax in flat[n:]:
        ax.set_axis_off()
    for ax, panel in zip(flat, recipe.panels):
        for spec in panel.series:
            y = _component(spec, panel, spec.data.values)
            ax.plot(spec.data.x, y, label=spec.label or None, **_style_for(spec))
        ax.set_title(panel.title)
        ax.set_xlabel(panel.xlabel)
        ax.set_ylabel(panel.ylabel)
        if any(s.label for s in panel.series):
            ax.legend(fontsize=8)
    if recipe.title:
        fig.suptitle(recipe.title)
    fig.tight_layout()
    out_dir = os.path.dirname(recipe.output)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    fig.savefig(recipe.output, dpi=dpi, metadata=_fixed_metadata(recipe.output))
    plt.close(fig)
    return recipe.output


def _fixed_metadata(path):
    # pinned metadata so identical inputs give identical bytes
    if path.endswith(".png"):
        return {"Software": "plotkit"}
    if path.endswith(".svg"):
        return {"Date": None, "Creator": "plotkit"}
    return None
