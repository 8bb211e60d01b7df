"""Recipe-driven figure rendering for nafdyn CSV output."""

from .csvio import Series, SchemaError, read_series, read_sweep
from .recipes import FigureRecipe, load_recipe, recipe_from_dict
from .render import STYLES, plot_series

__all__ = ["Series", "SchemaError", "read_series", "read_sweep",
           "FigureRecipe", "load_recipe", "recipe_from_dict",
           "STYLES", "plot_series"]

__version__ = "0.1.0"
