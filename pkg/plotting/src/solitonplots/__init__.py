"""Figure rendering for solver trajectory CSV files.

This package is deliberately downstream of the solver: it knows nothing
about the equations and consumes only the published CSV column contract.
"""

from .reader import EXPECTED_COLUMNS, SchemaError, read_trajectory
from .render import PLOTTABLE, PlotSpec, build_figure, curve_label, render_profiles

__all__ = [
    "EXPECTED_COLUMNS",
    "PLOTTABLE",
    "PlotSpec",
    "SchemaError",
    "build_figure",
    "curve_label",
    "read_trajectory",
    "render_profiles",
]
