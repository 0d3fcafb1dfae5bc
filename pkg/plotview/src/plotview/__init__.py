"""Static rendering of three-measure sweep CSV files."""

from .render import PlotSpec, SchemaError, SweepData, load_sweep, render

__version__ = "0.1.0"
