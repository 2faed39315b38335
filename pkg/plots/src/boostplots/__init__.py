"""Figures from boostsim CSV outputs."""

from .render import METRICS, PlotSpec, SchemaError, render

__version__ = "0.1.0"
