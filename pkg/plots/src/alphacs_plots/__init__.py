"""Figure rendering for benchmark and localization results CSVs."""

from .render import FigureSpec, RenderResult, group_means, read_table, render

__version__ = "0.1.0"
