"""Figure rendering for swap-scheduling experiment CSVs."""

from .render import KINDS, FigureError, FigureJob, render

__version__ = "0.1.0"
