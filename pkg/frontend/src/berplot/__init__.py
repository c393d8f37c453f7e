"""BER-curve plotting for onebit-mimo result CSVs."""

from .plot import DEFAULT_FLOOR, PlotSpec, build_figure, render_ber_curves
from .reader import BerPoint, MalformedCsvError, group_series, read_ber_points

__version__ = "0.1.0"
