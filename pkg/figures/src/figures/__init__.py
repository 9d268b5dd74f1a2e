"""Paper-style figures rendered from the simulation CLI's CSV outputs.

Pure views over CSV: nothing here re-simulates or recomputes physics
beyond the two horizontal guide constants derived from the run manifest.
"""

__version__ = "0.1.0"

from .plot import FigureSpec, guides_for_column, load_table, plot_series
