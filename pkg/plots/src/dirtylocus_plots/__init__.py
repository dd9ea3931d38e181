"""Figure rendering for dirtylocus analysis outputs."""

__version__ = "0.1.0"

from .io import AnalysisFile, PlotJob, SchemaError, read_analysis_file, validate_for_kind
from .render import (
    render_locus,
    render_nyquist,
    render_sensitivity,
    render_sweep,
    save_figure,
)

__all__ = [
    "__version__",
    "AnalysisFile",
    "PlotJob",
    "SchemaError",
    "read_analysis_file",
    "validate_for_kind",
    "render_sweep",
    "render_nyquist",
    "render_sensitivity",
    "render_locus",
    "save_figure",
]
