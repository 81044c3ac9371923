"""Figure rendering for jamroute harness outputs."""

from .figures import (
    FIGURE_KINDS,
    FigureSpec,
    SchemaError,
    dbm_axis,
    discover,
    render,
    render_all,
    to_dbm,
)

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS", "FigureSpec", "SchemaError", "dbm_axis", "discover",
    "render", "render_all", "to_dbm", "__version__",
]
