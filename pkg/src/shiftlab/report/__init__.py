from .scatter import read_scatter, render_er_scatter, write_scatter
from .tables import one_decimal, render_table

__all__ = [
    "read_scatter",
    "render_er_scatter",
    "write_scatter",
    "one_decimal",
    "render_table",
]
