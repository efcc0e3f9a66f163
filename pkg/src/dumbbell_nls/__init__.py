"""Standing waves of the cubic NLS equation on a dumbbell graph."""
from .grid import DumbbellGrid, GraphFunction, make_grid, sample

__all__ = ["DumbbellGrid", "GraphFunction", "make_grid", "sample"]
__version__ = "0.1.0"
