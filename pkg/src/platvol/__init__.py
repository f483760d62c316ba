"""SU(2) representation curves of knot groups from plat presentations,
and the canonical 1-volume form on their regular part."""

__version__ = "0.1.0"

from .braids import BraidWord, PlatPresentation, wirtinger_presentation
from .solver import SolverConfig, find_all_at_trace, find_arcs, trace_arc
from .volume import omega_value

__all__ = [
    "BraidWord",
    "PlatPresentation",
    "SolverConfig",
    "find_all_at_trace",
    "find_arcs",
    "omega_value",
    "trace_arc",
    "wirtinger_presentation",
    "__version__",
]
