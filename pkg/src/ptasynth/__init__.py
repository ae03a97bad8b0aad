"""Parameter synthesis for networks of parametric timed automata.

The inverse method (:func:`im`) generalises a reference parameter valuation
into a constraint preserving the trace set; the behavioral cartography
(:func:`bc`) covers a parameter rectangle with such tiles.
"""

from .cartography import ActionPrecedes, ForbiddenLocations, Tile, Tiling, bc, classify, coverage_stats, covered
from .errors import EmptyInitialState, IncompatibleInitialState, LimitReached, PtaError, UsageError
from .inverse_method import IMResult, im, select_incompatible
from .linarith import LinearInequality, Polyhedron, Relation, VariableRegistry, negate_inequality
from .model import Network, RectangleV0, instantiate, validate
from .parser import ParseError, parse_constraint, parse_model, parse_pi0, parse_v0
from .reachability import StateSpace, SymbolicState, TraceSet, initial_state, reachable, successors, trace_set

__version__ = "0.1.0"

__all__ = [
    "ActionPrecedes", "EmptyInitialState", "ForbiddenLocations", "IMResult", "IncompatibleInitialState",
    "LimitReached", "LinearInequality", "Network", "ParseError", "Polyhedron", "PtaError", "RectangleV0",
    "Relation", "StateSpace", "SymbolicState", "Tile", "Tiling", "TraceSet", "UsageError", "VariableRegistry",
    "bc", "classify", "coverage_stats", "covered", "im", "initial_state", "instantiate", "negate_inequality",
    "parse_constraint", "parse_model", "parse_pi0", "parse_v0", "reachable", "select_incompatible",
    "successors", "trace_set", "validate",
]
