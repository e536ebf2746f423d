"""Elaboration into a dependency graph plus cone and flip-flop queries."""

from .flatten import FlatDesign, FlatProcess, FlatSignal, flatten, map_expr, map_stmt, self_width
from .graph import (DesignGraph, Edge, FlopInfo, ResetInfo, SignalNode, StructureError, cone, elaborate,
                    flop_properties, graph_from_flat, split_reset)

__all__ = [
    "DesignGraph", "Edge", "FlatDesign", "FlatProcess", "FlatSignal", "FlopInfo", "ResetInfo", "SignalNode",
    "StructureError", "cone", "elaborate", "flatten", "flop_properties", "graph_from_flat", "map_expr",
    "map_stmt", "self_width", "split_reset",
]
