"""SAT-based modulo scheduling of loop data-flow graphs onto CGRA meshes."""

from .driver import MapperOptions, MappingReport, map_loop
from .mapping import Mapping, Placement, Route
from .model import CgraArch, Dfg, DfgEdge, DfgNode, InputError, neighbors, parse_arch, parse_dfg

__version__ = "0.1.0"

__all__ = [
    "CgraArch",
    "Dfg",
    "DfgEdge",
    "DfgNode",
    "InputError",
    "MapperOptions",
    "Mapping",
    "MappingReport",
    "Placement",
    "Route",
    "map_loop",
    "neighbors",
    "parse_arch",
    "parse_dfg",
]
