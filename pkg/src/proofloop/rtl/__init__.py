"""SystemVerilog subset frontend: parsing, chunking, parameters, hierarchy."""

from .ast import SourceUnit, ModuleDecl, AlwaysBlock, InstanceDecl
from .chunks import Chunk, chunk_design
from .diagnostics import Diagnostic, RTLError, UnsupportedConstruct
from .elab import HierarchyError, ParameterError, hierarchy_tree, resolve_parameters
from .parser import parse_expression, parse_files, parse_source
from .unparse import unparse

__all__ = [
    "SourceUnit", "ModuleDecl", "AlwaysBlock", "InstanceDecl", "Chunk", "chunk_design",
    "Diagnostic", "RTLError", "UnsupportedConstruct", "HierarchyError", "ParameterError",
    "hierarchy_tree", "resolve_parameters", "parse_expression", "parse_files", "parse_source",
    "unparse",
]
