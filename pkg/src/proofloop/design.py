"""A parsed design bundled with its derived views (flat netlist, graph, simulator)."""

from __future__ import annotations

from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

from .rtl import ast as A
from .rtl.parser import parse_source

RTL_SUFFIXES = (".sv", ".v")


def collect_rtl_files(paths: Iterable) -> list[Path]:
    """Expand directories into their .sv/.v files (sorted); keep files as given."""
    out: list[Path] = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            out.extend(sorted(f for f in p.rglob("*") if f.suffix in RTL_SUFFIXES and f.is_file()))
        else:
            out.append(p)
    return out


class Design:
    """Immutable after construction; derived views are computed lazily and cached."""

    def __init__(self, unit: A.SourceUnit, top: str, sources: Optional[list] = None):
        if not unit.has_module(top):
            raise KeyError(f"unknown top module '{top}'")
        self.unit = unit
        self.top = top
        self.sources = list(sources or [])

    @classmethod
    def from_sources(cls, texts, top: str) -> "Design":
        texts = list(texts)
        return cls(parse_source(texts), top, texts)

    @classmethod
    def from_paths(cls, paths, top: str) -> "Design":
        files = collect_rtl_files(paths)
        if not files:
            raise FileNotFoundError("no RTL files found")
        texts = [(str(f), f.read_text(encoding="utf-8")) for f in files]
        return cls.from_sources(texts, top)

    @cached_property
    def flat(self):
        from .structure.flatten import flatten

        return flatten(self.unit, self.top)

    @cached_property
    def graph(self):
        from .structure.graph import graph_from_flat

        return graph_from_flat(self.flat)

    @cached_property
    def sim(self):
        from .solver.sim import CompiledDesign, reset_levels

        return CompiledDesign(self.flat, reset_levels(self.flat, self.graph))

    def knowledge_base(self, embedder=None):
        """Chunk and embed the design (not cached: the embedder is a parameter)."""
        from .kb import build_index
        from .rtl.chunks import chunk_design

        return build_index(chunk_design(self.unit), self.top, embedder)

    @property
    def top_module(self) -> A.ModuleDecl:
        return self.unit.module(self.top)

    def unpacked_names(self) -> set:
        return {p for p, s in self.flat.signals.items() if s.is_array}
