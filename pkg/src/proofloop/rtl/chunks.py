"""Decomposition of a parsed design into retrievable chunks."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .unparse import interface_lines, item_lines

KINDS = ("ModuleInterface", "AlwaysBlock", "Instance", "Assign")


@dataclass(frozen=True)
class Chunk:
    kind: str
    owner_module: str
    canonical_text: str
    source_span: A.Span
    chunk_id: str
    signals: frozenset = field(default=frozenset())  # assigned | read names, always blocks only
    name: Optional[str] = None  # instance name for Instance chunks

    @property
    def body_text(self) -> str:
        """Canonical text without the one-line header."""
        return self.canonical_text.split("\n", 1)[1]

    def to_json(self) -> dict:
        sp = self.source_span
        return {
            "chunk_id": self.chunk_id,
            "kind": self.kind,
            "owner_module": self.owner_module,
            "canonical_text": self.canonical_text,
            "source_span": [sp.file, sp.line, sp.col, sp.end_line, sp.end_col],
            "signals": sorted(self.signals),
            "name": self.name,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Chunk":
        return cls(d["kind"], d["owner_module"], d["canonical_text"], A.Span(*d["source_span"]),
                   d["chunk_id"], frozenset(d.get("signals", ())), d.get("name"))


def chunk_id_for(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _make(kind: str, module: str, lines: list[str], span: A.Span, **kw) -> Chunk:
    text = f"{kind} in {module}\n{_dedent(lines)}"
    return Chunk(kind, module, text, span, chunk_id_for(text), **kw)


def _dedent(lines: list[str]) -> str:
    indent = min((len(x) - len(x.lstrip()) for x in lines if x.strip()), default=0)
    return "\n".join(x[indent:] for x in lines)


def module_interface_text(m: A.ModuleDecl) -> list[str]:
    lines = interface_lines(m)
    for p in m.params:
        if not p.in_header:
            lines.extend(item_lines(p, depth=1))
    return lines


def chunk_module(m: A.ModuleDecl) -> list[Chunk]:
    out = [_make("ModuleInterface", m.name, module_interface_text(m), m.span)]
    run: list[A.AssignStmt] = []

    def flush() -> None:
        if run:
            lines = []
            for a in run:
                lines.extend(item_lines(a))
            first, last = run[0].span, run[-1].span
            span = A.Span(first.file, first.line, first.col, last.end_line, last.end_col)
            out.append(_make("Assign", m.name, lines, span))
            run.clear()

    for it in m.items:
        if isinstance(it, A.AssignStmt):
            run.append(it)
        elif isinstance(it, A.AlwaysBlock):
            flush()
            out.append(_make("AlwaysBlock", m.name, item_lines(it), it.span,
                             signals=it.assigned_signals | it.read_signals))
        elif isinstance(it, A.InstanceDecl):
            flush()
            out.append(_make("Instance", m.name, item_lines(it), it.span, name=it.instance_name))
        # declarations do not interrupt a run of assigns
    flush()
    return out


def chunk_design(unit: A.SourceUnit) -> list[Chunk]:
    chunks: list[Chunk] = []
    for m in unit.modules:
        chunks.extend(chunk_module(m))
    return chunks
