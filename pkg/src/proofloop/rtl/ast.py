"""AST node types for the supported SystemVerilog subset.

Nodes are frozen dataclasses. Source spans never take part in equality, so a
design and its pretty-printed form compare equal after re-parsing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int
    end_line: int = 0
    end_col: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NO_SPAN = Span("<none>", 0, 0)


def _span_field():
    return field(default=NO_SPAN, compare=False, repr=False, hash=False)


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Number:
    value: int
    width: Optional[int] = None
    base: Optional[str] = None  # one of b/o/d/h, or None for a plain decimal
    span: Span = _span_field()


@dataclass(frozen=True)
class Ident:
    name: str  # may be dotted ("u0.q") inside assertions
    span: Span = _span_field()


@dataclass(frozen=True)
class Index:
    base: "Expr"
    index: "Expr"
    span: Span = _span_field()


@dataclass(frozen=True)
class Slice:
    base: "Expr"
    msb: "Expr"
    lsb: "Expr"
    span: Span = _span_field()


@dataclass(frozen=True)
class IndexedSlice:
    base: "Expr"
    start: "Expr"
    width: "Expr"
    ascending: bool  # True for +:, False for -:
    span: Span = _span_field()


@dataclass(frozen=True)
class Concat:
    items: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class Repl:
    count: "Expr"
    items: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    span: Span = _span_field()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = _span_field()


@dataclass(frozen=True)
class Cond:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    span: Span = _span_field()


@dataclass(frozen=True)
class Call:
    name: str  # includes the leading "$"
    args: tuple
    span: Span = _span_field()


Expr = Union[Number, Ident, Index, Slice, IndexedSlice, Concat, Repl, Unary, Binary, Cond, Call]


def iter_expr(e: Expr) -> Iterator[Expr]:
    """Pre-order walk over an expression tree."""
    yield e
    if isinstance(e, (Index,)):
        yield from iter_expr(e.base)
        yield from iter_expr(e.index)
    elif isinstance(e, Slice):
        yield from iter_expr(e.base)
        yield from iter_expr(e.msb)
        yield from iter_expr(e.lsb)
    elif isinstance(e, IndexedSlice):
        yield from iter_expr(e.base)
        yield from iter_expr(e.start)
        yield from iter_expr(e.width)
    elif isinstance(e, Concat):
        for it in e.items:
            yield from iter_expr(it)
    elif isinstance(e, Repl):
        yield from iter_expr(e.count)
        for it in e.items:
            yield from iter_expr(it)
    elif isinstance(e, Unary):
        yield from iter_expr(e.operand)
    elif isinstance(e, Binary):
        yield from iter_expr(e.left)
        yield from iter_expr(e.right)
    elif isinstance(e, Cond):
        yield from iter_expr(e.cond)
        yield from iter_expr(e.then)
        yield from iter_expr(e.other)
    elif isinstance(e, Call):
        for a in e.args:
            yield from iter_expr(a)


def expr_names(e: Expr) -> set[str]:
    return {n.name for n in iter_expr(e) if isinstance(n, Ident)}


def lvalue_target_names(e: Expr) -> set[str]:
    """Names written by an assignment target."""
    if isinstance(e, Ident):
        return {e.name}
    if isinstance(e, (Index, Slice, IndexedSlice)):
        return lvalue_target_names(e.base)
    if isinstance(e, Concat):
        out: set[str] = set()
        for it in e.items:
            out |= lvalue_target_names(it)
        return out
    return set()


def lvalue_read_names(e: Expr) -> set[str]:
    """Names read while computing an assignment target (select indices)."""
    if isinstance(e, Ident):
        return set()
    if isinstance(e, Index):
        return lvalue_read_names(e.base) | expr_names(e.index)
    if isinstance(e, Slice):
        return lvalue_read_names(e.base) | expr_names(e.msb) | expr_names(e.lsb)
    if isinstance(e, IndexedSlice):
        return lvalue_read_names(e.base) | expr_names(e.start) | expr_names(e.width)
    if isinstance(e, Concat):
        out: set[str] = set()
        for it in e.items:
            out |= lvalue_read_names(it)
        return out
    return set()


# ---------------------------------------------------------------- statements


@dataclass(frozen=True)
class Assign:
    lhs: Expr
    rhs: Expr
    blocking: bool
    span: Span = _span_field()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    other: Optional["Stmt"] = None
    span: Span = _span_field()


@dataclass(frozen=True)
class CaseItem:
    labels: Optional[tuple]  # None marks the default item
    body: "Stmt"


@dataclass(frozen=True)
class Case:
    subject: Expr
    items: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class Block:
    stmts: tuple
    label: Optional[str] = None
    span: Span = _span_field()


@dataclass(frozen=True)
class NullStmt:
    span: Span = _span_field()


Stmt = Union[Assign, If, Case, Block, NullStmt]


def iter_stmts(s: Stmt) -> Iterator[Stmt]:
    yield s
    if isinstance(s, Block):
        for c in s.stmts:
            yield from iter_stmts(c)
    elif isinstance(s, If):
        yield from iter_stmts(s.then)
        if s.other is not None:
            yield from iter_stmts(s.other)
    elif isinstance(s, Case):
        for item in s.items:
            yield from iter_stmts(item.body)


# ---------------------------------------------------------------- module items


@dataclass(frozen=True)
class Range:
    msb: Expr
    lsb: Expr


@dataclass(frozen=True)
class Port:
    name: str
    direction: str  # in | out | inout
    net_type: Optional[str] = None  # wire | reg | logic | None
    range: Optional[Range] = None
    span: Span = _span_field()


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # parameter | localparam
    default: Expr
    range: Optional[Range] = None
    in_header: bool = False
    span: Span = _span_field()


@dataclass(frozen=True)
class NetDecl:
    name: str
    net_type: str  # wire | reg | logic | integer
    range: Optional[Range] = None
    unpacked: tuple = ()  # tuple of Range
    span: Span = _span_field()


@dataclass(frozen=True)
class AssignStmt:
    lhs: Expr
    rhs: Expr
    span: Span = _span_field()


@dataclass(frozen=True)
class AlwaysBlock:
    keyword: str  # always | always_ff | always_comb
    sensitivity: Optional[tuple]  # tuple of (edge, signal); None means @(*)
    body: Stmt
    span: Span = _span_field()

    @property
    def is_clocked(self) -> bool:
        return self.sensitivity is not None

    @property
    def assigned_signals(self) -> frozenset:
        out: set[str] = set()
        for s in iter_stmts(self.body):
            if isinstance(s, Assign):
                out |= lvalue_target_names(s.lhs)
        return frozenset(out)

    @property
    def read_signals(self) -> frozenset:
        out: set[str] = set()
        for s in iter_stmts(self.body):
            if isinstance(s, Assign):
                out |= expr_names(s.rhs) | lvalue_read_names(s.lhs)
            elif isinstance(s, If):
                out |= expr_names(s.cond)
            elif isinstance(s, Case):
                out |= expr_names(s.subject)
                for item in s.items:
                    for lab in item.labels or ():
                        out |= expr_names(lab)
        return frozenset(out)


@dataclass(frozen=True)
class InstanceDecl:
    instance_name: str
    target_module: str
    connections: tuple  # tuple of (formal or None, Expr or None)
    param_overrides: tuple = ()  # tuple of (name or None, Expr)
    external: bool = field(default=False, compare=False)
    span: Span = _span_field()

    @property
    def connection_map(self) -> dict:
        return {f: e for f, e in self.connections if f is not None}


Item = Union[Param, NetDecl, AssignStmt, AlwaysBlock, InstanceDecl]


@dataclass(frozen=True)
class ModuleDecl:
    name: str
    ports: tuple
    items: tuple
    span: Span = _span_field()

    @property
    def params(self) -> tuple:
        return tuple(i for i in self.items if isinstance(i, Param))

    @property
    def nets(self) -> tuple:
        return tuple(i for i in self.items if isinstance(i, NetDecl))

    @property
    def always_blocks(self) -> tuple:
        return tuple(i for i in self.items if isinstance(i, AlwaysBlock))

    @property
    def instances(self) -> tuple:
        return tuple(i for i in self.items if isinstance(i, InstanceDecl))

    @property
    def assigns(self) -> tuple:
        return tuple(i for i in self.items if isinstance(i, AssignStmt))

    def port(self, name: str) -> Optional[Port]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def declared_names(self) -> dict:
        """Map every declared signal/parameter name to its declaration."""
        out: dict = {}
        for p in self.ports:
            out[p.name] = p
        for it in self.items:
            if isinstance(it, (Param, NetDecl)):
                out[it.name] = it
        return out

    def unpacked_arrays(self) -> dict:
        return {n.name: n for n in self.nets if n.unpacked}


@dataclass(frozen=True)
class SourceUnit:
    modules: tuple
    files: tuple = field(default=(), compare=False)

    def module(self, name: str) -> ModuleDecl:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def has_module(self, name: str) -> bool:
        return any(m.name == name for m in self.modules)

    @property
    def module_names(self) -> list:
        return [m.name for m in self.modules]
