"""Word-level signal dependency graph, cones and flip-flop inspection."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from ..rtl import ast as A
from ..rtl.elab import ParameterError, const_eval
from ..rtl.unparse import expr_str
from .flatten import FlatDesign, flatten


class StructureError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


@dataclass(frozen=True)
class SignalNode:
    name: str  # leaf name
    path: str  # dotted path relative to the top
    width: int
    kind: str  # input | output | wire | reg

    def to_json(self) -> dict:
        return {"name": self.name, "path": self.path, "width": self.width, "kind": self.kind}


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    origin: str  # assign | always | port-connection


@dataclass(frozen=True)
class ResetInfo:
    signal: str
    polarity: str  # active-high | active-low
    kind: str  # sync | async
    value: int

    def to_json(self) -> dict:
        return {"signal": self.signal, "polarity": self.polarity, "kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class FlopInfo:
    reg: str
    clock: str
    clock_edge: str  # pos | neg
    reset: Optional[ResetInfo]
    data_input: str

    def to_json(self) -> dict:
        return {"reg": self.reg, "clock": {"signal": self.clock, "edge": self.clock_edge},
                "reset": None if self.reset is None else self.reset.to_json(),
                "data_input": self.data_input}


@dataclass
class DesignGraph:
    top: str
    nodes: dict = field(default_factory=dict)  # path -> SignalNode
    edges: set = field(default_factory=set)  # Edge
    flops: dict = field(default_factory=dict)  # path -> FlopInfo
    flop_errors: dict = field(default_factory=dict)  # path -> StructureError
    warnings: list = field(default_factory=list)
    flat: Optional[FlatDesign] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self._succ: dict = {}
        self._pred: dict = {}

    def add_edge(self, src: str, dst: str, origin: str) -> None:
        e = Edge(src, dst, origin)
        if e not in self.edges:
            self.edges.add(e)
            self._succ.setdefault(src, set()).add(dst)
            self._pred.setdefault(dst, set()).add(src)

    def successors(self, path: str) -> set:
        return self._succ.get(path, set())

    def predecessors(self, path: str) -> set:
        return self._pred.get(path, set())

    def lookup(self, signal: str) -> str:
        """Resolve a path, or a leaf name when it is unique in the hierarchy."""
        if signal in self.nodes:
            return signal
        hits = sorted(p for p, n in self.nodes.items() if n.name == signal)
        if len(hits) == 1:
            return hits[0]
        if hits:
            raise StructureError("ambiguous_signal", f"'{signal}' matches several signals: {hits}")
        raise StructureError("unknown_signal", f"no signal named '{signal}'")

    def to_json(self) -> dict:
        return {
            "top": self.top,
            "nodes": [self.nodes[p].to_json() for p in sorted(self.nodes)],
            "edges": [{"src": e.src, "dst": e.dst, "origin": e.origin}
                      for e in sorted(self.edges, key=lambda e: (e.src, e.dst, e.origin))],
            "flops": [self.flops[p].to_json() for p in sorted(self.flops)],
            "flop_errors": {p: str(self.flop_errors[p]) for p in sorted(self.flop_errors)},
        }


# condition reads: a guarded assignment depends on everything its guards read

def _assignments(stmt: A.Stmt, guards: frozenset):
    if isinstance(stmt, A.Assign):
        yield stmt, guards
    elif isinstance(stmt, A.If):
        g = guards | A.expr_names(stmt.cond)
        yield from _assignments(stmt.then, g)
        if stmt.other is not None:
            yield from _assignments(stmt.other, g)
    elif isinstance(stmt, A.Case):
        g = set(guards) | A.expr_names(stmt.subject)
        for it in stmt.items:
            for lab in it.labels or ():
                g |= A.expr_names(lab)
        g = frozenset(g)
        for it in stmt.items:
            yield from _assignments(it.body, g)
    elif isinstance(stmt, A.Block):
        for s in stmt.stmts:
            yield from _assignments(s, guards)


def _leaf(path: str) -> str:
    return path.rsplit(".", 1)[-1]


def elaborate(unit: A.SourceUnit, top: str) -> DesignGraph:
    flat = flatten(unit, top)
    return graph_from_flat(flat)


def graph_from_flat(flat: FlatDesign) -> DesignGraph:
    g = DesignGraph(flat.top, flat=flat)
    g.warnings = list(flat.warnings)
    for sig in flat.signals.values():
        g.nodes[sig.path] = SignalNode(_leaf(sig.path), sig.path, sig.width, sig.kind)
    for p in flat.processes:
        if p.kind in ("assign", "port"):
            origin = "assign" if p.kind == "assign" else "port-connection"
            reads = A.expr_names(p.rhs) | A.lvalue_read_names(p.lhs)
            for dst in A.lvalue_target_names(p.lhs):
                for src in reads:
                    g.add_edge(src, dst, origin)
        else:
            for asg, guards in _assignments(p.body, frozenset()):
                reads = A.expr_names(asg.rhs) | A.lvalue_read_names(asg.lhs) | guards
                for dst in A.lvalue_target_names(asg.lhs):
                    for src in reads:
                        g.add_edge(src, dst, "always")
    _classify_flops(g, flat)
    return g


def cone(graph: DesignGraph, signal: str, direction: str = "fanin", depth: Optional[int] = None) -> list[str]:
    """Transitive fan-in or fan-out of ``signal``, sorted, seed excluded."""
    if direction not in ("fanin", "fanout"):
        raise StructureError("bad_direction", f"direction must be fanin or fanout, not '{direction}'")
    if depth is not None and depth < 0:
        raise StructureError("bad_depth", "depth must be non-negative")
    seed = graph.lookup(signal)
    step = graph.predecessors if direction == "fanin" else graph.successors
    seen = {seed}
    found = set()
    frontier = deque([(seed, 0)])
    while frontier:
        node, d = frontier.popleft()
        if depth is not None and d >= depth:
            continue
        for nxt in step(node):
            if nxt != seed:
                found.add(nxt)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, d + 1))
    return sorted(found)


# flip-flop classification

def _reset_test(cond: A.Expr) -> Optional[tuple[str, str]]:
    """Recognize `x`, `!x`, `~x`, `x == c`, `x != 0` on a 1-bit name; returns (signal, polarity)."""
    if isinstance(cond, A.Ident):
        return cond.name, "active-high"
    if isinstance(cond, A.Unary) and cond.op in ("!", "~") and isinstance(cond.operand, A.Ident):
        return cond.operand.name, "active-low"
    if isinstance(cond, A.Binary) and cond.op in ("==", "!=", "===", "!==") and isinstance(cond.left, A.Ident) \
            and isinstance(cond.right, A.Number) and cond.right.value in (0, 1):
        eq = cond.op in ("==", "===")
        high = (cond.right.value == 1) == eq
        return cond.left.name, "active-high" if high else "active-low"
    return None


def _constant(e: A.Expr) -> Optional[int]:
    if A.expr_names(e):
        return None
    try:
        return const_eval(e, {})
    except ParameterError:
        return None


def split_reset(body: A.Stmt, sens_signals: set) -> Optional[tuple]:
    """Return (signal, polarity, reset-branch, data-branch) if the block leads with a reset test.

    The reset branch must only assign constants. ``sens_signals`` is unused for
    detection (synchronous resets are not in the sensitivity list) but kept so
    callers can tell sync from async.
    """
    first = body
    rest: tuple = ()
    if isinstance(body, A.Block):
        if not body.stmts:
            return None
        first, rest = body.stmts[0], body.stmts[1:]
    if not isinstance(first, A.If) or rest:
        return None
    test = _reset_test(first.cond)
    if test is None:
        return None
    consts = [s for s in A.iter_stmts(first.then) if isinstance(s, A.Assign)]
    if not consts or any(_constant(s.rhs) is None for s in consts):
        return None
    if any(not isinstance(s, (A.Assign, A.Block, A.NullStmt)) for s in A.iter_stmts(first.then)):
        return None
    return test[0], test[1], first.then, first.other


def _classify_flops(g: DesignGraph, flat: FlatDesign) -> None:
    drivers: dict = {}
    for p in flat.processes:
        if p.kind != "seq":
            continue
        for name in _targets(p.body):
            drivers.setdefault(name, []).append(p)
    for reg, procs in drivers.items():
        if len(procs) > 1:
            g.flop_errors[reg] = StructureError(
                "multi_driver", f"'{reg}' is assigned in {len(procs)} clocked blocks")
            continue
        g.flops[reg] = _flop_info(reg, procs[0])


def _targets(stmt: A.Stmt) -> set:
    out = set()
    for s in A.iter_stmts(stmt):
        if isinstance(s, A.Assign):
            out |= A.lvalue_target_names(s.lhs)
    return out


def _flop_info(reg: str, proc) -> FlopInfo:
    sens = {sig: edge for edge, sig in proc.sensitivity}
    split = split_reset(proc.body, set(sens))
    reset = None
    data_branch = proc.body
    if split is not None:
        sig, pol, rbranch, dbranch = split
        data_branch = dbranch
        value = None
        for s in A.iter_stmts(rbranch):
            if isinstance(s, A.Assign) and reg in A.lvalue_target_names(s.lhs):
                value = _constant(s.rhs)
        if value is not None:
            reset = ResetInfo(sig, pol, "async" if sig in sens else "sync", value)
    reset_sig = split[0] if split is not None else None
    clocks = [(sig, edge) for edge, sig in proc.sensitivity if sig != reset_sig]
    if not clocks:
        clocks = [(proc.sensitivity[0][1], proc.sensitivity[0][0])]
    rhs = []
    if data_branch is not None:
        for s in A.iter_stmts(data_branch):
            if isinstance(s, A.Assign) and reg in A.lvalue_target_names(s.lhs):
                txt = expr_str(s.rhs)
                if txt not in rhs:
                    rhs.append(txt)
    return FlopInfo(reg, clocks[0][0], clocks[0][1], reset, ", ".join(rhs))


def flop_properties(graph: DesignGraph, reg: str) -> FlopInfo:
    path = graph.lookup(reg)
    if path in graph.flop_errors:
        raise graph.flop_errors[path]
    if path not in graph.flops:
        raise StructureError("not_a_flop", f"'{path}' is not assigned in any clocked always block")
    return graph.flops[path]
