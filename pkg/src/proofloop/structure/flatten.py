"""Hierarchy flattening.

Every signal of every instance below the top module gets a dotted path relative
to the top ("q", "u0.q", "u0.sub.q"). Parameters are replaced by their resolved
values and all names inside statements are rewritten to these paths, so later
stages (graph, simulator) work on one flat list of processes.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..rtl import ast as A
from ..rtl.diagnostics import Diagnostic, RTLError
from ..rtl.elab import HierarchyError, ParameterError, const_eval, hierarchy_tree, resolve_parameters


@dataclass
class FlatSignal:
    path: str
    width: int
    kind: str  # input | output | wire | reg
    direction: Optional[str]  # in | out | inout for ports, else None
    module: str
    msb: int = 0
    lsb: int = 0
    depth: Optional[int] = None  # element count for unpacked arrays
    array_lo: int = 0
    array_ascending: bool = False

    @property
    def is_array(self) -> bool:
        return self.depth is not None

    def bit_offset(self, index: int) -> int:
        return index - self.lsb if self.msb >= self.lsb else self.lsb - index


@dataclass
class FlatProcess:
    kind: str  # assign | port | comb | seq
    scope: str  # instance path ("" for top)
    module: str
    lhs: Optional[A.Expr] = None  # assign / port
    rhs: Optional[A.Expr] = None
    body: Optional[A.Stmt] = None  # comb / seq
    sensitivity: tuple = ()  # seq: ((edge, path), ...)
    span: A.Span = A.NO_SPAN
    local: object = None  # the original (unrenamed) item


@dataclass
class FlatDesign:
    top: str
    signals: dict = field(default_factory=dict)  # path -> FlatSignal
    processes: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    scopes: dict = field(default_factory=dict)  # instance path -> module name
    params: dict = field(default_factory=dict)  # instance path -> {name: value}

    def top_inputs(self) -> list[FlatSignal]:
        return [s for s in self.signals.values() if "." not in s.path and s.direction == "in"]


def map_expr(e: A.Expr, fn: Callable[[A.Expr], Optional[A.Expr]]) -> A.Expr:
    """Bottom-up rewrite; ``fn`` returns a replacement or None to keep the node."""
    if isinstance(e, (A.Number, A.Ident)):
        r = fn(e)
        return e if r is None else r
    changes = {}
    for f in dataclasses.fields(e):
        if f.name == "span":
            continue
        val = getattr(e, f.name)
        if isinstance(val, tuple):
            changes[f.name] = tuple(map_expr(x, fn) if _is_expr(x) else x for x in val)
        elif _is_expr(val):
            changes[f.name] = map_expr(val, fn)
    new = dataclasses.replace(e, **changes)
    r = fn(new)
    return new if r is None else r


def _is_expr(x) -> bool:
    return isinstance(x, (A.Number, A.Ident, A.Index, A.Slice, A.IndexedSlice, A.Concat, A.Repl,
                          A.Unary, A.Binary, A.Cond, A.Call))


def map_stmt(s: A.Stmt, fe: Callable[[A.Expr], A.Expr]) -> A.Stmt:
    if isinstance(s, A.Assign):
        return dataclasses.replace(s, lhs=fe(s.lhs), rhs=fe(s.rhs))
    if isinstance(s, A.If):
        return dataclasses.replace(s, cond=fe(s.cond), then=map_stmt(s.then, fe),
                                   other=None if s.other is None else map_stmt(s.other, fe))
    if isinstance(s, A.Case):
        items = tuple(A.CaseItem(None if it.labels is None else tuple(fe(x) for x in it.labels),
                                 map_stmt(it.body, fe)) for it in s.items)
        return dataclasses.replace(s, subject=fe(s.subject), items=items)
    if isinstance(s, A.Block):
        return dataclasses.replace(s, stmts=tuple(map_stmt(c, fe) for c in s.stmts))
    return s


def _err(span: A.Span, msg: str) -> Diagnostic:
    return Diagnostic(span.file, span.line, span.col, "error", msg)


def _fold_calls(e: A.Expr) -> Optional[A.Expr]:
    if isinstance(e, A.Call) and e.name == "$clog2":
        return A.Number(const_eval(e, {}), None, None, span=e.span)
    return None


def flatten(unit: A.SourceUnit, top: str) -> FlatDesign:
    """Flatten the hierarchy under ``top``; raises RTLError on failure."""
    try:
        tree = hierarchy_tree(unit, top)
    except HierarchyError as exc:
        raise RTLError([Diagnostic("<design>", 0, 0, "error", str(exc))]) from exc
    design = FlatDesign(top)
    diags: list[Diagnostic] = []

    def prefix(scope: str, name: str) -> str:
        return f"{scope}.{name}" if scope else name

    def visit(mod_name: str, scope: str, overrides: dict) -> None:
        mod = unit.module(mod_name)
        try:
            params = resolve_parameters(unit, mod_name, overrides)
        except ParameterError as exc:
            diags.append(_err(mod.span, f"in '{prefix(scope, mod_name) if scope else mod_name}': {exc}"))
            return
        design.scopes[scope] = mod_name
        design.params[scope] = params

        def cev(e: A.Expr) -> int:
            return const_eval(e, params)

        assigned_in_always = set()
        for ab in mod.always_blocks:
            assigned_in_always |= ab.assigned_signals

        def add_signal(name, rng, direction, net_type, unpacked, span):
            msb, lsb = (cev(rng.msb), cev(rng.lsb)) if rng is not None else (0, 0)
            if net_type == "integer":
                msb, lsb = 31, 0
            width = abs(msb - lsb) + 1
            if direction == "in":
                kind = "input"
            elif name in assigned_in_always:
                kind = "reg"
            elif direction == "out":
                kind = "output"
            else:
                kind = "wire"
            sig = FlatSignal(prefix(scope, name), width, kind, direction, mod_name, msb, lsb)
            if unpacked:
                a, b = cev(unpacked[0].msb), cev(unpacked[0].lsb)
                sig.depth = abs(a - b) + 1
                sig.array_lo = min(a, b)
                sig.array_ascending = a <= b
            design.signals[sig.path] = sig

        for p in mod.ports:
            add_signal(p.name, p.range, p.direction, p.net_type, (), p.span)
        for n in mod.nets:
            add_signal(n.name, n.range, None, n.net_type, n.unpacked, n.span)

        local_names = {p.name for p in mod.ports} | {n.name for n in mod.nets}

        def rename(e: A.Expr) -> A.Expr:
            def fn(x):
                if isinstance(x, A.Ident):
                    if x.name in params:
                        return A.Number(params[x.name], None, None, span=x.span)
                    if x.name not in local_names:
                        diags.append(_err(x.span, f"undeclared identifier '{x.name}' in module '{mod_name}'"))
                        return None
                    return A.Ident(prefix(scope, x.name), span=x.span)
                return _fold_calls(x)
            return map_expr(e, fn)

        for it in mod.items:
            if isinstance(it, A.AssignStmt):
                design.processes.append(FlatProcess("assign", scope, mod_name, lhs=rename(it.lhs),
                                                    rhs=rename(it.rhs), span=it.span, local=it))
            elif isinstance(it, A.AlwaysBlock):
                body = map_stmt(it.body, rename)
                if it.sensitivity is None:
                    design.processes.append(FlatProcess("comb", scope, mod_name, body=body, span=it.span,
                                                        local=it))
                else:
                    sens = []
                    for edge, sig in it.sensitivity:
                        if sig not in local_names:
                            diags.append(_err(it.span, f"undeclared identifier '{sig}' in sensitivity list"))
                        sens.append((edge, prefix(scope, sig)))
                    design.processes.append(FlatProcess("seq", scope, mod_name, body=body,
                                                        sensitivity=tuple(sens), span=it.span, local=it))
            elif isinstance(it, A.InstanceDecl):
                if it.external:
                    diags.append(_err(it.span, f"unresolved module '{it.target_module}' "
                                               f"for instance '{it.instance_name}'"))
                    continue
                child = unit.module(it.target_module)
                child_scope = prefix(scope, it.instance_name)
                try:
                    ov = {n: cev(e) for n, e in it.param_overrides}
                except ParameterError as exc:
                    diags.append(_err(it.span, f"parameter override on '{it.instance_name}': {exc}"))
                    continue
                visit(child.name, child_scope, ov)
                conns = it.connection_map
                for port in child.ports:
                    actual = conns.get(port.name)
                    formal = A.Ident(prefix(child_scope, port.name), span=it.span)
                    if port.direction == "out":
                        if actual is None:
                            continue
                        design.processes.append(FlatProcess("port", scope, mod_name, lhs=rename(actual),
                                                            rhs=formal, span=it.span, local=it))
                    else:
                        rhs = rename(actual) if actual is not None else A.Number(0, 1, "b")
                        design.processes.append(FlatProcess("port", scope, mod_name, lhs=formal, rhs=rhs,
                                                            span=it.span, local=it))

    visit(top, "", {})
    if diags:
        raise RTLError(diags)
    _check_connection_widths(design)
    return design


def self_width(e: A.Expr, signals: dict) -> int:
    """Self-determined width of a flattened expression."""
    if isinstance(e, A.Number):
        return e.width or 32
    if isinstance(e, A.Ident):
        return signals[e.name].width
    if isinstance(e, A.Index):
        if isinstance(e.base, A.Ident) and signals[e.base.name].is_array:
            return signals[e.base.name].width
        return 1
    if isinstance(e, A.Slice):
        return abs(const_eval(e.msb, {}) - const_eval(e.lsb, {})) + 1
    if isinstance(e, A.IndexedSlice):
        return const_eval(e.width, {})
    if isinstance(e, A.Concat):
        return sum(self_width(i, signals) for i in e.items)
    if isinstance(e, A.Repl):
        return const_eval(e.count, {}) * sum(self_width(i, signals) for i in e.items)
    if isinstance(e, A.Unary):
        return self_width(e.operand, signals) if e.op in ("~", "-", "+") else 1
    if isinstance(e, A.Binary):
        if e.op in ("==", "!=", "===", "!==", "<", "<=", ">", ">=", "&&", "||"):
            return 1
        if e.op in ("<<", ">>", "<<<", ">>>", "**"):
            return self_width(e.left, signals)
        return max(self_width(e.left, signals), self_width(e.right, signals))
    if isinstance(e, A.Cond):
        return max(self_width(e.then, signals), self_width(e.other, signals))
    if isinstance(e, A.Call):
        if e.name == "$past":
            return self_width(e.args[0], signals)
        if e.name == "$countones":
            return 32
        return 1
    raise TypeError(e)


def _check_connection_widths(design: FlatDesign) -> None:
    for p in design.processes:
        if p.kind != "port":
            continue
        try:
            lw = self_width(p.lhs, design.signals)
            rw = self_width(p.rhs, design.signals)
        except (KeyError, ParameterError, TypeError):
            continue
        if isinstance(p.rhs, A.Number) and p.rhs.width is None:
            continue
        if lw != rw:
            s = p.span
            inst = p.local.instance_name if p.local is not None else "?"
            design.warnings.append(Diagnostic(s.file, s.line, s.col, "warning",
                                              f"width mismatch on connection of instance '{inst}': "
                                              f"{lw} vs {rw} bits"))
