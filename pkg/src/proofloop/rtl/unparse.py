"""Canonical pretty-printer. Output re-parses to an equal AST."""

from __future__ import annotations

from . import ast as A
from .parser import BINARY_PREC

_IND = "  "


def expr_str(e: A.Expr) -> str:
    return _expr(e, 0)


def _num(e: A.Number) -> str:
    if e.base is None:
        return str(e.value)
    digits = {"b": format(e.value, "b"), "o": format(e.value, "o"), "d": str(e.value), "h": format(e.value, "x")}[e.base]
    return f"{e.width if e.width is not None else ''}'{e.base}{digits}"


def _atom(e: A.Expr) -> str:
    """Render an operand that must bind tighter than any operator."""
    s = _expr(e, 0)
    if isinstance(e, (A.Binary, A.Cond)):
        return f"({s})"
    return s


def _expr(e: A.Expr, ctx_prec: int) -> str:
    if isinstance(e, A.Number):
        return _num(e)
    if isinstance(e, A.Ident):
        return e.name
    if isinstance(e, A.Index):
        return f"{_atom(e.base)}[{_expr(e.index, 0)}]"
    if isinstance(e, A.Slice):
        return f"{_atom(e.base)}[{_expr(e.msb, 0)}:{_expr(e.lsb, 0)}]"
    if isinstance(e, A.IndexedSlice):
        op = "+:" if e.ascending else "-:"
        return f"{_atom(e.base)}[{_expr(e.start, 0)}{op}{_expr(e.width, 0)}]"
    if isinstance(e, A.Concat):
        return "{" + ", ".join(_expr(i, 0) for i in e.items) + "}"
    if isinstance(e, A.Repl):
        return "{" + _atom(e.count) + "{" + ", ".join(_expr(i, 0) for i in e.items) + "}}"
    if isinstance(e, A.Call):
        if not e.args:
            return e.name
        return f"{e.name}(" + ", ".join(_expr(a, 0) for a in e.args) + ")"
    if isinstance(e, A.Unary):
        inner = _atom(e.operand)
        if isinstance(e.operand, A.Unary) or (isinstance(e.operand, A.Number) and e.op in ("-", "+")):
            inner = " " + inner
        return f"{e.op}{inner}"
    if isinstance(e, A.Binary):
        p = BINARY_PREC[e.op]
        left = _expr(e.left, p)
        right = _expr(e.right, p + 1)
        s = f"{left} {e.op} {right}"
        return f"({s})" if p < ctx_prec else s
    if isinstance(e, A.Cond):
        c = _expr(e.cond, 1)
        s = f"{c} ? {_expr(e.then, 0)} : {_expr(e.other, 0)}"
        return f"({s})" if ctx_prec > 0 else s
    raise TypeError(f"not an expression: {e!r}")


def range_str(r) -> str:
    return f"[{expr_str(r.msb)}:{expr_str(r.lsb)}]" if r is not None else ""


def stmt_lines(s: A.Stmt, depth: int = 0) -> list[str]:
    pad = _IND * depth
    if isinstance(s, A.Assign):
        op = "=" if s.blocking else "<="
        return [f"{pad}{expr_str(s.lhs)} {op} {expr_str(s.rhs)};"]
    if isinstance(s, A.NullStmt):
        return [f"{pad};"]
    if isinstance(s, A.Block):
        head = f"{pad}begin" + (f" : {s.label}" if s.label else "")
        out = [head]
        for c in s.stmts:
            out.extend(stmt_lines(c, depth + 1))
        out.append(f"{pad}end")
        return out
    if isinstance(s, A.If):
        out = [f"{pad}if ({expr_str(s.cond)})"]
        out.extend(_branch(s.then, depth, dangling=s.other is not None))
        if s.other is not None:
            if isinstance(s.other, A.If):
                tail = stmt_lines(s.other, depth)
                out.append(f"{pad}else {tail[0].lstrip()}")
                out.extend(tail[1:])
            else:
                out.append(f"{pad}else")
                out.extend(_branch(s.other, depth, dangling=False))
        return out
    if isinstance(s, A.Case):
        out = [f"{pad}case ({expr_str(s.subject)})"]
        for item in s.items:
            lab = "default" if item.labels is None else ", ".join(expr_str(x) for x in item.labels)
            body = stmt_lines(item.body, depth + 2)
            if len(body) == 1:
                out.append(f"{pad}{_IND}{lab}: {body[0].lstrip()}")
            else:
                out.append(f"{pad}{_IND}{lab}:")
                out.extend(body)
        out.append(f"{pad}endcase")
        return out
    raise TypeError(f"not a statement: {s!r}")


def _ends_in_open_if(s: A.Stmt) -> bool:
    if isinstance(s, A.If):
        return s.other is None or _ends_in_open_if(s.other)
    return False


def _branch(s: A.Stmt, depth: int, dangling: bool) -> list[str]:
    pad = _IND * depth
    if dangling and _ends_in_open_if(s):
        # an else follows; shield the inner if so the else does not rebind
        return [f"{pad}begin", *stmt_lines(s, depth + 1), f"{pad}end"]
    return stmt_lines(s, depth + 1)


def port_str(p: A.Port) -> str:
    d = {"in": "input", "out": "output", "inout": "inout"}[p.direction]
    parts = [d]
    if p.net_type:
        parts.append(p.net_type)
    if p.range:
        parts.append(range_str(p.range))
    parts.append(p.name)
    return " ".join(parts)


def param_str(p: A.Param) -> str:
    rng = f" {range_str(p.range)}" if p.range else ""
    return f"{p.kind}{rng} {p.name} = {expr_str(p.default)}"


def interface_lines(m: A.ModuleDecl) -> list[str]:
    header = [p for p in m.params if p.in_header]
    head = f"module {m.name}"
    if header:
        head += " #(" + ", ".join(param_str(p) for p in header) + ")"
    if m.ports:
        lines = [head + " ("]
        for i, p in enumerate(m.ports):
            sep = "," if i + 1 < len(m.ports) else ""
            lines.append(f"{_IND}{port_str(p)}{sep}")
        lines.append(");")
    else:
        lines = [head + ";"]
    return lines


def item_lines(it, depth: int = 1) -> list[str]:
    pad = _IND * depth
    if isinstance(it, A.Param):
        return [f"{pad}{param_str(it)};"]
    if isinstance(it, A.NetDecl):
        rng = f" {range_str(it.range)}" if it.range else ""
        unp = "".join(f" {range_str(r)}" for r in it.unpacked)
        return [f"{pad}{it.net_type}{rng} {it.name}{unp};"]
    if isinstance(it, A.AssignStmt):
        return [f"{pad}assign {expr_str(it.lhs)} = {expr_str(it.rhs)};"]
    if isinstance(it, A.AlwaysBlock):
        if it.keyword == "always_comb":
            head = "always_comb"
        elif it.sensitivity is None:
            head = "always @(*)"
        else:
            ev = " or ".join(f"{'posedge' if e == 'pos' else 'negedge'} {s}" for e, s in it.sensitivity)
            head = f"{it.keyword} @({ev})"
        body = stmt_lines(it.body, depth + 1)
        return [f"{pad}{head}", *body]
    if isinstance(it, A.InstanceDecl):
        ov = ""
        if it.param_overrides:
            ov = " #(" + ", ".join(
                expr_str(e) if n is None else f".{n}({expr_str(e)})" for n, e in it.param_overrides) + ")"
        conns = []
        for f, e in it.connections:
            if f is None:
                conns.append(expr_str(e))
            else:
                conns.append(f".{f}({'' if e is None else expr_str(e)})")
        return [f"{pad}{it.target_module}{ov} {it.instance_name} (" + ", ".join(conns) + ");"]
    raise TypeError(f"not a module item: {it!r}")


def module_str(m: A.ModuleDecl) -> str:
    lines = interface_lines(m)
    for it in m.items:
        if isinstance(it, A.Param) and it.in_header:
            continue
        lines.extend(item_lines(it))
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def unparse(unit: A.SourceUnit) -> str:
    return "\n".join(module_str(m) for m in unit.modules)
