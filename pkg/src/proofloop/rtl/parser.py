"""Recursive-descent parser for the synthesizable SystemVerilog subset.

Supported: module/port/parameter declarations, packed vectors, single-dimension
unpacked arrays, wire/reg/logic/integer nets, continuous assigns, clocked and
combinational always blocks, if/else, case, named and positional instances,
and the usual unary/binary/ternary operators. Anything else is rejected with an
"unsupported construct" diagnostic naming the construct.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Optional

from . import ast as A
from .diagnostics import Diagnostic, RTLError, UnsupportedConstruct
from .lexer import Token, tokenize

BINARY_PREC = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4, "~^": 4, "^~": 4,
    "&": 5,
    "==": 6, "!=": 6, "===": 6, "!==": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "<<<": 8, ">>>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
    "**": 11,
}
UNARY_OPS = ("+", "-", "!", "~", "&", "~&", "|", "~|", "^", "~^", "^~")

UNSUPPORTED_ITEM_KEYWORDS = {
    "generate": "generate block",
    "genvar": "genvar declaration",
    "function": "function declaration",
    "task": "task declaration",
    "initial": "initial block",
    "typedef": "typedef",
    "interface": "interface",
    "class": "class",
    "always_latch": "always_latch block",
    "for": "for loop",
    "package": "package",
    "import": "package import",
    "assert": "immediate or concurrent assertion in RTL",
    "property": "property declaration in RTL",
    "enum": "enum type",
    "struct": "struct type",
}
UNSUPPORTED_STMT_KEYWORDS = {
    "for": "for loop",
    "while": "while loop",
    "repeat": "repeat loop",
    "forever": "forever loop",
    "casez": "casez statement",
    "casex": "casex statement",
}
NET_TYPES = ("wire", "reg", "logic", "integer")


class Parser:
    def __init__(self, tokens: list[Token], filename: str, *, assertion_mode: bool = False,
                 unpacked: Optional[set] = None):
        self.toks = tokens
        self.pos = 0
        self.file = filename
        self.assertion_mode = assertion_mode
        self.unpacked: set = set(unpacked or ())

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def span(self, t: Token) -> A.Span:
        prev = self.toks[self.pos - 1] if self.pos else t
        return A.Span(self.file, t.line, t.col, prev.line, prev.col + len(prev.text))

    def error(self, msg: str, t: Optional[Token] = None) -> RTLError:
        t = t or self.tok
        return RTLError([Diagnostic(self.file, t.line, t.col, "error", msg)])

    def unsupported(self, what: str, t: Optional[Token] = None) -> UnsupportedConstruct:
        t = t or self.tok
        return UnsupportedConstruct([Diagnostic(self.file, t.line, t.col, "error",
                                                f"unsupported construct: {what}")])

    def describe(self, t: Token) -> str:
        return "end of input" if t.kind == "eof" else f"'{t.text}'"

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            raise self.error(f"syntax error: expected '{op}' but found {self.describe(self.tok)}")
        return self.advance()

    def expect_kw(self, kw: str) -> Token:
        if not self.tok.is_kw(kw):
            raise self.error(f"syntax error: expected '{kw}' but found {self.describe(self.tok)}")
        return self.advance()

    def expect_id(self) -> Token:
        if self.tok.kind != "id":
            raise self.error(f"syntax error: expected identifier but found {self.describe(self.tok)}")
        return self.advance()

    def accept_op(self, op: str) -> bool:
        if self.tok.is_op(op):
            self.advance()
            return True
        return False

    # -- source level

    def parse_file(self) -> list[A.ModuleDecl]:
        mods = []
        while self.tok.kind != "eof":
            if self.tok.is_kw("module"):
                mods.append(self.parse_module())
            elif self.tok.kind == "kw" and self.tok.text in UNSUPPORTED_ITEM_KEYWORDS:
                raise self.unsupported(UNSUPPORTED_ITEM_KEYWORDS[self.tok.text])
            else:
                raise self.error(f"syntax error: expected 'module' but found {self.describe(self.tok)}")
        return mods

    def parse_module(self) -> A.ModuleDecl:
        start = self.expect_kw("module")
        name = self.expect_id().text
        self.unpacked = set()
        items: list = []
        ports: list[A.Port] = []
        nonansi: Optional[list[str]] = None
        if self.accept_op("#"):
            self.expect_op("(")
            kind = "parameter"
            if not self.tok.is_op(")"):
                while True:
                    if self.tok.is_kw("parameter", "localparam"):
                        kind = self.advance().text
                    items.extend(self.parse_param_assignments(kind, in_header=True, single=True))
                    if not self.accept_op(","):
                        break
            self.expect_op(")")
        if self.accept_op("("):
            if self.tok.is_op(")"):
                pass
            elif self.tok.is_kw("input", "output", "inout"):
                ports = self.parse_ansi_ports()
            else:
                nonansi = [self.expect_id().text]
                while self.accept_op(","):
                    nonansi.append(self.expect_id().text)
            self.expect_op(")")
        self.expect_op(";")

        pending: dict[str, dict] = {n: {} for n in (nonansi or [])}
        while not self.tok.is_kw("endmodule"):
            if self.tok.kind == "eof":
                raise self.error("syntax error: missing 'endmodule'")
            self.parse_item(items, pending, ports)
        end = self.expect_kw("endmodule")
        if self.accept_op(":"):
            self.expect_id()

        if nonansi is not None:
            for pname in nonansi:
                info = pending[pname]
                if "direction" not in info:
                    raise self.error(f"port '{pname}' has no direction declaration", start)
                ports.append(A.Port(pname, info["direction"], info.get("net_type"), info.get("range"),
                                    span=info["span"]))
        span = A.Span(self.file, start.line, start.col, end.line, end.col + len(end.text))
        return A.ModuleDecl(name, tuple(ports), tuple(items), span=span)

    def parse_range(self) -> A.Range:
        self.expect_op("[")
        msb = self.parse_expr()
        self.expect_op(":")
        lsb = self.parse_expr()
        self.expect_op("]")
        return A.Range(msb, lsb)

    def reject_signed(self) -> None:
        if self.tok.is_kw("signed"):
            raise self.unsupported("signed type")
        if self.tok.is_kw("unsigned"):
            self.advance()

    def parse_ansi_ports(self) -> list[A.Port]:
        ports: list[A.Port] = []
        direction = None
        net_type = None
        rng = None
        while True:
            t = self.tok
            explicit = False
            if t.is_kw("input", "output", "inout"):
                direction = {"input": "in", "output": "out", "inout": "inout"}[self.advance().text]
                net_type = None
                rng = None
                explicit = True
            if self.tok.is_kw(*NET_TYPES):
                net_type = self.advance().text
                rng = None
                explicit = True
            self.reject_signed()
            if self.tok.is_op("["):
                rng = self.parse_range()
                explicit = True
            elif explicit:
                rng = None
            if direction is None:
                raise self.error("syntax error: port direction expected")
            nt = self.expect_id()
            if self.tok.is_op("["):
                raise self.unsupported("unpacked array port", self.tok)
            ports.append(A.Port(nt.text, direction, net_type, rng, span=self.span(t)))
            if not self.accept_op(","):
                break
        return ports

    def parse_param_assignments(self, kind: str, *, in_header: bool, single: bool = False) -> list[A.Param]:
        rng = None
        if self.tok.is_kw("integer", "logic") or (
            self.tok.kind == "id" and self.tok.text in ("int", "bit") and self.peek().kind in ("id", "op")
            and not self.peek().is_op("=")
        ):
            self.advance()
        self.reject_signed()
        if self.tok.is_op("["):
            rng = self.parse_range()
        out = []
        while True:
            t = self.expect_id()
            if self.tok.is_op("["):
                raise self.unsupported("unpacked parameter array")
            self.expect_op("=")
            default = self.parse_expr()
            out.append(A.Param(t.text, kind, default, rng, in_header, span=self.span(t)))
            if single or not self.tok.is_op(","):
                break
            self.advance()
        return out

    # -- module items

    def parse_item(self, items: list, pending: dict, ports: list) -> None:
        t = self.tok
        if t.kind == "kw":
            kw = t.text
            if kw in ("parameter", "localparam"):
                self.advance()
                items.extend(self.parse_param_assignments(kw, in_header=False))
                self.expect_op(";")
                return
            if kw in ("input", "output", "inout"):
                self.parse_nonansi_port_decl(pending)
                return
            if kw in NET_TYPES:
                self.parse_net_decl(items, pending, ports)
                return
            if kw == "assign":
                self.advance()
                while True:
                    st = self.tok
                    lhs = self.parse_lvalue()
                    self.expect_op("=")
                    rhs = self.parse_expr()
                    items.append(A.AssignStmt(lhs, rhs, span=self.span(st)))
                    if not self.accept_op(","):
                        break
                self.expect_op(";")
                return
            if kw in ("always", "always_ff", "always_comb"):
                items.append(self.parse_always())
                return
            if kw in UNSUPPORTED_ITEM_KEYWORDS:
                raise self.unsupported(UNSUPPORTED_ITEM_KEYWORDS[kw])
            raise self.error(f"syntax error: unexpected {self.describe(t)}")
        if t.kind == "id":
            if t.text in ("int", "bit", "byte", "shortint", "longint"):
                raise self.unsupported(f"'{t.text}' variable type")
            self.parse_instances(items)
            return
        if t.is_op(";"):
            self.advance()
            return
        raise self.error(f"syntax error: unexpected {self.describe(t)}")

    def parse_nonansi_port_decl(self, pending: dict) -> None:
        t = self.advance()
        direction = {"input": "in", "output": "out", "inout": "inout"}[t.text]
        net_type = None
        if self.tok.is_kw(*NET_TYPES):
            net_type = self.advance().text
        self.reject_signed()
        rng = self.parse_range() if self.tok.is_op("[") else None
        while True:
            nt = self.expect_id()
            if nt.text not in pending:
                raise self.error(f"'{nt.text}' is not in the module port list", nt)
            if "direction" in pending[nt.text]:
                raise self.error(f"duplicate declaration of port '{nt.text}'", nt)
            pending[nt.text].update(direction=direction, range=rng, span=self.span(nt))
            if net_type:
                pending[nt.text]["net_type"] = net_type
            if not self.accept_op(","):
                break
        self.expect_op(";")

    def parse_net_decl(self, items: list, pending: dict, ports: list) -> None:
        t = self.advance()
        net_type = t.text
        self.reject_signed()
        rng = None
        if self.tok.is_op("["):
            if net_type == "integer":
                raise self.error("syntax error: integer takes no range")
            rng = self.parse_range()
        ansi_names = {p.name for p in ports}
        while True:
            nt = self.expect_id()
            unpacked = []
            while self.tok.is_op("["):
                unpacked.append(self.parse_range())
            if len(unpacked) > 1:
                raise self.unsupported("multi-dimensional unpacked array", nt)
            if nt.text in ansi_names:
                raise self.error(f"redeclaration of ANSI port '{nt.text}'", nt)
            if nt.text in pending:
                info = pending[nt.text]
                if unpacked:
                    raise self.unsupported("unpacked array port", nt)
                if self.tok.is_op("="):
                    raise self.unsupported("initializer on port declaration", nt)
                info["net_type"] = net_type
                if rng is not None:
                    info["range"] = rng
            else:
                if unpacked:
                    self.unpacked.add(nt.text)
                items.append(A.NetDecl(nt.text, net_type, rng, tuple(unpacked), span=self.span(nt)))
                if self.tok.is_op("="):
                    at = self.advance()
                    if net_type != "wire":
                        raise self.unsupported("variable initializer", at)
                    rhs = self.parse_expr()
                    items.append(A.AssignStmt(A.Ident(nt.text, span=self.span(nt)), rhs, span=self.span(nt)))
            if not self.accept_op(","):
                break
        self.expect_op(";")

    def parse_always(self) -> A.AlwaysBlock:
        t = self.advance()
        kw = t.text
        sens = None
        if kw == "always_comb":
            if self.tok.is_op("@"):
                raise self.error("syntax error: always_comb takes no sensitivity list")
        else:
            if not self.tok.is_op("@"):
                raise self.unsupported("always block without sensitivity list")
            self.advance()
            if self.accept_op("*"):
                sens = None
            else:
                self.expect_op("(")
                if self.accept_op("*"):
                    sens = None
                else:
                    events = []
                    while True:
                        edge = None
                        if self.tok.is_kw("posedge", "negedge"):
                            edge = "pos" if self.advance().text == "posedge" else "neg"
                        sig = self.expect_id().text
                        if self.tok.is_op("["):
                            raise self.unsupported("select in sensitivity list")
                        events.append((edge, sig))
                        if not (self.tok.is_kw("or") or self.tok.is_op(",")):
                            break
                        self.advance()
                    edges = [e for e, _ in events if e is not None]
                    if edges and len(edges) != len(events):
                        raise self.unsupported("mixed edge and level sensitivity list", t)
                    sens = tuple(events) if edges else None
                self.expect_op(")")
            if kw == "always_ff" and sens is None:
                raise self.error("syntax error: always_ff requires an edge sensitivity list", t)
        body = self.parse_stmt()
        return A.AlwaysBlock(kw, sens, body, span=self.span(t))

    def parse_instances(self, items: list) -> None:
        tt = self.expect_id()
        overrides: list = []
        if self.accept_op("#"):
            if not self.tok.is_op("("):
                raise self.unsupported("delay specification")
            self.advance()
            if not self.tok.is_op(")"):
                if self.tok.is_op("."):
                    while True:
                        self.expect_op(".")
                        pn = self.expect_id().text
                        self.expect_op("(")
                        overrides.append((pn, self.parse_expr()))
                        self.expect_op(")")
                        if not self.accept_op(","):
                            break
                else:
                    while True:
                        overrides.append((None, self.parse_expr()))
                        if not self.accept_op(","):
                            break
            self.expect_op(")")
        while True:
            st = self.tok
            inst = self.expect_id().text
            if self.tok.is_op("["):
                raise self.unsupported("instance array")
            self.expect_op("(")
            conns: list = []
            if not self.tok.is_op(")"):
                if self.tok.is_op("."):
                    while True:
                        self.expect_op(".")
                        if self.tok.is_op("*"):
                            raise self.unsupported("wildcard port connection .*")
                        ft = self.expect_id()
                        if self.accept_op("("):
                            expr = None if self.tok.is_op(")") else self.parse_expr()
                            self.expect_op(")")
                        else:
                            expr = A.Ident(ft.text, span=self.span(ft))
                        conns.append((ft.text, expr))
                        if not self.accept_op(","):
                            break
                else:
                    while True:
                        conns.append((None, self.parse_expr()))
                        if not self.accept_op(","):
                            break
            self.expect_op(")")
            formals = [f for f, _ in conns if f is not None]
            if len(formals) != len(set(formals)):
                dup = next(f for f in formals if formals.count(f) > 1)
                raise self.error(f"duplicate connection to port '{dup}' on instance '{inst}'", st)
            items.append(A.InstanceDecl(inst, tt.text, tuple(conns), tuple(overrides), span=self.span(tt)))
            if not self.accept_op(","):
                break
        self.expect_op(";")

    # -- statements

    def parse_stmt(self) -> A.Stmt:
        t = self.tok
        if t.is_kw("begin"):
            self.advance()
            label = None
            if self.accept_op(":"):
                label = self.expect_id().text
            stmts = []
            while not self.tok.is_kw("end"):
                if self.tok.kind == "eof":
                    raise self.error("syntax error: missing 'end'")
                stmts.append(self.parse_stmt())
            self.advance()
            if self.accept_op(":"):
                self.expect_id()
            if label is None and len(stmts) == 1:
                return stmts[0]
            return A.Block(tuple(stmts), label, span=self.span(t))
        if t.kind == "id" and t.text in ("unique", "priority", "unique0"):
            self.advance()
            if not (self.tok.is_kw("if", "case")):
                raise self.error(f"syntax error: '{t.text}' must precede if or case")
            return self.parse_stmt()
        if t.is_kw("if"):
            self.advance()
            self.expect_op("(")
            cond = self.parse_expr()
            self.expect_op(")")
            then = self.parse_stmt()
            other = None
            if self.tok.is_kw("else"):
                self.advance()
                other = self.parse_stmt()
            return A.If(cond, then, other, span=self.span(t))
        if t.is_kw("case"):
            self.advance()
            self.expect_op("(")
            subject = self.parse_expr()
            self.expect_op(")")
            items = []
            seen_default = False
            while not self.tok.is_kw("endcase"):
                if self.tok.kind == "eof":
                    raise self.error("syntax error: missing 'endcase'")
                if self.tok.is_kw("default"):
                    dt = self.advance()
                    if seen_default:
                        raise self.error("multiple default items in case", dt)
                    seen_default = True
                    self.accept_op(":")
                    items.append(A.CaseItem(None, self.parse_stmt()))
                else:
                    labels = [self.parse_expr()]
                    while self.accept_op(","):
                        labels.append(self.parse_expr())
                    self.expect_op(":")
                    items.append(A.CaseItem(tuple(labels), self.parse_stmt()))
            self.advance()
            return A.Case(subject, tuple(items), span=self.span(t))
        if t.kind == "kw" and t.text in UNSUPPORTED_STMT_KEYWORDS:
            raise self.unsupported(UNSUPPORTED_STMT_KEYWORDS[t.text])
        if t.is_op(";"):
            self.advance()
            return A.NullStmt(span=self.span(t))
        if t.is_op("#"):
            raise self.unsupported("delay control")
        if t.kind == "sysid":
            raise self.unsupported(f"system task {t.text}")
        lhs = self.parse_lvalue()
        if self.tok.is_op("="):
            blocking = True
        elif self.tok.is_op("<="):
            blocking = False
        else:
            raise self.error(f"syntax error: expected '=' or '<=' but found {self.describe(self.tok)}")
        self.advance()
        if self.tok.is_op("#"):
            raise self.unsupported("intra-assignment delay")
        rhs = self.parse_expr()
        self.expect_op(";")
        return A.Assign(lhs, rhs, blocking, span=self.span(t))

    def parse_lvalue(self) -> A.Expr:
        t = self.tok
        if t.is_op("{"):
            self.advance()
            items = [self.parse_lvalue()]
            while self.accept_op(","):
                items.append(self.parse_lvalue())
            self.expect_op("}")
            return A.Concat(tuple(items), span=self.span(t))
        name = self.expect_id()
        return self.parse_selects(A.Ident(name.text, span=self.span(name)), name)

    # -- expressions

    def parse_expr(self) -> A.Expr:
        t = self.tok
        cond = self.parse_binary(1)
        if self.tok.is_op("?"):
            self.advance()
            then = self.parse_expr()
            self.expect_op(":")
            other = self.parse_expr()
            return A.Cond(cond, then, other, span=self.span(t))
        return cond

    def parse_binary(self, min_prec: int) -> A.Expr:
        t = self.tok
        left = self.parse_unary()
        while True:
            op = self.tok
            prec = BINARY_PREC.get(op.text) if op.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.parse_binary(prec + 1)
            left = A.Binary(op.text, left, right, span=self.span(t))

    def parse_unary(self) -> A.Expr:
        t = self.tok
        if t.kind == "op" and t.text in UNARY_OPS:
            self.advance()
            return A.Unary(t.text, self.parse_unary(), span=self.span(t))
        return self.parse_primary()

    def parse_primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            value, width, base = t.value
            return A.Number(value, width, base, span=self.span(t))
        if t.kind == "id":
            self.advance()
            name = t.text
            if self.assertion_mode:
                while self.tok.is_op(".") and self.peek().kind == "id":
                    self.advance()
                    name += "." + self.advance().text
            return self.parse_selects(A.Ident(name, span=self.span(t)), t)
        if t.kind == "sysid":
            self.advance()
            args = []
            if self.accept_op("("):
                if not self.tok.is_op(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept_op(","):
                            break
                self.expect_op(")")
            return A.Call(t.text, tuple(args), span=self.span(t))
        if t.is_op("("):
            self.advance()
            e = self.parse_expr()
            if self.tok.is_op("##"):
                raise self.unsupported("parenthesized sequence expression")
            self.expect_op(")")
            return e
        if t.is_op("{"):
            self.advance()
            first = self.parse_expr()
            if self.tok.is_op("{"):
                self.advance()
                items = [self.parse_expr()]
                while self.accept_op(","):
                    items.append(self.parse_expr())
                self.expect_op("}")
                self.expect_op("}")
                return A.Repl(first, tuple(items), span=self.span(t))
            items = [first]
            while self.accept_op(","):
                items.append(self.parse_expr())
            self.expect_op("}")
            return A.Concat(tuple(items), span=self.span(t))
        if t.is_op("'"):
            raise self.unsupported("assignment pattern")
        raise self.error(f"syntax error: unexpected {self.describe(t)} in expression")

    def parse_selects(self, base: A.Expr, start: Token) -> A.Expr:
        first = True
        while self.tok.is_op("["):
            lb = self.advance()
            idx = self.parse_expr()
            if self.tok.is_op(":"):
                self.advance()
                lsb = self.parse_expr()
                self.expect_op("]")
                if first and isinstance(base, A.Ident) and base.name in self.unpacked:
                    raise self.unsupported(f"part-select of unpacked array '{base.name}' (array slice)", lb)
                base = A.Slice(base, idx, lsb, span=self.span(start))
            elif self.tok.is_op("+:") or self.tok.is_op("-:"):
                asc = self.advance().text == "+:"
                w = self.parse_expr()
                self.expect_op("]")
                if first and isinstance(base, A.Ident) and base.name in self.unpacked:
                    raise self.unsupported(f"part-select of unpacked array '{base.name}' (array slice)", lb)
                base = A.IndexedSlice(base, idx, w, asc, span=self.span(start))
            else:
                self.expect_op("]")
                base = A.Index(base, idx, span=self.span(start))
            first = False
        return base


# ---------------------------------------------------------------- entry points


def _parse_one(filename: str, contents: str) -> list[A.ModuleDecl]:
    p = Parser(tokenize(contents, filename), filename)
    return p.parse_file()


def _check_module(m: A.ModuleDecl) -> list[Diagnostic]:
    diags = []
    seen: dict[str, A.Span] = {}
    for node in list(m.ports) + [i for i in m.items if isinstance(i, (A.Param, A.NetDecl))]:
        if node.name in seen:
            diags.append(Diagnostic(node.span.file, node.span.line, node.span.col, "error",
                                    f"duplicate declaration of '{node.name}' in module '{m.name}'"))
        seen[node.name] = node.span
    params = {p.name for p in m.params}
    for node in list(m.ports) + list(m.nets):
        ranges = ([node.range] if node.range else []) + list(getattr(node, "unpacked", ()))
        for r in ranges:
            for e in (r.msb, r.lsb):
                bad = A.expr_names(e) - params
                if bad:
                    diags.append(Diagnostic(node.span.file, node.span.line, node.span.col, "error",
                                            f"width of '{node.name}' references non-parameter "
                                            f"'{sorted(bad)[0]}'"))
    return diags


def _resolve_instances(mods: list[A.ModuleDecl]) -> tuple[list[A.ModuleDecl], list[Diagnostic]]:
    by_name = {m.name: m for m in mods}
    diags: list[Diagnostic] = []
    out = []
    for m in mods:
        new_items = []
        for it in m.items:
            if not isinstance(it, A.InstanceDecl):
                new_items.append(it)
                continue
            target = by_name.get(it.target_module)
            if target is None:
                new_items.append(dataclasses.replace(it, external=True))
                continue
            sp = it.span
            conns = []
            port_names = [p.name for p in target.ports]
            positional = [c for c in it.connections if c[0] is None]
            if positional:
                if len(positional) > len(port_names):
                    diags.append(Diagnostic(sp.file, sp.line, sp.col, "error",
                                            f"too many positional connections on instance '{it.instance_name}' "
                                            f"of '{target.name}'"))
                    continue
                conns = [(port_names[i], e) for i, (_, e) in enumerate(positional)]
            else:
                for f, e in it.connections:
                    if f not in port_names:
                        diags.append(Diagnostic(sp.file, sp.line, sp.col, "error",
                                                f"module '{target.name}' has no port '{f}' "
                                                f"(instance '{it.instance_name}')"))
                    conns.append((f, e))
            overridable = [p.name for p in target.params if p.kind == "parameter"]
            ovs = []
            for i, (pn, e) in enumerate(it.param_overrides):
                if pn is None:
                    if i >= len(overridable):
                        diags.append(Diagnostic(sp.file, sp.line, sp.col, "error",
                                                f"too many parameter overrides on '{it.instance_name}'"))
                        break
                    pn = overridable[i]
                elif pn not in overridable:
                    diags.append(Diagnostic(sp.file, sp.line, sp.col, "error",
                                            f"module '{target.name}' has no overridable parameter '{pn}'"))
                ovs.append((pn, e))
            new_items.append(dataclasses.replace(it, connections=tuple(conns), param_overrides=tuple(ovs)))
        out.append(dataclasses.replace(m, items=tuple(new_items)))
    return out, diags


def parse_source(texts: Iterable[tuple[str, str]]) -> A.SourceUnit:
    """Parse ``(filename, contents)`` pairs into a SourceUnit.

    Raises RTLError carrying every diagnostic found. Each file stops at its
    first syntax error; cross-module checks run only when all files parse.
    """
    texts = list(texts)
    if not texts:
        raise ValueError("parse_source needs at least one file")
    diags: list[Diagnostic] = []
    mods: list[A.ModuleDecl] = []
    for fname, contents in texts:
        try:
            mods.extend(_parse_one(fname, contents))
        except RTLError as e:
            diags.extend(e.diagnostics)
    if diags:
        raise RTLError(diags)
    seen: dict[str, A.ModuleDecl] = {}
    for m in mods:
        if m.name in seen:
            diags.append(Diagnostic(m.span.file, m.span.line, m.span.col, "error",
                                    f"duplicate module name '{m.name}' (first defined at {seen[m.name].span})"))
        else:
            seen[m.name] = m
        diags.extend(_check_module(m))
    if diags:
        raise RTLError(diags)
    mods, diags = _resolve_instances(mods)
    if diags:
        raise RTLError(diags)
    return A.SourceUnit(tuple(mods), tuple(f for f, _ in texts))


def parse_files(paths) -> A.SourceUnit:
    from pathlib import Path

    return parse_source((str(p), Path(p).read_text(encoding="utf-8")) for p in paths)


def parse_expression(text: str, *, filename: str = "<expr>", assertion_mode: bool = False,
                     unpacked: Optional[set] = None) -> A.Expr:
    p = Parser(tokenize(text, filename), filename, assertion_mode=assertion_mode, unpacked=unpacked)
    e = p.parse_expr()
    if p.tok.kind != "eof":
        raise p.error(f"syntax error: unexpected {p.describe(p.tok)} after expression")
    return e
