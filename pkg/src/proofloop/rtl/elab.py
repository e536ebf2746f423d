"""Parameter resolution, constant folding and the instance hierarchy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from . import ast as A


class ParameterError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class HierarchyError(Exception):
    pass


def _mask(w: int) -> int:
    return (1 << w) - 1


def const_width(e: A.Expr, env: Mapping[str, int]) -> int:
    if isinstance(e, A.Number):
        return e.width or 32
    if isinstance(e, A.Concat):
        return sum(const_width(i, env) for i in e.items)
    if isinstance(e, A.Repl):
        return const_eval(e.count, env) * sum(const_width(i, env) for i in e.items)
    if isinstance(e, A.Unary) and e.op in ("!", "&", "~&", "|", "~|", "^", "~^", "^~"):
        return 1
    if isinstance(e, A.Binary) and e.op in BOOL_BINOPS:
        return 1
    return 32


BOOL_BINOPS = frozenset(["==", "!=", "===", "!==", "<", "<=", ">", ">=", "&&", "||"])


def clog2(v: int) -> int:
    return 0 if v <= 1 else (v - 1).bit_length()


def const_eval(e: A.Expr, env: Mapping[str, int]) -> int:
    """Fold a constant expression; names resolve through ``env``.

    Arithmetic is unsigned and unbounded except for bitwise negation, which
    uses the operand's self-determined width (32 for unsized values).
    """
    if isinstance(e, A.Number):
        return e.value
    if isinstance(e, A.Ident):
        if e.name not in env:
            raise ParameterError("non_constant", f"'{e.name}' is not a constant")
        return env[e.name]
    if isinstance(e, A.Unary):
        v = const_eval(e.operand, env)
        w = const_width(e.operand, env)
        if e.op == "+":
            return v
        if e.op == "-":
            return (-v) & _mask(32)
        if e.op == "!":
            return int(v == 0)
        if e.op == "~":
            return ~v & _mask(w)
        bits = v & _mask(w)
        if e.op == "&":
            return int(bits == _mask(w))
        if e.op == "~&":
            return int(bits != _mask(w))
        if e.op == "|":
            return int(bits != 0)
        if e.op == "~|":
            return int(bits == 0)
        if e.op == "^":
            return bin(bits).count("1") & 1
        return 1 - (bin(bits).count("1") & 1)
    if isinstance(e, A.Binary):
        a = const_eval(e.left, env)
        if e.op == "&&":
            return int(bool(a) and bool(const_eval(e.right, env)))
        if e.op == "||":
            return int(bool(a) or bool(const_eval(e.right, env)))
        b = const_eval(e.right, env)
        op = e.op
        if op == "+":
            return a + b
        if op == "-":
            return (a - b) & _mask(max(32, const_width(e.left, env), const_width(e.right, env)))
        if op == "*":
            return a * b
        if op in ("/", "%"):
            if b == 0:
                raise ParameterError("non_constant", "division by zero in constant expression")
            return a // b if op == "/" else a % b
        if op == "**":
            return a ** b
        if op in ("<<", "<<<"):
            return a << b
        if op in (">>", ">>>"):
            return a >> b
        if op in ("==", "==="):
            return int(a == b)
        if op in ("!=", "!=="):
            return int(a != b)
        if op == "<":
            return int(a < b)
        if op == "<=":
            return int(a <= b)
        if op == ">":
            return int(a > b)
        if op == ">=":
            return int(a >= b)
        if op == "&":
            return a & b
        if op == "|":
            return a | b
        if op == "^":
            return a ^ b
        if op in ("~^", "^~"):
            w = max(const_width(e.left, env), const_width(e.right, env))
            return ~(a ^ b) & _mask(w)
    if isinstance(e, A.Cond):
        return const_eval(e.then, env) if const_eval(e.cond, env) else const_eval(e.other, env)
    if isinstance(e, A.Call):
        if e.name == "$clog2" and len(e.args) == 1:
            return clog2(const_eval(e.args[0], env))
        raise ParameterError("non_constant", f"{e.name} is not allowed in a constant expression")
    if isinstance(e, A.Concat):
        v = 0
        for it in e.items:
            w = const_width(it, env)
            v = (v << w) | (const_eval(it, env) & _mask(w))
        return v
    if isinstance(e, A.Repl):
        n = const_eval(e.count, env)
        inner = A.Concat(e.items)
        w = const_width(inner, env)
        part = const_eval(inner, env) & _mask(w)
        v = 0
        for _ in range(n):
            v = (v << w) | part
        return v
    if isinstance(e, (A.Index, A.Slice, A.IndexedSlice)):
        base = const_eval(e.base, env)
        if isinstance(e, A.Index):
            return (base >> const_eval(e.index, env)) & 1
        if isinstance(e, A.Slice):
            hi, lo = const_eval(e.msb, env), const_eval(e.lsb, env)
            return (base >> lo) & _mask(hi - lo + 1)
        st, w = const_eval(e.start, env), const_eval(e.width, env)
        lo = st if e.ascending else st - w + 1
        return (base >> lo) & _mask(w)
    raise ParameterError("non_constant", "expression is not constant")


def resolve_parameters(unit: A.SourceUnit, module_name: str,
                       overrides: Optional[Mapping[str, int]] = None) -> dict[str, int]:
    """Reduce every parameter and localparam of a module to an integer.

    Declarations may reference each other in any order; cycles are errors.
    Overrides replace parameter defaults (localparams cannot be overridden).
    """
    try:
        mod = unit.module(module_name)
    except KeyError:
        raise ParameterError("unknown_module", f"unknown module '{module_name}'") from None
    decls = {p.name: p for p in mod.params}
    overrides = dict(overrides or {})
    for name in overrides:
        if name not in decls:
            raise ParameterError("unknown_parameter", f"module '{module_name}' has no parameter '{name}'")
        if decls[name].kind == "localparam":
            raise ParameterError("unknown_parameter", f"'{name}' is a localparam and cannot be overridden")

    values: dict[str, int] = {}
    visiting: list[str] = []

    def resolve(name: str) -> int:
        if name in values:
            return values[name]
        if name in overrides:
            values[name] = int(overrides[name])
            return values[name]
        if name in visiting:
            cyc = " -> ".join(visiting[visiting.index(name):] + [name])
            raise ParameterError("circular", f"circular parameter dependency: {cyc}")
        visiting.append(name)
        expr = decls[name].default
        env = {}
        for ref in A.expr_names(expr):
            if ref not in decls:
                raise ParameterError("non_constant",
                                     f"parameter '{name}' references non-constant '{ref}'")
            env[ref] = resolve(ref)
        values[name] = const_eval(expr, env)
        visiting.pop()
        return values[name]

    for name in decls:
        resolve(name)
    return {p.name: values[p.name] for p in mod.params}


@dataclass
class HierNode:
    module: str
    path: str  # dotted instance path, "" for the root
    instance_name: Optional[str] = None
    external: bool = False
    children: list = field(default_factory=list)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def to_json(self) -> dict:
        d = {"module": self.module, "path": self.path or self.module}
        if self.instance_name:
            d["instance"] = self.instance_name
        if self.external:
            d["external"] = True
        if self.children:
            d["children"] = [c.to_json() for c in self.children]
        return d


def hierarchy_tree(unit: A.SourceUnit, top: str) -> HierNode:
    if not unit.has_module(top):
        raise HierarchyError(f"unknown top module '{top}'")

    def build(mod_name: str, path: str, inst: Optional[str], stack: tuple) -> HierNode:
        if mod_name in stack:
            cyc = " -> ".join(stack + (mod_name,))
            raise HierarchyError(f"instantiation cycle: {cyc}")
        node = HierNode(mod_name, path, inst)
        for it in unit.module(mod_name).instances:
            child_path = f"{path}.{it.instance_name}" if path else it.instance_name
            if not unit.has_module(it.target_module):
                node.children.append(HierNode(it.target_module, child_path, it.instance_name, external=True))
            else:
                node.children.append(build(it.target_module, child_path, it.instance_name,
                                           stack + (mod_name,)))
        return node

    return build(top, "", None, ())


def hierarchy_summary(tree: HierNode) -> str:
    lines = []

    def rec(n: HierNode, depth: int) -> None:
        label = n.module if not n.instance_name else f"{n.instance_name}: {n.module}"
        if n.external:
            label += " (external)"
        lines.append("  " * depth + label)
        for c in n.children:
            rec(c, depth + 1)

    rec(tree, 0)
    return "\n".join(lines)
