"""Cycle-based 2-state simulator for flattened designs.

Each signal (or unpacked-array element) owns one slot in a flat value list.
Processes are translated to Python source once and compiled with ``exec``;
one simulated cycle is then: load state and inputs, settle combinational
logic (with asynchronous resets applied immediately), sample, clock edge.

All clocked blocks fire on every cycle: designs are treated as single-clock.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass
from typing import Callable, Optional

from ..rtl import ast as A
from ..rtl.elab import ParameterError, const_eval
from ..structure.flatten import FlatDesign, FlatSignal, self_width


class SimulationError(Exception):
    pass


def _mask(w: int) -> int:
    return (1 << w) - 1


def _rt_arr(v, base, n, i):
    return v[base + i] if 0 <= i < n else 0


def _rt_bit(x, i, w):
    return (x >> i) & 1 if 0 <= i < w else 0


def _rt_shl(x, s, m):
    return (x << s) & m if s < 4096 else 0


def _rt_shr(x, s):
    return x >> s if s >= 0 else x << -s


def _rt_div(a, b):
    return a // b if b else 0


def _rt_mod(a, b):
    return a % b if b else 0


def _rt_par(x):
    return bin(x).count("1") & 1


def _rt_repl(x, w, n):
    out = 0
    for _ in range(n):
        out = (out << w) | x
    return out


RUNTIME = {
    "_arr": _rt_arr, "_bit": _rt_bit, "_shl": _rt_shl, "_shr": _rt_shr, "_div": _rt_div,
    "_mod": _rt_mod, "_par": _rt_par, "_repl": _rt_repl,
}

_CMP = {"==": "==", "===": "==", "!=": "!=", "!==": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _const(e: A.Expr) -> Optional[int]:
    if A.expr_names(e):
        return None
    try:
        return const_eval(e, {})
    except ParameterError:
        return None


class ExprGen:
    """Translate flattened expressions into Python source over ``v``.

    ``call_hook(expr, width)`` handles system functions the design side does not
    know about (the property compiler uses it for $past and friends).
    """

    def __init__(self, signals: dict, slots: dict, call_hook: Optional[Callable] = None, vname: str = "v"):
        self.signals = signals
        self.slots = slots
        self.call_hook = call_hook
        self.v = vname

    def sw(self, e: A.Expr) -> int:
        if isinstance(e, A.Call) and e.name in ("$countones",):
            return 32
        return self_width(e, self.signals)

    def signal(self, name: str) -> FlatSignal:
        try:
            return self.signals[name]
        except KeyError:
            raise SimulationError(f"unknown signal '{name}'") from None

    # reads

    def gen(self, e: A.Expr, w: Optional[int] = None) -> str:
        if w is None:
            w = self.sw(e)
        m = _mask(w)
        v = self.v
        if isinstance(e, A.Number):
            return str(e.value & m)
        if isinstance(e, A.Ident):
            sig = self.signal(e.name)
            if sig.is_array:
                raise SimulationError(f"array '{e.name}' used without an index")
            return f"{v}[{self.slots[e.name]}]"
        if isinstance(e, A.Index):
            arr = self._array_of(e)
            if arr is not None:
                return self._array_read(arr, e.index)
            b = self.gen(e.base)
            msb, lsb = self._packed_range(e.base)
            k = _const(e.index)
            if k is not None:
                off = self._offset(msb, lsb, k)
                return f"(({b} >> {off}) & 1)" if 0 <= off < self.sw(e.base) else "0"
            return f"_bit({b}, {self._offset_expr(msb, lsb, self.gen(e.index))}, {self.sw(e.base)})"
        if isinstance(e, (A.Slice, A.IndexedSlice)):
            if self._array_of(e) is not None:
                raise SimulationError("part-select of an unpacked array")
            b = self.gen(e.base)
            sh, width = self._slice_shift(e)
            return f"(_shr({b}, {sh}) & {_mask(width)})"
        if isinstance(e, A.Concat):
            parts, acc = [], 0
            for it in reversed(e.items):
                iw = self.sw(it)
                parts.append(f"({self.gen(it, iw)} << {acc})" if acc else self.gen(it, iw))
                acc += iw
            return "(" + " | ".join(reversed(parts)) + ")"
        if isinstance(e, A.Repl):
            n = const_eval(e.count, {})
            inner = A.Concat(e.items)
            return f"_repl({self.gen(inner)}, {self.sw(inner)}, {n})"
        if isinstance(e, A.Unary):
            op = e.op
            if op == "+":
                return self.gen(e.operand, w)
            if op == "-":
                return f"((-{self.gen(e.operand, w)}) & {m})"
            if op == "~":
                return f"(~{self.gen(e.operand, w)} & {m})"
            ow = self.sw(e.operand)
            x = self.gen(e.operand, ow)
            if op == "!":
                return f"(0 if {x} else 1)"
            if op == "&":
                return f"(1 if {x} == {_mask(ow)} else 0)"
            if op == "~&":
                return f"(0 if {x} == {_mask(ow)} else 1)"
            if op == "|":
                return f"(1 if {x} else 0)"
            if op == "~|":
                return f"(0 if {x} else 1)"
            if op == "^":
                return f"_par({x})"
            return f"(1 - _par({x}))"
        if isinstance(e, A.Binary):
            op = e.op
            if op in ("&&", "||"):
                a, b = self.gen(e.left), self.gen(e.right)
                return f"(1 if ({a} {'and' if op == '&&' else 'or'} {b}) else 0)"
            if op in _CMP:
                cw = max(self.sw(e.left), self.sw(e.right))
                return f"(1 if {self.gen(e.left, cw)} {_CMP[op]} {self.gen(e.right, cw)} else 0)"
            if op in ("<<", "<<<"):
                return f"_shl({self.gen(e.left, w)}, {self.gen(e.right)}, {m})"
            if op in (">>", ">>>"):
                return f"({self.gen(e.left, w)} >> {self.gen(e.right)})"
            if op == "**":
                return f"pow({self.gen(e.left, w)}, {self.gen(e.right)}, {m + 1})"
            a, b = self.gen(e.left, w), self.gen(e.right, w)
            if op == "+":
                return f"(({a} + {b}) & {m})"
            if op == "-":
                return f"(({a} - {b}) & {m})"
            if op == "*":
                return f"(({a} * {b}) & {m})"
            if op == "/":
                return f"_div({a}, {b})"
            if op == "%":
                return f"_mod({a}, {b})"
            if op == "&":
                return f"({a} & {b})"
            if op == "|":
                return f"({a} | {b})"
            if op == "^":
                return f"({a} ^ {b})"
            if op in ("~^", "^~"):
                return f"(~({a} ^ {b}) & {m})"
            raise SimulationError(f"unsupported operator '{op}'")
        if isinstance(e, A.Cond):
            return f"({self.gen(e.then, w)} if {self.gen(e.cond)} else {self.gen(e.other, w)})"
        if isinstance(e, A.Call):
            if self.call_hook is not None:
                out = self.call_hook(self, e, w)
                if out is not None:
                    return out
            if e.name == "$countones":
                return f"bin({self.gen(e.args[0])}).count('1')"
            if e.name == "$onehot":
                return f"(1 if bin({self.gen(e.args[0])}).count('1') == 1 else 0)"
            if e.name == "$onehot0":
                return f"(1 if bin({self.gen(e.args[0])}).count('1') <= 1 else 0)"
            raise SimulationError(f"system function {e.name} is not supported here")
        raise SimulationError(f"cannot simulate {type(e).__name__}")

    def _array_of(self, e: A.Expr) -> Optional[FlatSignal]:
        if isinstance(e.base, A.Ident):
            sig = self.signal(e.base.name)
            if sig.is_array:
                return sig
        return None

    def _array_read(self, arr: FlatSignal, index: A.Expr) -> str:
        base = self.slots[arr.path]
        k = _const(index)
        if k is not None:
            i = k - arr.array_lo
            return f"{self.v}[{base + i}]" if 0 <= i < arr.depth else "0"
        return f"_arr({self.v}, {base}, {arr.depth}, {self.gen(index)} - {arr.array_lo})"

    def _packed_range(self, e: A.Expr) -> tuple[int, int]:
        if isinstance(e, A.Ident):
            s = self.signal(e.name)
            return s.msb, s.lsb
        if isinstance(e, A.Index) and self._array_of(e) is not None:
            s = self._array_of(e)
            return s.msb, s.lsb
        return self.sw(e) - 1, 0

    @staticmethod
    def _offset(msb: int, lsb: int, k: int) -> int:
        return k - lsb if msb >= lsb else lsb - k

    @staticmethod
    def _offset_expr(msb: int, lsb: int, code: str) -> str:
        return f"({code} - {lsb})" if msb >= lsb else f"({lsb} - {code})"

    def _slice_shift(self, e) -> tuple[str, int]:
        msb, lsb = self._packed_range(e.base)
        if isinstance(e, A.Slice):
            hi, lo = const_eval(e.msb, {}), const_eval(e.lsb, {})
            width = abs(hi - lo) + 1
            return str(min(self._offset(msb, lsb, hi), self._offset(msb, lsb, lo))), width
        width = const_eval(e.width, {})
        start = self.gen(e.start)
        if msb >= lsb:
            first = start if e.ascending else f"({start} - {width - 1})"
            return f"({first} - {lsb})", width
        last = f"({start} + {width - 1})" if e.ascending else start
        return f"({lsb} - {last})", width

    # writes

    def write(self, lhs: A.Expr, val: str, target: str, out: list, pad: str, tmp: Callable[[], str]) -> None:
        """Emit statements storing ``val`` (already masked to the lhs width) into ``lhs``."""
        if isinstance(lhs, A.Ident):
            sig = self.signal(lhs.name)
            if sig.is_array:
                raise SimulationError(f"assignment to whole array '{lhs.name}'")
            out.append(f"{pad}{target}[{self.slots[lhs.name]}] = {val}")
            return
        if isinstance(lhs, A.Concat):
            t = tmp()
            out.append(f"{pad}{t} = {val}")
            for it in reversed(lhs.items):
                iw = self.sw(it)
                self.write(it, f"({t} & {_mask(iw)})", target, out, pad, tmp)
                out.append(f"{pad}{t} >>= {iw}")
            return
        if isinstance(lhs, A.Index) and self._array_of(lhs) is not None:
            arr = self._array_of(lhs)
            base = self.slots[arr.path]
            k = _const(lhs.index)
            if k is not None:
                i = k - arr.array_lo
                if 0 <= i < arr.depth:
                    out.append(f"{pad}{target}[{base + i}] = {val}")
                return
            t = tmp()
            out.append(f"{pad}{t} = {self.gen(lhs.index)} - {arr.array_lo}")
            out.append(f"{pad}if 0 <= {t} < {arr.depth}: {target}[{base} + {t}] = {val}")
            return
        if isinstance(lhs, (A.Index, A.Slice, A.IndexedSlice)):
            if self._array_of(lhs) is not None:
                raise SimulationError("part-select of an unpacked array")
            slot = self._slot_expr(lhs.base, out, pad, tmp)
            if slot is None:
                return
            bw = self.sw(lhs.base)
            if isinstance(lhs, A.Index):
                msb, lsb = self._packed_range(lhs.base)
                sh, width = self._offset_expr(msb, lsb, self.gen(lhs.index)), 1
            else:
                sh, width = self._slice_shift(lhs)
            s = tmp()
            out.append(f"{pad}{s} = {sh}")
            out.append(f"{pad}if 0 <= {s} < {bw}: {target}[{slot}] = (({target}[{slot}] & ~({_mask(width)} << {s}))"
                       f" | (({val} & {_mask(width)}) << {s})) & {_mask(bw)}")
            return
        raise SimulationError("unsupported assignment target")

    def _slot_expr(self, base: A.Expr, out: list, pad: str, tmp) -> Optional[str]:
        if isinstance(base, A.Ident):
            return str(self.slots[base.name])
        if isinstance(base, A.Index) and self._array_of(base) is not None:
            arr = self._array_of(base)
            b = self.slots[arr.path]
            k = _const(base.index)
            if k is not None:
                i = k - arr.array_lo
                return str(b + i) if 0 <= i < arr.depth else None
            t = tmp()
            out.append(f"{pad}{t} = {b} + min(max({self.gen(base.index)} - {arr.array_lo}, 0), {arr.depth - 1})")
            return t
        raise SimulationError("unsupported nested select in assignment target")


def definitely_assigned(s: A.Stmt) -> set:
    """Names fully written on every path through ``s``."""
    if isinstance(s, A.Assign):
        return {s.lhs.name} if isinstance(s.lhs, A.Ident) else set()
    if isinstance(s, A.Block):
        out = set()
        for c in s.stmts:
            out |= definitely_assigned(c)
        return out
    if isinstance(s, A.If):
        if s.other is None:
            return set()
        return definitely_assigned(s.then) & definitely_assigned(s.other)
    if isinstance(s, A.Case):
        if not any(it.labels is None for it in s.items):
            return set()
        sets = [definitely_assigned(it.body) for it in s.items]
        return set.intersection(*sets) if sets else set()
    return set()


def _stmt_targets(s: A.Stmt) -> set:
    out = set()
    for x in A.iter_stmts(s):
        if isinstance(x, A.Assign):
            out |= A.lvalue_target_names(x.lhs)
    return out


def _stmt_reads(s: A.Stmt) -> set:
    out = set()
    for x in A.iter_stmts(s):
        if isinstance(x, A.Assign):
            out |= A.expr_names(x.rhs) | A.lvalue_read_names(x.lhs)
        elif isinstance(x, A.If):
            out |= A.expr_names(x.cond)
        elif isinstance(x, A.Case):
            out |= A.expr_names(x.subject)
            for it in x.items:
                for lab in it.labels or ():
                    out |= A.expr_names(lab)
    return out


@dataclass
class SeqInfo:
    clocks: list  # [(edge, path)]
    async_controls: list  # [(edge, path)]


class CompiledDesign:
    """A flattened design compiled to Python for fast cycle simulation."""

    SETTLE_LIMIT = 64

    def __init__(self, flat: FlatDesign, reset_signals: Optional[dict] = None):
        self.flat = flat
        self.signals = flat.signals
        self.slots: dict = {}
        self.slot_names: list = []
        for path, sig in flat.signals.items():
            self.slots[path] = len(self.slot_names)
            if sig.is_array:
                for i in range(sig.depth):
                    self.slot_names.append(f"{path}[{sig.array_lo + i}]")
            else:
                self.slot_names.append(path)
        self.nslots = len(self.slot_names)
        self.slot_width = []
        for path, sig in flat.signals.items():
            self.slot_width.extend([sig.width] * (sig.depth or 1))
        self.gen = ExprGen(flat.signals, self.slots)
        self._tmp = 0
        self.seq_info: list = []
        self._build(reset_signals or {})

    def _new_tmp(self) -> str:
        self._tmp += 1
        return f"_t{self._tmp}"

    def slots_of(self, path: str) -> list:
        sig = self.signals[path]
        b = self.slots[path]
        return list(range(b, b + (sig.depth or 1)))

    # statement translation

    def _stmt(self, s: A.Stmt, out: list, depth: int, nb_target: str) -> None:
        pad = "    " * depth
        if isinstance(s, A.Assign):
            lw = self.gen.sw(s.lhs)
            w = max(lw, self.gen.sw(s.rhs))
            t = self._new_tmp()
            out.append(f"{pad}{t} = {self.gen.gen(s.rhs, w)} & {_mask(lw)}")
            self.gen.write(s.lhs, t, "v" if s.blocking else nb_target, out, pad, self._new_tmp)
        elif isinstance(s, A.Block):
            if not s.stmts:
                out.append(f"{pad}pass")
            for c in s.stmts:
                self._stmt(c, out, depth, nb_target)
        elif isinstance(s, A.If):
            out.append(f"{pad}if {self.gen.gen(s.cond)}:")
            self._stmt(s.then, out, depth + 1, nb_target)
            if s.other is not None:
                out.append(f"{pad}else:")
                self._stmt(s.other, out, depth + 1, nb_target)
        elif isinstance(s, A.Case):
            labels = [lab for it in s.items for lab in (it.labels or ())]
            cw = max([self.gen.sw(s.subject)] + [self.gen.sw(x) for x in labels])
            t = self._new_tmp()
            out.append(f"{pad}{t} = {self.gen.gen(s.subject, cw)}")
            kw = "if"
            for it in s.items:
                if it.labels is None:
                    continue
                conds = " or ".join(f"{t} == {self.gen.gen(x, cw)}" for x in it.labels)
                out.append(f"{pad}{kw} {conds}:")
                self._stmt(it.body, out, depth + 1, nb_target)
                kw = "elif"
            default = next((it for it in s.items if it.labels is None), None)
            if default is not None:
                if kw == "if":
                    self._stmt(default.body, out, depth, nb_target)
                else:
                    out.append(f"{pad}else:")
                    self._stmt(default.body, out, depth + 1, nb_target)
        elif isinstance(s, A.NullStmt):
            out.append(f"{pad}pass")
        else:
            raise SimulationError(f"cannot simulate statement {type(s).__name__}")

    def _build(self, reset_signals: dict) -> None:
        flat = self.flat
        comb_procs = [p for p in flat.processes if p.kind != "seq"]
        seq_procs = [p for p in flat.processes if p.kind == "seq"]

        # ordering of combinational processes by word-level dependencies
        writes, reads = [], []
        for p in comb_procs:
            if p.kind in ("assign", "port"):
                writes.append(A.lvalue_target_names(p.lhs))
                reads.append(A.expr_names(p.rhs) | A.lvalue_read_names(p.lhs))
            else:
                writes.append(_stmt_targets(p.body))
                reads.append(_stmt_reads(p.body))
        writers: dict = {}
        for i, ws in enumerate(writes):
            for n in ws:
                writers.setdefault(n, []).append(i)
        ts = graphlib.TopologicalSorter()
        for i in range(len(comb_procs)):
            ts.add(i)
            for n in reads[i]:
                for j in writers.get(n, ()):
                    if j != i:
                        ts.add(i, j)
        try:
            order = list(ts.static_order())
            self.comb_cyclic = False
        except graphlib.CycleError:
            order = list(range(len(comb_procs)))
            self.comb_cyclic = True

        latch_names = set()
        comb_written = set()
        for p, ws in zip(comb_procs, writes):
            comb_written |= ws
            if p.kind == "comb":
                latch_names |= ws - definitely_assigned(p.body)

        lines = ["def comb(v):"]
        for i in order:
            p = comb_procs[i]
            if p.kind in ("assign", "port"):
                lw = self.gen.sw(p.lhs)
                w = max(lw, self.gen.sw(p.rhs))
                t = self._new_tmp()
                lines.append(f"    {t} = {self.gen.gen(p.rhs, w)} & {_mask(lw)}")
                self.gen.write(p.lhs, t, "v", lines, "    ", self._new_tmp)
            else:
                self._stmt(p.body, lines, 1, "v")
        lines.append("    return None")

        seq_written = set()
        nb_names = set()
        edge_lines = ["def edge(v):", "    nv = v[:]"]
        async_lines = ["def async_resets(v):", "    fired = False"]
        self.clock_signals = set()
        for p in seq_procs:
            body_reads = _stmt_reads(p.body)
            controls = [(e, s) for e, s in p.sensitivity if s in body_reads]
            clocks = [(e, s) for e, s in p.sensitivity if s not in body_reads]
            if not clocks:
                clocks, controls = [p.sensitivity[0]], list(p.sensitivity[1:])
            self.seq_info.append(SeqInfo(clocks, controls))
            self.clock_signals |= {s for _, s in clocks}
            seq_written |= _stmt_targets(p.body)
            for x in A.iter_stmts(p.body):
                if isinstance(x, A.Assign) and not x.blocking:
                    nb_names |= A.lvalue_target_names(x.lhs)
            self._stmt(p.body, edge_lines, 1, "nv")
            if controls:
                tests = " or ".join(
                    f"{self.gen.gen(A.Ident(s))} {'== 1' if e == 'pos' else '== 0'}" for e, s in controls)
                targets = sorted(_stmt_targets(p.body))
                snap = ", ".join(f"v[{k}]" for n in targets for k in self.slots_of(n)) or "0"
                async_lines.append(f"    if {tests}:")
                async_lines.append(f"        _before = ({snap},)")
                self._stmt(p.body, async_lines, 2, "v")
                async_lines.append(f"        if ({snap},) != _before: fired = True")
        nb_slots = sorted(k for n in nb_names for k in self.slots_of(n))
        for k in nb_slots:
            edge_lines.append(f"    v[{k}] = nv[{k}]")
        edge_lines.append("    return None")
        async_lines.append("    return fired")

        state_names = seq_written | latch_names
        self.state_slots = sorted(k for n in state_names for k in self.slots_of(n))
        self.state_names = sorted(state_names)
        self.comb_slots = sorted(k for n in comb_written for k in self.slots_of(n))
        top_in = [s for s in flat.top_inputs()]
        roots = {}
        for p in flat.processes:
            if p.kind == "port" and isinstance(p.rhs, A.Ident) and isinstance(p.lhs, A.Ident):
                roots[p.lhs.name] = p.rhs.name

        def root(n):
            seen = set()
            while n in roots and n not in seen:
                seen.add(n)
                n = roots[n]
            return n

        self.alias_root = root
        clock_roots = {root(c) for c in self.clock_signals}
        self.clock_inputs = [s.path for s in top_in if s.path in clock_roots]
        self.free_inputs = [s.path for s in top_in if s.path not in clock_roots]
        self.input_slots = [self.slots[p] for p in self.free_inputs]
        self.input_widths = [self.signals[p].width for p in self.free_inputs]

        ns: dict = dict(RUNTIME)
        src = "\n".join(lines + [""] + edge_lines + [""] + async_lines) + "\n"
        self.source = src
        exec(compile(src, f"<design {flat.top}>", "exec"), ns)
        self._comb = ns["comb"]
        self._edge = ns["edge"]
        self._async = ns["async_resets"]
        self.reset_levels = dict(reset_signals)

    # simulation primitives

    def settle(self, v: list) -> None:
        for _ in range(self.SETTLE_LIMIT):
            if self.comb_cyclic:
                self._comb_fixpoint(v)
            else:
                self._comb(v)
            if not self._async(v):
                return
        raise SimulationError("asynchronous reset did not settle")

    def _comb_fixpoint(self, v: list) -> None:
        slots = self.comb_slots
        for _ in range(len(self.flat.processes) + 2):
            before = [v[k] for k in slots]
            self._comb(v)
            if [v[k] for k in slots] == before:
                return
        raise SimulationError("combinational loop does not converge")

    def load(self, state: tuple, inputs: tuple) -> list:
        v = [0] * self.nslots
        for k, x in zip(self.state_slots, state):
            v[k] = x
        for k, x in zip(self.input_slots, inputs):
            v[k] = x
        self.settle(v)
        return v

    def clock(self, v: list) -> tuple:
        self._edge(v)
        return tuple(v[k] for k in self.state_slots)

    def initial_state(self) -> tuple:
        """State after one clock edge with every reset input held active."""
        zero = tuple(0 for _ in self.state_slots)
        inputs = tuple(self.reset_levels.get(p, 0) for p in self.free_inputs)
        v = self.load(zero, inputs)
        return self.clock(v)

    def snapshot(self, v: list, slots=None) -> dict:
        idx = range(self.nslots) if slots is None else slots
        return {self.slot_names[k]: v[k] for k in idx}


def reset_levels(flat: FlatDesign, graph) -> dict:
    """Active level for each top-level input that acts as a reset somewhere."""
    roots = {}
    for p in flat.processes:
        if p.kind == "port" and isinstance(p.rhs, A.Ident) and isinstance(p.lhs, A.Ident):
            roots[p.lhs.name] = p.rhs.name
    levels: dict = {}
    for info in graph.flops.values():
        if info.reset is None:
            continue
        n = info.reset.signal
        seen = set()
        while n in roots and n not in seen:
            seen.add(n)
            n = roots[n]
        sig = flat.signals.get(n)
        if sig is not None and "." not in n and sig.direction == "in":
            levels.setdefault(n, 1 if info.reset.polarity == "active-high" else 0)
    return levels
