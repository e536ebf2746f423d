"""Monitor automaton for one compiled property.

The monitor state is a hashable triple:

* ``ante``: pending antecedent threads, each ``(step, waited)``.
* ``obls``: pending consequent obligations, each a frozenset of threads; an
  obligation is discharged when any of its threads completes and violated when
  all of them die.
* ``hist``: sampled history for $past/$rose/$fell/$stable, newest value first.

A fresh antecedent thread starts every cycle, so every antecedent match spawns
its own obligation. ``##[m:n]`` keeps a thread alive for at most n-m+1 cycles.
"""

from __future__ import annotations

from typing import Optional

from ..rtl import ast as A
from .sim import RUNTIME, ExprGen, SimulationError
from .sva import HISTORY_CAP, PropertyAst

_START = ((0, 0),)


class MonitorAutomaton:
    def __init__(self, prop: PropertyAst, design):
        self.prop = prop
        sim = design.sim
        self.design = design
        self.ante, self.cons = prop.monitor_form()
        self.history: list = []  # [(expr, depth)]
        self._hist_index: dict = {}
        gen = ExprGen(design.flat.signals, sim.slots, call_hook=self._hook)
        self._gen = gen
        fns = []
        src_lines = []
        for name, steps in (("a", self.ante), ("c", self.cons)):
            for i, s in enumerate(steps):
                src_lines.append(f"def {name}{i}(v, h):\n    return {gen.gen(s.expr)}\n")
                fns.append(f"{name}{i}")
        if prop.disable_iff is not None:
            src_lines.append(f"def dis(v, h):\n    return {gen.gen(prop.disable_iff)}\n")
        if self.history:
            cur = ", ".join(f"({gen.gen(e)},) + h[{j}][:{d - 1}]" for j, (e, d) in enumerate(self.history))
            src_lines.append(f"def hist(v, h):\n    return ({cur},)\n")
        else:
            src_lines.append("def hist(v, h):\n    return ()\n")
        ns = dict(RUNTIME)
        self.source = "\n".join(src_lines)
        exec(compile(self.source, "<monitor>", "exec"), ns)
        self._ante_fns = [ns[f"a{i}"] for i in range(len(self.ante))]
        self._cons_fns = [ns[f"c{i}"] for i in range(len(self.cons))]
        self._dis = ns.get("dis")
        self._hist = ns["hist"]
        self._ante_bounds = [(s.lo, s.hi) for s in self.ante]
        self._cons_bounds = [(s.lo, s.hi) for s in self.cons]
        self.signals = sorted({x.name for e in prop.exprs() for x in A.iter_expr(e) if isinstance(x, A.Ident)})

    def _track(self, e: A.Expr, depth: int) -> int:
        if depth > HISTORY_CAP:
            raise SimulationError(f"history depth {depth} exceeds cap {HISTORY_CAP}")
        key = e
        if key in self._hist_index:
            j = self._hist_index[key]
            old_e, old_d = self.history[j]
            self.history[j] = (old_e, max(old_d, depth))
            return j
        self._hist_index[key] = len(self.history)
        self.history.append((e, depth))
        return len(self.history) - 1

    def _hook(self, gen: ExprGen, e: A.Call, w: int) -> Optional[str]:
        name = e.name
        if name == "$past":
            depth = 1
            if len(e.args) > 1:
                from ..rtl.elab import const_eval

                depth = const_eval(e.args[1], {})
            if depth < 1:
                raise SimulationError("$past depth must be at least 1")
            j = self._track(e.args[0], depth)
            return f"h[{j}][{depth - 1}]"
        if name in ("$rose", "$fell", "$stable", "$changed"):
            arg = e.args[0]
            j = self._track(arg, 1)
            cur = gen.gen(arg)
            if name == "$rose":
                return f"(1 if ({cur} & 1) and not (h[{j}][0] & 1) else 0)"
            if name == "$fell":
                return f"(1 if not ({cur} & 1) and (h[{j}][0] & 1) else 0)"
            if name == "$stable":
                return f"(1 if {cur} == h[{j}][0] else 0)"
            return f"(1 if {cur} != h[{j}][0] else 0)"
        if name == "$isunknown":
            gen.gen(e.args[0])
            return "0"
        return None

    # state handling

    def initial(self, v_reset: Optional[list] = None) -> tuple:
        """Empty monitor; history seeded from the reset-cycle valuation when given."""
        h = tuple(tuple(0 for _ in range(d)) for _, d in self.history)
        if v_reset is not None and self.history:
            h = self._hist(v_reset, h)
            h = tuple(tuple(x) + (0,) * (d - len(x)) for x, (_, d) in zip(h, self.history))
        return (frozenset(), frozenset(), h)

    @staticmethod
    def _advance(bounds, fns, threads, v, h) -> tuple[bool, frozenset]:
        done = False
        nxt = set()
        work = list(threads)
        seen = set()
        last = len(bounds) - 1
        cache: dict = {}
        while work:
            th = work.pop()
            if th in seen:
                continue
            seen.add(th)
            i, w = th
            lo, hi = bounds[i]
            if w >= lo:
                if i not in cache:
                    cache[i] = fns[i](v, h)
                if cache[i]:
                    if i == last:
                        done = True
                    else:
                        work.append((i + 1, 0))
            if w < hi:
                nxt.add((i, w + 1))
        return done, frozenset(nxt)

    def step(self, state: tuple, v: list) -> tuple[tuple, bool, bool]:
        """Consume one sampled cycle; returns (state', violated, antecedent_fired)."""
        ante, obls, h = state
        new_h = self._hist(v, h) if self.history else h
        if self._dis is not None and self._dis(v, h):
            return (frozenset(), frozenset(), new_h), False, False
        fired, ante_next = self._advance(self._ante_bounds, self._ante_fns, ante | frozenset(_START), v, h)
        pending = set(obls)
        if fired:
            pending.add(frozenset(_START))
        violated = False
        new_obls = set()
        for ob in pending:
            done, nxt = self._advance(self._cons_bounds, self._cons_fns, ob, v, h)
            if done:
                continue
            if not nxt:
                violated = True
                continue
            new_obls.add(nxt)
        return (ante_next, frozenset(new_obls), new_h), violated, fired
