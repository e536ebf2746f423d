"""Built-in bounded model checker.

Exploration is breadth-first over the product of the design state (restricted
to the property's cone of influence) and the monitor state, enumerating every
valuation of the free inputs in the cone each cycle. Breadth-first order makes
the first counterexample cycle-minimal. Product states are deduplicated across
depths; when a layer adds no new state the reachable space is exhausted and the
verdict holds at every depth.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from typing import Optional

from ..rtl.diagnostics import Diagnostic
from ..structure.graph import cone
from .monitor import MonitorAutomaton
from .result import ProofResult, PropertyResult, Trace
from .sim import SimulationError
from .sva import PropertyAst, compile_assertions


@dataclass(frozen=True)
class Budget:
    depth: int = 32
    path_budget: int = 1 << 16
    random_runs: int = 1000
    wall_time: float = 30.0
    seed: int = 0

    def to_json(self) -> dict:
        return {"depth": self.depth, "path_budget": self.path_budget, "random_runs": self.random_runs,
                "wall_time": self.wall_time, "seed": self.seed}


DEFAULT_BUDGET = Budget()


class _Timeout(Exception):
    pass


@dataclass
class Outcome:
    status: str  # proven | falsified | undetermined
    exhaustive: bool
    fired: bool
    cex_inputs: Optional[list] = None  # input tuples per cycle
    witness_inputs: Optional[list] = None
    depth_reached: int = 0
    message: str = ""


class PropertyChecker:
    """Everything needed to explore one property on one design."""

    def __init__(self, design, prop: PropertyAst, monitor: Optional[MonitorAutomaton] = None):
        self.design = design
        self.prop = prop
        self.sim = design.sim
        self.monitor = monitor or MonitorAutomaton(prop, design)
        graph = design.graph
        names = set(self.monitor.signals)
        coi = set(names)
        for n in names:
            coi |= set(cone(graph, n, "fanin"))
        self.coi = coi
        sim = self.sim
        self.inputs = [p for p in sim.free_inputs if p in coi]
        self.input_widths = [sim.signals[p].width for p in self.inputs]
        self.input_bits = sum(self.input_widths)
        pos = {p: i for i, p in enumerate(sim.free_inputs)}
        self._input_pos = [pos[p] for p in self.inputs]
        state_index = {k: i for i, k in enumerate(sim.state_slots)}
        self._key_idx = [state_index[k] for n in sorted(coi) if n in sim.signals
                         for k in sim.slots_of(n) if k in state_index]
        self.trace_slots = sorted({k for n in coi if n in sim.signals for k in sim.slots_of(n)})
        self.trace_signals = [sim.slot_names[k] for k in self.trace_slots]

    # helpers

    def full_inputs(self, local: tuple) -> tuple:
        vals = [0] * len(self.sim.free_inputs)
        for p, x in zip(self._input_pos, local):
            vals[p] = x
        return tuple(vals)

    def _valuations(self):
        ranges = [range(1 << w) for w in self.input_widths]
        return itertools.product(*ranges)

    def start(self):
        sim = self.sim
        zero = tuple(0 for _ in sim.state_slots)
        reset_inputs = tuple(sim.reset_levels.get(p, 0) for p in sim.free_inputs)
        v = sim.load(zero, reset_inputs)
        m0 = self.monitor.initial(v)
        s0 = sim.clock(v)
        return s0, m0

    def key(self, state: tuple, mstate: tuple) -> tuple:
        return tuple(state[i] for i in self._key_idx), mstate

    # exploration

    def bfs(self, budget: Budget, deadline: float) -> Outcome:
        sim, mon = self.sim, self.monitor
        s0, m0 = self.start()
        per_state = 1 << self.input_bits
        k0 = self.key(s0, m0)
        parents = {k0: None}
        frontier = [(k0, s0, m0)]
        explored = 0
        fired_at = None
        vals = list(self._valuations()) if per_state <= budget.path_budget else None
        full = [self.full_inputs(x) for x in vals] if vals is not None else None
        for depth in range(budget.depth):
            if explored + len(frontier) * per_state > budget.path_budget:
                return Outcome("undetermined", False, fired_at is not None,
                               witness_inputs=self._path(parents, fired_at) if fired_at else None,
                               depth_reached=depth,
                               message=f"path budget {budget.path_budget} exhausted at depth {depth}")
            nxt = []
            for key, state, ms in frontier:
                for local, inp in zip(vals, full):
                    explored += 1
                    if explored & 1023 == 0 and time.monotonic() > deadline:
                        raise _Timeout(depth)
                    v = sim.load(state, inp)
                    ms2, violated, fired = mon.step(ms, v)
                    if fired and fired_at is None:
                        fired_at = (key, local)
                    if violated:
                        return Outcome("falsified", False, fired_at is not None,
                                       cex_inputs=self._path(parents, (key, local)), depth_reached=depth + 1)
                    s2 = sim.clock(v)
                    k2 = self.key(s2, ms2)
                    if k2 not in parents:
                        parents[k2] = (key, local)
                        nxt.append((k2, s2, ms2))
            frontier = nxt
            if not frontier:
                return Outcome("proven", True, fired_at is not None,
                               witness_inputs=self._path(parents, fired_at) if fired_at else None,
                               depth_reached=depth + 1, message="state space exhausted")
        return Outcome("proven", True, fired_at is not None,
                       witness_inputs=self._path(parents, fired_at) if fired_at else None,
                       depth_reached=budget.depth)

    @staticmethod
    def _path(parents: dict, last) -> list:
        """Input sequence from the start state through the transition ``last``."""
        seq = []
        cur = last
        while cur is not None:
            key, local = cur
            seq.append(local)
            cur = parents[key]
        seq.reverse()
        return seq

    def random_search(self, budget: Budget, deadline: float, need_witness: bool):
        """Random simulation; returns (cex_inputs or None, witness_inputs or None)."""
        rng = random.Random(budget.seed)
        sim, mon = self.sim, self.monitor
        s0, m0 = self.start()
        witness = None
        for _ in range(budget.random_runs):
            if time.monotonic() > deadline:
                break
            state, ms = s0, m0
            seq = []
            for _cycle in range(budget.depth):
                local = tuple(rng.getrandbits(w) for w in self.input_widths)
                seq.append(local)
                v = sim.load(state, self.full_inputs(local))
                ms, violated, fired = mon.step(ms, v)
                if fired and witness is None:
                    witness = list(seq)
                if violated:
                    return list(seq), witness
                state = sim.clock(v)
        return None, witness

    def replay(self, inputs: list) -> tuple[list, Optional[int], Optional[int]]:
        """Simulate an input sequence; returns (rows, first violation, first firing)."""
        sim, mon = self.sim, self.monitor
        state, ms = self.start()
        rows = []
        violation = fired_at = None
        for cycle, local in enumerate(inputs):
            v = sim.load(state, self.full_inputs(local))
            rows.append({sim.slot_names[k]: v[k] for k in self.trace_slots})
            ms, violated, fired = mon.step(ms, v)
            if fired and fired_at is None:
                fired_at = cycle
            if violated and violation is None:
                violation = cycle
            state = sim.clock(v)
        return rows, violation, fired_at

    def make_trace(self, inputs: list, mark: str = "violation") -> Trace:
        rows, violation, fired_at = self.replay(inputs)
        at = violation if mark == "violation" else fired_at
        if at is None:
            raise SimulationError("replayed input sequence does not reproduce the recorded event")
        return Trace(list(self.trace_signals), rows[:at + 1], at, list(self.inputs))


def replay_trace(design, prop: PropertyAst, trace: Trace) -> Optional[int]:
    """First violating cycle when the trace's input columns drive the design, else None."""
    pc = PropertyChecker(design, prop)
    inputs = []
    for row in trace.rows:
        inputs.append(tuple(row.get(p, 0) for p in pc.inputs))
    _, violation, _ = pc.replay(inputs)
    return violation


def check_property(design, label: str, prop: PropertyAst, budget: Budget = DEFAULT_BUDGET) -> PropertyResult:
    start = time.monotonic()
    deadline = start + budget.wall_time
    try:
        pc = PropertyChecker(design, prop)
    except SimulationError as exc:
        return PropertyResult(label, "undetermined", "unknown", message=f"checker error: {exc}")
    try:
        out = pc.bfs(budget, deadline)
    except _Timeout as exc:
        out = Outcome("undetermined", False, False, depth_reached=exc.args[0],
                      message=f"wall time {budget.wall_time}s exceeded")
    if out.status == "falsified":
        trace = pc.make_trace(out.cex_inputs)
        return PropertyResult(label, "falsified", None, trace,
                              f"assertion fails at cycle {trace.violating_cycle}", bound=budget.depth)
    if out.status == "proven":
        vac = "non_vacuous" if out.fired else "vacuous"
        witness = pc.make_trace(out.witness_inputs, mark="fired") if out.fired else None
        msg = out.message or f"no violation within {budget.depth} cycles"
        return PropertyResult(label, "proven", vac, None, msg, witness, bound=budget.depth)
    cex, wit = pc.random_search(budget, deadline, not out.fired)
    if cex is not None:
        trace = pc.make_trace(cex)
        return PropertyResult(label, "falsified", None, trace,
                              f"assertion fails at cycle {trace.violating_cycle} (random simulation)",
                              bound=budget.depth)
    fired_inputs = out.witness_inputs if out.fired else wit
    vac = "non_vacuous" if fired_inputs is not None else "unknown"
    witness = pc.make_trace(fired_inputs, mark="fired") if fired_inputs is not None else None
    return PropertyResult(label, "undetermined", vac, None, out.message, witness, bound=budget.depth)


def prove(design, candidate, budget: Budget = DEFAULT_BUDGET) -> ProofResult:
    """Check every assertion of ``candidate`` against ``design``.

    A compile failure in any assertion fails the whole job, mirroring how a
    formal tool rejects a bind file: ``compile_ok`` is false and no property
    verdicts are produced.
    """
    try:
        props, diags = compile_assertions(design, candidate)
    except Exception as exc:  # design-side failures (elaboration, simulation setup)
        return ProofResult(False, [Diagnostic("<design>", 0, 0, "error", str(exc))], [], 0)
    if diags:
        return ProofResult(False, diags, [], 0)
    results = []
    for label, prop in props:
        try:
            results.append(check_property(design, label, prop, budget))
        except SimulationError as exc:
            results.append(PropertyResult(label, "undetermined", "unknown", message=f"checker error: {exc}"))
    return ProofResult(True, [], results, budget.depth)


def vacuity_check(design, prop: PropertyAst, budget: Budget = DEFAULT_BUDGET) -> str:
    return check_property(design, "p", prop, budget).vacuity or "unknown"
