"""Independent oracles used by the tests.

Nothing here imports the checker, the monitor or the simulator: designs are
re-modelled by hand in Python and properties are evaluated naively on complete
traces by enumerating sequence match ends.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional


# exhaustive trace enumeration over hand-written reference models

@dataclass
class RefModel:
    inputs: list  # [(name, width)] in a fixed order
    reset: dict  # input -> active level during the reset cycle
    init: dict  # register -> value before the reset clock
    sample: Callable  # (state, inputs) -> dict of every observable signal
    step: Callable  # (state, inputs) -> next state


@dataclass
class RefTrace:
    reset_row: dict
    rows: list
    inputs: list = field(default_factory=list)

    def val(self, sig: str, t: int) -> int:
        return self.rows[t][sig] if t >= 0 else self.reset_row[sig]

    def past(self, sig: str, t: int, n: int = 1) -> int:
        return self.val(sig, t - n)


def enumerate_traces(model: RefModel, depth: int):
    """Every trace of ``depth`` cycles, one per input sequence."""
    names = [n for n, _ in model.inputs]
    widths = [w for _, w in model.inputs]
    per_cycle = list(itertools.product(*[range(1 << w) for w in widths]))
    reset_in = {n: model.reset.get(n, 0) for n in names}
    state0 = dict(model.init)
    reset_row = model.sample(state0, reset_in)
    after_reset = model.step(state0, reset_in)
    for seq in itertools.product(per_cycle, repeat=depth):
        state = after_reset
        rows = []
        for vals in seq:
            inp = dict(zip(names, vals))
            rows.append(model.sample(state, inp))
            state = model.step(state, inp)
        yield RefTrace(reset_row, rows, [dict(zip(names, v)) for v in seq])


# naive property semantics

Pred = Callable[[RefTrace, int], bool]


@dataclass
class NaiveProp:
    consequent: list  # [(lo, hi, pred)]; the first step's delay is relative to the start cycle
    antecedent: Optional[list] = None
    overlapped: bool = True
    disable: Optional[Pred] = None


def _ends(steps, start: int, n: int, tr: RefTrace):
    """(match ends inside the trace, some branch runs past the end, last cycle examined)."""
    cur = {start}
    pending = False
    last = start
    for lo, hi, pred in steps:
        nxt = set()
        for c in cur:
            for d in range(lo, hi + 1):
                p = c + d
                if p >= n:
                    pending = True
                    continue
                last = max(last, p)
                if pred(tr, p):
                    nxt.add(p)
        cur = nxt
    return cur, pending, last


def _enabled(prop: NaiveProp, tr: RefTrace, a: int, b: int) -> bool:
    if prop.disable is None:
        return True
    return not any(prop.disable(tr, t) for t in range(a, b + 1))


def first_violation(prop: NaiveProp, tr: RefTrace) -> Optional[int]:
    n = len(tr.rows)
    best = None
    for t in range(n):
        if prop.antecedent is None:
            ends = {t}
        else:
            ends, _, _ = _ends(prop.antecedent, t, n, tr)
        for e in ends:
            s = e if prop.overlapped or prop.antecedent is None else e + 1
            if s >= n:
                continue
            found, pending, last = _ends(prop.consequent, s, n, tr)
            if found or pending:
                continue
            if _enabled(prop, tr, t, last) and (best is None or last < best):
                best = last
    return best


def fires(prop: NaiveProp, tr: RefTrace) -> bool:
    n = len(tr.rows)
    for t in range(n):
        if prop.antecedent is None:
            if _enabled(prop, tr, t, t):
                return True
            continue
        ends, _, _ = _ends(prop.antecedent, t, n, tr)
        if any(_enabled(prop, tr, t, e) for e in ends):
            return True
    return False


def exhaustive_verdict(model: RefModel, prop: NaiveProp, depth: int) -> dict:
    """Ground truth to ``depth``: status, minimal violating cycle and whether the antecedent ever fires."""
    min_fail = None
    fired = False
    count = 0
    for tr in enumerate_traces(model, depth):
        count += 1
        f = first_violation(prop, tr)
        if f is not None and (min_fail is None or f < min_fail):
            min_fail = f
        if not fired and fires(prop, tr):
            fired = True
    status = "falsified" if min_fail is not None else "proven"
    return {"status": status, "cycle": min_fail, "fired": fired, "traces": count}


def always(pred: Pred) -> list:
    return [(0, 0, pred)]


def sig(name: str, value: int = 1) -> Pred:
    return lambda tr, t: tr.val(name, t) == value


# structural oracles

def reach(succ: dict, seed, depth: Optional[int] = None) -> set:
    """Plain BFS reachability; the seed itself is never included."""
    seen = set()
    frontier = [seed]
    level = 0
    while frontier and (depth is None or level < depth):
        nxt = []
        for u in frontier:
            for v in succ.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
        level += 1
    seen.discard(seed)
    return seen


# metrics oracles

def func_at_k_enum(outcomes, k: int) -> float:
    """Fraction of k-subsets of trials that contain at least one success."""
    subsets = list(itertools.combinations(range(len(outcomes)), k))
    hit = sum(1 for s in subsets if any(outcomes[i] for i in s))
    return hit / len(subsets)


def recompute_metrics(reports) -> dict:
    """Spreadsheet-style recomputation: plain loops over rows sorted by (case, trial)."""
    rows = sorted(reports, key=lambda r: (r.case_id, r.trial_index))
    n = len(rows)
    syn = fun = 0.0
    for r in rows:
        syn += r.syntax_score
        fun += r.functionality
    out = {"syntax": 100 * syn / n, "functionality": 100 * fun / n,
           "proven": sum(r.proven for r in rows), "falsified": sum(r.falsified for r in rows),
           "undetermined": sum(r.undetermined for r in rows)}
    groups: dict = {}
    for r in rows:
        groups.setdefault(r.case_id, []).append(r.func_success)
    for k in (1, 5):
        vals = [func_at_k_enum(g, k) for g in groups.values() if len(g) >= k]
        out[f"func@{k}"] = 100 * sum(vals) / len(vals) if vals else None
    return out


def metrics_agree(got: dict, want: dict, tol: float = 1e-9) -> bool:
    for k, w in want.items():
        g = got[k]
        if g is None or w is None:
            if g is not w:
                return False
        elif abs(g - w) > tol:
            return False
    return True
