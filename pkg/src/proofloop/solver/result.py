"""Verdict records shared by the built-in checker and the external adapter."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..rtl.diagnostics import Diagnostic

STATUSES = ("proven", "falsified", "undetermined")
VACUITY = ("vacuous", "non_vacuous", "unknown")


@dataclass
class Trace:
    signals: list  # column order
    rows: list  # one dict per cycle: signal -> int
    violating_cycle: int
    inputs: list = field(default_factory=list)  # names of the free inputs among the columns

    def __post_init__(self) -> None:
        if not 0 <= self.violating_cycle < max(len(self.rows), 1):
            raise ValueError("violating_cycle must index a trace row")

    @property
    def length(self) -> int:
        return len(self.rows)

    def value(self, cycle: int, signal: str) -> int:
        return self.rows[cycle][signal]

    def table(self) -> str:
        """Cycle-by-cycle text table (one row per cycle)."""
        head = ["cycle"] + list(self.signals)
        body = [[str(i)] + [str(r.get(s, 0)) for s in self.signals] for i, r in enumerate(self.rows)]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        lines = [" ".join(h.rjust(w) for h, w in zip(head, widths))]
        for i, row in enumerate(body):
            mark = "  <- violation" if i == self.violating_cycle else ""
            lines.append(" ".join(c.rjust(w) for c, w in zip(row, widths)) + mark)
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"signals": list(self.signals), "inputs": list(self.inputs), "length": self.length,
                "violating_cycle": self.violating_cycle,
                "rows": [[r.get(s, 0) for s in self.signals] for r in self.rows]}

    @classmethod
    def from_json(cls, d: dict) -> "Trace":
        sigs = list(d["signals"])
        rows = [dict(zip(sigs, r)) for r in d["rows"]]
        return cls(sigs, rows, d["violating_cycle"], list(d.get("inputs", [])))

    def __eq__(self, other) -> bool:
        return isinstance(other, Trace) and self.to_json() == other.to_json()


@dataclass
class PropertyResult:
    label: str
    status: str
    vacuity: Optional[str] = None
    counterexample: Optional[Trace] = None
    message: str = ""
    witness: Optional[Trace] = None  # an execution where the antecedent completes
    bound: Optional[int] = None

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"invalid status '{self.status}'")
        if self.vacuity is not None and self.vacuity not in VACUITY:
            raise ValueError(f"invalid vacuity '{self.vacuity}'")
        if (self.counterexample is not None) != (self.status == "falsified"):
            raise ValueError("counterexample present iff falsified")
        if self.vacuity is not None and self.status == "falsified":
            raise ValueError("vacuity applies only to proven or undetermined properties")

    @property
    def vacuous(self) -> Optional[bool]:
        if self.vacuity == "vacuous":
            return True
        if self.vacuity == "non_vacuous":
            return False
        return None

    def to_json(self) -> dict:
        d = {"label": self.label, "status": self.status, "vacuity": self.vacuity, "message": self.message,
             "bound": self.bound}
        d["counterexample"] = None if self.counterexample is None else self.counterexample.to_json()
        d["witness"] = None if self.witness is None else self.witness.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PropertyResult":
        cex = d.get("counterexample")
        wit = d.get("witness")
        return cls(d["label"], d["status"], d.get("vacuity"), Trace.from_json(cex) if cex else None,
                   d.get("message", ""), Trace.from_json(wit) if wit else None, d.get("bound"))


@dataclass
class ProofResult:
    compile_ok: bool
    diagnostics: list = field(default_factory=list)
    per_property: list = field(default_factory=list)
    bound_reached: int = 0

    def get(self, label: str) -> PropertyResult:
        for p in self.per_property:
            if p.label == label:
                return p
        raise KeyError(label)

    def count(self, status: str) -> int:
        return sum(1 for p in self.per_property if p.status == status)

    @property
    def proven(self) -> int:
        return self.count("proven")

    @property
    def falsified(self) -> int:
        return self.count("falsified")

    @property
    def undetermined(self) -> int:
        return self.count("undetermined")

    @property
    def vacuous(self) -> int:
        return sum(1 for p in self.per_property if p.vacuity == "vacuous")

    def all_passed(self) -> bool:
        """Compiled and nothing falsified (the repair loop's exit condition)."""
        return self.compile_ok and all(p.status in ("proven", "undetermined") for p in self.per_property)

    def to_json(self) -> dict:
        return {"compile_ok": self.compile_ok, "bound_reached": self.bound_reached,
                "diagnostics": [d.to_json() for d in self.diagnostics],
                "per_property": [p.to_json() for p in self.per_property]}

    @classmethod
    def from_json(cls, d: dict) -> "ProofResult":
        return cls(d["compile_ok"], [Diagnostic.from_json(x) for x in d.get("diagnostics", [])],
                   [PropertyResult.from_json(x) for x in d.get("per_property", [])], d.get("bound_reached", 0))

    def verdict_table(self) -> str:
        if not self.compile_ok:
            return "\n".join(["compile failed:"] + [f"  {d}" for d in self.diagnostics])
        rows = []
        for p in self.per_property:
            status = f"proven(bound={p.bound})" if p.status == "proven" and p.bound is not None else p.status
            vac = p.vacuity or "-"
            rows.append((p.label, status, vac, p.message))
        w0 = max([len("label")] + [len(r[0]) for r in rows])
        w1 = max([len("status")] + [len(r[1]) for r in rows])
        w2 = max([len("vacuity")] + [len(r[2]) for r in rows])
        out = [f"{'label'.ljust(w0)}  {'status'.ljust(w1)}  {'vacuity'.ljust(w2)}  message"]
        for r in rows:
            out.append(f"{r[0].ljust(w0)}  {r[1].ljust(w1)}  {r[2].ljust(w2)}  {r[3]}".rstrip())
        return "\n".join(out)
