"""Adapter for an external formal tool driven by a batch script and a text log.

Log grammar (one record per line; blank lines and ``#`` comments ignored)::

    COMPILE ok|failed
    BOUND <n>
    ERROR <file>:<line>[:<col>]: <message>
    WARNING <file>:<line>[:<col>]: <message>
    PROPERTY <label> : proven|cex|undetermined
    DEPTH <label> : <n>
    VACUITY <label> : vacuous|non_vacuous|unknown
    MESSAGE <label> : <text>
    TRACE <label> length=<n> violating_cycle=<k> inputs=<a,b,...>
    cycle <sig> <sig> ...
    <i> <v> <v> ...
    END TRACE
    WITNESS <label> length=<n> fired_cycle=<k> inputs=<...>
    ... same table ...
    END WITNESS

Messages escape backslashes, newlines and carriage returns as ``\\\\``, ``\\n`` and ``\\r``.
"""

from __future__ import annotations

import re
import shlex
import subprocess
from pathlib import Path
from typing import Optional

from ..rtl.diagnostics import Diagnostic
from .result import ProofResult, PropertyResult, Trace

_STATUS_OUT = {"proven": "proven", "falsified": "cex", "undetermined": "undetermined"}
_STATUS_IN = {v: k for k, v in _STATUS_OUT.items()}

_DIAG = re.compile(r"^(ERROR|WARNING) (.+?):(\d+)(?::(\d+))?: (.*)$")
_KEYED = re.compile(r"^(PROPERTY|VACUITY|MESSAGE|DEPTH) (\S+) : ?(.*)$")
_TRACE = re.compile(r"^(TRACE|WITNESS) (\S+) length=(\d+) (violating_cycle|fired_cycle)=(\d+) inputs=(\S*)$")


class ExternalLogError(Exception):
    def __init__(self, line_no: int, line: str):
        self.line_no = line_no
        super().__init__(f"unrecognized log line {line_no}: {line!r}")


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def _unesc(s: str) -> str:
    out, i = [], 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            out.append({"n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _render_table(kind: str, label: str, tr: Trace, lines: list) -> None:
    at = "violating_cycle" if kind == "TRACE" else "fired_cycle"
    lines.append(f"{kind} {label} length={tr.length} {at}={tr.violating_cycle} inputs={','.join(tr.inputs)}")
    lines.append(" ".join(["cycle"] + list(tr.signals)))
    for i, row in enumerate(tr.rows):
        lines.append(" ".join([str(i)] + [str(row.get(s, 0)) for s in tr.signals]))
    lines.append(f"END {kind}")


def render_log(result: ProofResult) -> str:
    """Synthetic tool log for ``result`` (inverse of parse_external_log)."""
    lines = [f"COMPILE {'ok' if result.compile_ok else 'failed'}", f"BOUND {result.bound_reached}"]
    for d in result.diagnostics:
        lines.append(f"{d.severity.upper()} {d.file}:{d.line}:{d.col}: {_esc(d.message)}")
    for p in result.per_property:
        lines.append(f"PROPERTY {p.label} : {_STATUS_OUT[p.status]}")
        if p.bound is not None:
            lines.append(f"DEPTH {p.label} : {p.bound}")
        if p.vacuity is not None:
            lines.append(f"VACUITY {p.label} : {p.vacuity}")
        if p.message:
            lines.append(f"MESSAGE {p.label} : {_esc(p.message)}")
        if p.counterexample is not None:
            _render_table("TRACE", p.label, p.counterexample, lines)
        if p.witness is not None:
            _render_table("WITNESS", p.label, p.witness, lines)
    return "\n".join(lines) + "\n"


def parse_external_log(text: str) -> ProofResult:
    compile_flag: Optional[bool] = None
    bound = 0
    diags: list = []
    order: list = []
    props: dict = {}
    lines = text.split("\n")  # only newline separates records; other line breaks are message text
    i = 0

    def rec(label: str, line_no: int, line: str) -> dict:
        if label not in props:
            raise ExternalLogError(line_no, line)
        return props[label]

    while i < len(lines):
        line_no = i + 1
        raw = lines[i]
        line = raw.rstrip("\r")
        i += 1
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line.startswith("COMPILE "):
            word = line[8:].strip()
            if word not in ("ok", "failed"):
                raise ExternalLogError(line_no, line)
            compile_flag = word == "ok"
            continue
        if line.startswith("BOUND "):
            try:
                bound = int(line[6:].strip())
            except ValueError:
                raise ExternalLogError(line_no, line) from None
            continue
        m = _DIAG.match(line)
        if m:
            sev, f, ln, col, msg = m.groups()
            diags.append(Diagnostic(f, int(ln), int(col) if col else 0, sev.lower(), _unesc(msg)))
            continue
        m = _KEYED.match(line)
        if m:
            kind, label, rest = m.groups()
            if kind == "PROPERTY":
                if rest not in _STATUS_IN or label in props:
                    raise ExternalLogError(line_no, line)
                props[label] = {"status": _STATUS_IN[rest], "vacuity": None, "message": "", "cex": None,
                                "witness": None, "bound": None}
                order.append(label)
            elif kind == "VACUITY":
                if rest not in ("vacuous", "non_vacuous", "unknown"):
                    raise ExternalLogError(line_no, line)
                rec(label, line_no, line)["vacuity"] = rest
            elif kind == "DEPTH":
                if not rest.isdigit():
                    raise ExternalLogError(line_no, line)
                rec(label, line_no, line)["bound"] = int(rest)
            else:
                rec(label, line_no, line)["message"] = _unesc(rest)
            continue
        m = _TRACE.match(line)
        if m:
            kind, label, length, _at_name, at, inputs = m.groups()
            r = rec(label, line_no, line)
            if i >= len(lines) or not lines[i].startswith("cycle"):
                raise ExternalLogError(i + 1, lines[i] if i < len(lines) else "")
            header = lines[i].split()
            sigs = header[1:]
            i += 1
            rows = []
            while i < len(lines) and lines[i].strip() != f"END {kind}":
                cells = lines[i].split()
                if len(cells) != len(header) or not all(re.fullmatch(r"\d+", c) for c in cells) \
                        or int(cells[0]) != len(rows):
                    raise ExternalLogError(i + 1, lines[i])
                rows.append({s: int(c) for s, c in zip(sigs, cells[1:])})
                i += 1
            if i >= len(lines):
                raise ExternalLogError(i, f"missing END {kind}")
            i += 1
            if len(rows) != int(length):
                raise ExternalLogError(line_no, line)
            try:
                tr = Trace(sigs, rows, int(at), [x for x in inputs.split(",") if x])
            except ValueError:
                raise ExternalLogError(line_no, line) from None
            r["cex" if kind == "TRACE" else "witness"] = tr
            continue
        raise ExternalLogError(line_no, line)

    per = []
    for label in order:
        r = props[label]
        try:
            per.append(PropertyResult(label, r["status"], r["vacuity"], r["cex"], r["message"], r["witness"],
                                      r["bound"]))
        except ValueError as exc:
            raise ExternalLogError(0, f"inconsistent record for {label}: {exc}") from None
    errors = any(d.severity == "error" for d in diags)
    ok = compile_flag if compile_flag is not None else not errors
    return ProofResult(ok, diags, per, bound)


# job emission

def bind_file_text(design, candidate) -> str:
    lines = [f"module {design.top}_sva_bind;"]
    for label, text in candidate.assertions:
        lines.append(f"  {label}: {text}")
    lines.append("endmodule")
    lines.append(f"bind {design.top} {design.top}_sva_bind {design.top}_sva_bind_i ();")
    return "\n".join(lines) + "\n"


def emit_external_job(design, candidate, budget, sva_path: str = "assertions.sva") -> str:
    files = [name for name, _ in design.sources]
    sim = design.sim
    out = ["# generated batch job; deterministic for identical inputs", "clear -all"]
    out.append("analyze -sv " + " ".join(shlex.quote(f) for f in files + [sva_path]))
    out.append(f"elaborate -top {design.top}")
    for clk in sorted(sim.clock_inputs):
        out.append(f"clock {clk}")
    resets = sorted(sim.reset_levels.items())
    if resets:
        expr = " || ".join(f"{n}" if lvl else f"!{n}" for n, lvl in resets)
        out.append(f"reset -expression {{{expr}}}")
    out.append(f"set_max_trace_length {budget.depth}")
    out.append(f"set_prove_time_limit {int(budget.wall_time)}s")
    for label, _ in candidate.assertions:
        out.append(f"prove -property {{{design.top}.{label}}}")
        out.append(f"check_vacuity -property {{{design.top}.{label}}}")
    out.append("report -results -traces")
    return "\n".join(out) + "\n"


def run_external(design, candidate, budget, command: str, workdir) -> ProofResult:
    """Write the job into ``workdir``, run ``command`` and parse its log.

    ``command`` is a template with ``{script}``, ``{log}`` and ``{workdir}`` fields.
    """
    work = Path(workdir)
    work.mkdir(parents=True, exist_ok=True)
    sva = work / "assertions.sva"
    sva.write_text(bind_file_text(design, candidate), encoding="utf-8")
    script = work / "job.tcl"
    script.write_text(emit_external_job(design, candidate, budget, str(sva)), encoding="utf-8")
    log = work / "job.log"
    argv = shlex.split(command.format(script=script, log=log, workdir=work))
    try:
        proc = subprocess.run(argv, cwd=work, capture_output=True, text=True, timeout=budget.wall_time * 10)
    except (OSError, subprocess.TimeoutExpired) as exc:
        return ProofResult(False, [Diagnostic(str(script), 0, 0, "error", f"external tool failed: {exc}")], [], 0)
    if not log.exists():
        msg = proc.stderr.strip() or f"external tool exited with {proc.returncode} and wrote no log"
        return ProofResult(False, [Diagnostic(str(script), 0, 0, "error", msg)], [], 0)
    return parse_external_log(log.read_text(encoding="utf-8"))
