"""Generated assertion sets and their extraction from free-form model output."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[^\n]*\n(.*?)```", re.S)
_LABEL_AT = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*:(?![:=])")


class ExtractionError(Exception):
    pass


@dataclass
class SvaCandidate:
    assertions: list = field(default_factory=list)  # [(label, text)]
    bind_target: str = ""
    raw_llm_text: str = ""
    round_index: int = 0

    def __post_init__(self) -> None:
        labels = [lab for lab, _ in self.assertions]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate assertion labels: {labels}")

    @property
    def labels(self) -> list:
        return [lab for lab, _ in self.assertions]

    def text_of(self, label: str) -> str:
        return dict(self.assertions)[label]

    def render(self) -> str:
        """One labeled statement per line group, as written into the bind file."""
        return "".join(f"{lab}: {txt}\n" for lab, txt in self.assertions)

    def to_json(self) -> dict:
        return {"assertions": [list(a) for a in self.assertions], "bind_target": self.bind_target,
                "round_index": self.round_index}


def split_statements(code: str) -> list:
    """Split assertion source into (label or None, statement text) without parsing it.

    A statement runs from ``assert`` (or the start of a bare property line) to the
    terminating semicolon at parenthesis depth zero. Comments are dropped.
    """
    code = re.sub(r"/\*.*?\*/", " ", code, flags=re.S)
    code = re.sub(r"//[^\n]*", "", code)
    out = []
    i, n = 0, len(code)
    pending_label = None
    while i < n:
        while i < n and code[i].isspace():
            i += 1
        if i >= n:
            break
        lm = _LABEL_AT.match(code, i)
        if lm and lm.group(1) not in ("assert", "property"):
            pending_label = lm.group(1)
            i = lm.end()
            continue
        depth = 0
        j = i
        while j < n:
            c = code[j]
            if c in "([{":
                depth += 1
            elif c in ")]}":
                depth -= 1
            elif c == ";" and depth <= 0:
                break
            j += 1
        stmt = " ".join(code[i:j + 1].split())
        if stmt and stmt != ";":
            out.append((pending_label, stmt))
        pending_label = None
        i = j + 1
    return out


def extract_candidate(text: str, bind_target: str, round_index: int = 0) -> SvaCandidate:
    """Pull assertions out of fenced code regions of a model response.

    Labels written as ``name: assert property (...)`` are kept; others are
    numbered ``p1``, ``p2``... in order. Text is copied verbatim (whitespace
    normalized), so malformed assertions survive for the checker to report.
    """
    blocks = [body for _lang, body in _FENCE.findall(text)]
    if not blocks:
        raise ExtractionError("no fenced code region found in the response")
    stmts = []
    for b in blocks:
        stmts.extend(split_statements(b))
    stmts = [(lab, s) for lab, s in stmts if "property" in s or "|->" in s or "|=>" in s or "assert" in s]
    if not stmts:
        raise ExtractionError("no assertion statements found in the fenced code")
    used = {lab for lab, _ in stmts if lab}
    out = []
    k = 0
    for lab, s in stmts:
        if lab is None or lab in {x for x, _ in out}:
            k += 1
            while f"p{k}" in used:
                k += 1
            lab = f"p{k}"
            used.add(lab)
        out.append((lab, s))
    return SvaCandidate(out, bind_target, text, round_index)


def load_assertions(text: str, bind_target: str) -> SvaCandidate:
    """Assertions from an .sva file: fenced regions if present, else the whole text."""
    if _FENCE.search(text):
        return extract_candidate(text, bind_target)
    return extract_candidate(f"```systemverilog\n{text}\n```", bind_target)
