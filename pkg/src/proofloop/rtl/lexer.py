"""Tokenizer shared by the RTL and assertion parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .diagnostics import Diagnostic, RTLError

KEYWORDS = frozenset(
    """
    module endmodule input output inout wire reg logic integer parameter localparam
    assign always always_ff always_comb always_latch posedge negedge or if else case
    casez casex endcase default begin end signed unsigned generate endgenerate genvar
    function endfunction task endtask initial interface endinterface class endclass
    typedef enum struct for while repeat forever package endpackage import
    assert property disable iff not and
    """.split()
)

# Longest first; the lexer tries these in order.
OPERATORS = [
    "|->", "|=>", "<<<", ">>>", "===", "!==",
    "##", "**", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "~&", "~|", "~^", "^~", "+:", "-:",
    "(", ")", "[", "]", "{", "}", ";", ":", ",", ".", "#", "@", "=",
    "+", "-", "*", "/", "%", "<", ">", "!", "~", "&", "|", "^", "?", "$",
]

_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_SYSID = re.compile(r"\$[A-Za-z_][A-Za-z0-9_$]*")
_BASED = re.compile(r"(?:([0-9][0-9_]*)\s*)?'\s*([sS]?)([bodhBODH])\s*([0-9a-fA-FxXzZ?_]+)")
_DEC = re.compile(r"[0-9][0-9_]*")
_WS = re.compile(r"[ \t\r\f\v]+")

_RADIX = {"b": 2, "o": 8, "d": 10, "h": 16}


@dataclass(frozen=True)
class Token:
    kind: str  # id | kw | sysid | num | op | eof
    text: str
    line: int
    col: int
    value: object = None  # (value, width, base) for numbers

    def is_op(self, *ops: str) -> bool:
        return self.kind == "op" and self.text in ops

    def is_kw(self, *kws: str) -> bool:
        return self.kind == "kw" and self.text in kws


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    i = 0
    line = 1
    line_start = 0
    n = len(text)

    def err(msg: str, at: int) -> RTLError:
        return RTLError([Diagnostic(filename, line, at - line_start + 1, "error", msg)])

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        m = _WS.match(text, i)
        if m:
            i = m.end()
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise err("unterminated block comment", i)
            line += text.count("\n", i, j)
            nl = text.rfind("\n", i, j)
            if nl >= 0:
                line_start = nl + 1
            i = j + 2
            continue
        col = i - line_start + 1
        if c == "`":
            m = _ID.match(text, i + 1)
            word = m.group(0) if m else ""
            if word in ("timescale", "default_nettype", "resetall"):
                j = text.find("\n", i)
                i = n if j < 0 else j
                continue
            raise err(f"unsupported construct: compiler directive `{word}", i)
        if c == '"':
            raise err("unsupported construct: string literal", i)
        m = _BASED.match(text, i)
        if m:
            size, _signed, base, digits = m.groups()
            if "\n" in m.group(0):
                raise err("malformed number literal", i)
            base = base.lower()
            clean = digits.replace("_", "")
            if re.search(r"[xXzZ?]", clean):
                raise err("unsupported construct: 4-state literal", i)
            try:
                value = int(clean, _RADIX[base])
            except ValueError:
                raise err(f"malformed number literal '{m.group(0)}'", i) from None
            width = int(size.replace("_", "")) if size else None
            if width is not None and width <= 0:
                raise err("zero-width number literal", i)
            if width is not None:
                value &= (1 << width) - 1
            toks.append(Token("num", m.group(0), line, col, (value, width, base)))
            i = m.end()
            continue
        m = _DEC.match(text, i)
        if m:
            if m.end() < n and text[m.end()] == ".":
                nxt = text[m.end() + 1: m.end() + 2]
                if nxt.isdigit():
                    raise err("unsupported construct: real number literal", i)
            toks.append(Token("num", m.group(0), line, col, (int(m.group(0).replace("_", "")), None, None)))
            i = m.end()
            continue
        m = _ID.match(text, i)
        if m:
            word = m.group(0)
            toks.append(Token("kw" if word in KEYWORDS else "id", word, line, col))
            i = m.end()
            continue
        m = _SYSID.match(text, i)
        if m:
            toks.append(Token("sysid", m.group(0), line, col))
            i = m.end()
            continue
        if c == "\\":
            raise err("unsupported construct: escaped identifier", i)
        for op in OPERATORS:
            if text.startswith(op, i):
                toks.append(Token("op", op, line, col))
                i += len(op)
                break
        else:
            raise err(f"unexpected character '{c}'", i)
    toks.append(Token("eof", "", line, i - line_start + 1))
    return toks
