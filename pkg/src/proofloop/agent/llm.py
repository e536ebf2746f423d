"""Chat clients: a live HTTP client speaking the common chat-completions format
and a scripted client that replays canned assistant messages from a file."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence


class LLMError(Exception):
    pass


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: dict
    call_id: str

    def to_json(self) -> dict:
        return {"id": self.call_id, "type": "function",
                "function": {"name": self.name, "arguments": json.dumps(self.arguments, sort_keys=True)}}


@dataclass
class Message:
    role: str  # system | user | assistant | tool
    content: str = ""
    tool_calls: list = field(default_factory=list)
    tool_call_id: Optional[str] = None

    def to_json(self) -> dict:
        d: dict = {"role": self.role, "content": self.content}
        if self.tool_calls:
            d["tool_calls"] = [c.to_json() for c in self.tool_calls]
        if self.tool_call_id is not None:
            d["tool_call_id"] = self.tool_call_id
        return d


@dataclass(frozen=True)
class Sampling:
    temperature: float = 0.0
    top_p: float = 1.0
    seed: Optional[int] = None

    @classmethod
    def nucleus(cls, seed: Optional[int] = None) -> "Sampling":
        return cls(temperature=0.8, top_p=0.95, seed=seed)


def parse_tool_calls(raw_calls, prefix: str) -> list[ToolCall]:
    """Normalize tool calls from either wire form or the trajectory shorthand."""
    out = []
    for i, c in enumerate(raw_calls or []):
        if "function" in c:
            name = c["function"].get("name", "")
            args = c["function"].get("arguments", {})
        else:
            name = c.get("name", "")
            args = c.get("arguments", c.get("args", {}))
        if isinstance(args, str):
            try:
                args = json.loads(args) if args.strip() else {}
            except json.JSONDecodeError:
                args = {"__unparsed__": args}
        out.append(ToolCall(name, args, c.get("id") or f"{prefix}_{i}"))
    return out


class ChatClient:
    """Live client for an OpenAI-style ``/chat/completions`` endpoint."""

    def __init__(self, url: str, model: str, api_key: Optional[str] = None, timeout: float = 120.0,
                 retries: int = 3, backoff: float = 2.0):
        self.url = url.rstrip("/")
        if not self.url.endswith("/chat/completions"):
            self.url += "/chat/completions"
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._n = 0

    @classmethod
    def from_env(cls) -> Optional["ChatClient"]:
        url = os.environ.get("PROOFLOOP_LLM_URL")
        model = os.environ.get("PROOFLOOP_LLM_MODEL")
        if not url or not model:
            return None
        return cls(url, model, os.environ.get("PROOFLOOP_LLM_API_KEY"))

    def chat(self, messages: Sequence[Message], tools: Sequence[dict] = (), sampling: Sampling = Sampling(),
             purpose: str = "gather") -> Message:
        import requests

        payload: dict = {"model": self.model, "messages": [m.to_json() for m in messages],
                         "temperature": sampling.temperature, "top_p": sampling.top_p}
        if sampling.seed is not None:
            payload["seed"] = sampling.seed
        if tools:
            payload["tools"] = list(tools)
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        last: Exception = LLMError("no attempt made")
        for attempt in range(self.retries):
            try:
                resp = requests.post(self.url, json=payload, headers=headers, timeout=self.timeout)
                if resp.status_code >= 500 or resp.status_code == 429:
                    raise LLMError(f"server returned {resp.status_code}")
                resp.raise_for_status()
                msg = resp.json()["choices"][0]["message"]
                break
            except (requests.RequestException, LLMError, KeyError, ValueError) as exc:
                last = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * (2 ** attempt))
        else:
            raise LLMError(f"chat request failed after {self.retries} attempts: {last}")
        self._n += 1
        return Message("assistant", msg.get("content") or "", parse_tool_calls(msg.get("tool_calls"), f"call{self._n}"))


_PHASE_ORDER = {"gather": 0, "generate": 1, "repair": 2}


class ScriptedLLM:
    """Replays a trajectory: one JSON object per line.

    Each line is an assistant message ``{"content": ..., "tool_calls": [{"name", "arguments"}]}``
    with an optional ``"phase"`` of ``gather``, ``generate`` or ``repair``. A request
    for one phase skips lines tagged with an earlier one, so one trajectory serves
    every ablation (e.g. a run without Phase A skips the ``gather`` lines); a line
    from a later phase is left in place and the request fails with LLMError.
    """

    def __init__(self, lines: Sequence[dict]):
        self.lines = list(lines)
        self.pos = 0
        self.requests: list = []  # (purpose, advertised tool names)

    @classmethod
    def from_file(cls, path) -> "ScriptedLLM":
        recs = []
        for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                recs.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise LLMError(f"{path}:{n}: invalid trajectory line: {exc}") from None
        return cls(recs)

    def chat(self, messages: Sequence[Message], tools: Sequence[dict] = (), sampling: Sampling = Sampling(),
             purpose: str = "gather") -> Message:
        self.requests.append((purpose, [t["function"]["name"] for t in tools]))
        want = _PHASE_ORDER.get(purpose, 0)
        while self.pos < len(self.lines):
            rec = self.lines[self.pos]
            phase = rec.get("phase")
            if phase is not None and phase != purpose and _PHASE_ORDER.get(phase, 0) > want:
                # the script has moved on to a later phase; leave that line for its request
                raise LLMError(f"scripted trajectory has no '{purpose}' message at line {self.pos + 1}")
            self.pos += 1
            if phase is None or phase == purpose:
                calls = parse_tool_calls(rec.get("tool_calls"), f"call_{self.pos}")
                return Message("assistant", rec.get("content", ""), calls)
        raise LLMError("scripted trajectory exhausted")
