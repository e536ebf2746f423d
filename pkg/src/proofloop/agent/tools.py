"""The agent's tool set: retrieval over the knowledge base and structural queries."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import jsonschema

from .. import kb as K
from ..rtl.diagnostics import RTLError
from ..rtl.elab import ParameterError, hierarchy_summary, hierarchy_tree, resolve_parameters
from ..structure.graph import StructureError, cone, flop_properties
from .llm import ToolCall

OBSERVATION_CAP = 4000
TRUNCATION_MARKER = "…[truncated]"

RAG_TOOLS = ("search_design", "get_module_interface", "get_hierarchy", "resolve_parameter",
             "get_always_blocks_for_signal")
STRUCTURAL_TOOLS = ("get_signal_cone", "get_flop_info")
ALL_TOOLS = RAG_TOOLS + STRUCTURAL_TOOLS


@dataclass(frozen=True)
class Observation:
    call_id: str
    status: str  # ok | error
    payload: dict

    def render(self, cap: int = OBSERVATION_CAP) -> str:
        text = json.dumps({"status": self.status, **self.payload}, sort_keys=True, ensure_ascii=False)
        return truncate(text, cap)

    def to_json(self) -> dict:
        return {"call_id": self.call_id, "status": self.status, "payload": self.payload}


def truncate(text: str, cap: int = OBSERVATION_CAP) -> str:
    if len(text) <= cap:
        return text
    return text[:cap - len(TRUNCATION_MARKER)] + TRUNCATION_MARKER


class ToolFailure(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SPECS = {
    "search_design": (
        "Semantic search over the design's RTL chunks (module interfaces, always blocks, instances, "
        "assign groups). Returns the k most similar chunks with cosine scores.",
        _obj({"query": {"type": "string", "minLength": 1},
              "k": {"type": "integer", "minimum": 1, "maximum": 20}}, ["query"])),
    "get_module_interface": (
        "Ports and parameters of one module, with parameter values resolved to integers.",
        _obj({"module": {"type": "string", "minLength": 1}}, ["module"])),
    "get_hierarchy": (
        "Instance hierarchy below the top module.",
        _obj({})),
    "resolve_parameter": (
        "Resolve a module's parameters and localparams to integers, optionally with overrides.",
        _obj({"module": {"type": "string", "minLength": 1}, "name": {"type": "string"},
              "overrides": {"type": "object", "additionalProperties": {"type": "integer"}}}, ["module"])),
    "get_always_blocks_for_signal": (
        "Every always block that reads or writes a signal ('sig' or 'module.sig').",
        _obj({"signal": {"type": "string", "minLength": 1}}, ["signal"])),
    "get_signal_cone": (
        "Fan-in or fan-out cone of a signal in the elaborated design (hierarchical paths like u0.q).",
        _obj({"signal": {"type": "string", "minLength": 1}, "direction": {"enum": ["fanin", "fanout"]},
              "depth": {"type": "integer", "minimum": 0}}, ["signal", "direction"])),
    "get_flop_info": (
        "Clock, reset (signal, polarity, sync/async, value) and data input of a register.",
        _obj({"reg": {"type": "string", "minLength": 1}}, ["reg"])),
}


def tool_schema(name: str) -> dict:
    desc, params = SPECS[name]
    return {"type": "function", "function": {"name": name, "description": desc, "parameters": params}}


class ToolRegistry:
    def __init__(self, design, kb: Optional[K.KnowledgeBase], enabled=ALL_TOOLS):
        self.design = design
        self.kb = kb
        self.enabled = tuple(n for n in ALL_TOOLS if n in set(enabled))
        self._impl: dict[str, Callable[[dict], dict]] = {
            "search_design": self._search,
            "get_module_interface": self._interface,
            "get_hierarchy": self._hierarchy,
            "resolve_parameter": self._params,
            "get_always_blocks_for_signal": self._blocks,
            "get_signal_cone": self._cone,
            "get_flop_info": self._flop,
        }

    def schemas(self) -> list[dict]:
        return [tool_schema(n) for n in self.enabled]

    def is_enabled(self, name: str) -> bool:
        return name in self.enabled

    def dispatch(self, call: ToolCall) -> Observation:
        if call.name not in SPECS:
            return Observation(call.call_id, "error", {"code": "unknown_tool",
                                                       "message": f"no tool named '{call.name}'"})
        if call.name not in self.enabled:
            return Observation(call.call_id, "error", {"code": "tool_unavailable",
                                                       "message": f"tool '{call.name}' is not available"})
        try:
            jsonschema.validate(call.arguments, SPECS[call.name][1])
        except jsonschema.ValidationError as exc:
            return Observation(call.call_id, "error", {"code": "invalid_arguments", "message": exc.message})
        try:
            return Observation(call.call_id, "ok", self._impl[call.name](call.arguments))
        except ToolFailure as exc:
            return Observation(call.call_id, "error", {"code": exc.code, "message": str(exc)})
        except K.KBError as exc:
            return Observation(call.call_id, "error", {"code": exc.code, "message": str(exc)})
        except StructureError as exc:
            return Observation(call.call_id, "error", {"code": exc.code, "message": str(exc)})
        except ParameterError as exc:
            return Observation(call.call_id, "error", {"code": exc.code, "message": str(exc)})
        except RTLError as exc:
            return Observation(call.call_id, "error", {"code": "elaboration_failed", "message": str(exc)})

    # implementations

    def _search(self, args: dict) -> dict:
        hits = K.semantic_search(self.kb, args["query"], args.get("k", K.DEFAULT_K))
        out = []
        for cid, score in hits:
            c = self.kb.chunk(cid)
            out.append({"chunk_id": cid, "kind": c.kind, "module": c.owner_module, "score": round(score, 6),
                        "text": c.canonical_text})
        return {"query": args["query"], "results": out}

    def _interface(self, args: dict) -> dict:
        c = K.interface_query(self.kb, args["module"])
        params = resolve_parameters(self.design.unit, args["module"], {})
        return {"module": args["module"], "chunk_id": c.chunk_id, "text": c.canonical_text, "parameters": params}

    def _hierarchy(self, args: dict) -> dict:
        tree = hierarchy_tree(self.design.unit, self.design.top)
        return {"top": self.design.top, "tree": tree.to_json(), "summary": hierarchy_summary(tree)}

    def _params(self, args: dict) -> dict:
        module = args["module"]
        if not self.design.unit.has_module(module):
            raise ToolFailure("unknown_module", f"no module named '{module}'")
        values = resolve_parameters(self.design.unit, module, args.get("overrides") or {})
        name = args.get("name")
        if name:
            if name not in values:
                raise ToolFailure("unknown_parameter", f"module '{module}' has no parameter '{name}'")
            return {"module": module, "name": name, "value": values[name]}
        return {"module": module, "parameters": values}

    def _blocks(self, args: dict) -> dict:
        chunks = K.signal_blocks_query(self.kb, args["signal"])
        return {"signal": args["signal"],
                "blocks": [{"chunk_id": c.chunk_id, "module": c.owner_module, "text": c.canonical_text}
                           for c in chunks]}

    def _cone(self, args: dict) -> dict:
        g = self.design.graph
        path = g.lookup(args["signal"])
        sigs = cone(g, path, args["direction"], args.get("depth"))
        return {"signal": path, "direction": args["direction"], "depth": args.get("depth"), "cone": sigs}

    def _flop(self, args: dict) -> dict:
        return flop_properties(self.design.graph, args["reg"]).to_json()
