"""The ReAct agent: LLM clients, tools, prompts and the two-phase loop."""

from .llm import ChatClient, LLMError, Message, Sampling, ScriptedLLM, ToolCall
from .loop import (ABLATIONS, AgentConfig, AgentResult, Conversation, RoundRecord, TranscriptError, generate_candidate,
                   run_agent, run_phase_a, run_phase_b, select_best)
from .prompts import build_repair_prompt
from .tools import ALL_TOOLS, RAG_TOOLS, STRUCTURAL_TOOLS, Observation, ToolRegistry

__all__ = [
    "ABLATIONS", "ALL_TOOLS", "AgentConfig", "AgentResult", "ChatClient", "Conversation", "LLMError", "Message",
    "Observation", "RAG_TOOLS", "RoundRecord", "STRUCTURAL_TOOLS", "Sampling", "ScriptedLLM", "ToolCall",
    "ToolRegistry", "TranscriptError", "build_repair_prompt", "generate_candidate", "run_agent", "run_phase_a",
    "run_phase_b", "select_best",
]
