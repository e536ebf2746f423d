"""Smoke test against a real chat endpoint; skipped unless PROOFLOOP_LLM_URL and PROOFLOOP_LLM_MODEL are set."""

import pytest

from helpers import TOGGLE_RTL, design
from proofloop.agent.llm import ChatClient
from proofloop.agent.loop import AgentConfig, run_agent
from proofloop.solver.checker import Budget

client = ChatClient.from_env()

pytestmark = pytest.mark.skipif(client is None, reason="no live LLM endpoint configured")


def test_live_session_respects_caps():
    d = design(TOGGLE_RTL, "m")
    spec = "After reset (rst high) q is 0. Out of reset, q inverts on every rising clock edge."
    res = run_agent(spec, d, d.knowledge_base(), client, AgentConfig(budget=Budget(depth=8)))
    assert res.rounds_used_phase_a <= 6 and res.rounds_used_phase_b <= 3
    assert res.termination_reason
