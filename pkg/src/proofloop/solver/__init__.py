"""Assertion checking: syntax, bounded proof, vacuity and the external-tool adapter."""

from .checker import DEFAULT_BUDGET, Budget, PropertyChecker, check_property, prove, replay_trace, vacuity_check
from .monitor import MonitorAutomaton
from .result import ProofResult, PropertyResult, Trace
from .sva import PropertyAst, SeqStep, check_syntax, compile_assertions, parse_property

__all__ = [
    "Budget", "DEFAULT_BUDGET", "MonitorAutomaton", "ProofResult", "PropertyAst", "PropertyChecker",
    "PropertyResult", "SeqStep", "Trace", "check_property", "check_syntax", "compile_assertions",
    "parse_property", "prove", "replay_trace", "vacuity_check",
]
