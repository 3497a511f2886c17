"""Forced-choice trial harness: plans, sessions, persistence, HTTP service."""

from .plan import (
    EMOTIONS,
    QUESTION_TYPES,
    InsufficientStimuliError,
    PhaseSpec,
    PlanError,
    Screen,
    StimulusRecord,
    TrialPlan,
    generate_screens,
    validate_plan,
)
from .session import (
    DuplicateResponseError,
    OutOfOrderResponseError,
    ResponseTimingError,
    SessionFinishedError,
    SessionNotFinishedError,
    TrialSession,
)
from .store import TrialStore, UnknownPlanError, UnknownSessionError
from .summary import export_results, summarize

__all__ = [
    "EMOTIONS",
    "QUESTION_TYPES",
    "InsufficientStimuliError",
    "PhaseSpec",
    "PlanError",
    "Screen",
    "StimulusRecord",
    "TrialPlan",
    "generate_screens",
    "validate_plan",
    "DuplicateResponseError",
    "OutOfOrderResponseError",
    "ResponseTimingError",
    "SessionFinishedError",
    "SessionNotFinishedError",
    "TrialSession",
    "TrialStore",
    "UnknownPlanError",
    "UnknownSessionError",
    "export_results",
    "summarize",
]
