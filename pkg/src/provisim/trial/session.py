"""Session state machine: screen sequencing, response capture, timing checks.

Response time is client-measured on a monotonic clock and recorded as given;
the server only sanity-checks it against the plan's limit (plus a fixed
tolerance for network/UI slack) so that jitter never contaminates the
latency data. Timeouts count as incorrect and are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

from .plan import CHOICES_PER_SCREEN

RESPONSE_TOLERANCE_MS = 500.0


class SessionError(Exception):
    """Base class for session protocol violations."""


class SessionFinishedError(SessionError):
    """The session has no screens left."""


class DuplicateResponseError(SessionError):
    """A response for this screen was already recorded."""


class OutOfOrderResponseError(SessionError):
    """Response targets a screen ahead of the cursor."""


class ResponseTimingError(SessionError):
    """Elapsed time exceeds the limit without a timeout flag, or is invalid."""


class SessionNotFinishedError(SessionError):
    """Summary/export requested for an unfinished session."""


@dataclass
class ScreenRecord:
    screen_index: int
    phase: str
    question_type: str
    target_emotion: str
    stimulus_ids: tuple
    content_ids: tuple
    correct_index: int
    chosen_index: int | None
    is_timeout: bool
    is_correct: bool
    response_time_ms: float | None
    server_ts: str


class TrialSession:
    """One participant's run; mutations must be serialized by the caller."""

    def __init__(self, session_id, plan_id, participant, seed, screens, time_limit_s):
        self.session_id = session_id
        self.plan_id = plan_id
        self.participant = participant
        self.seed = seed
        self.screens = tuple(screens)
        self.time_limit_s = float(time_limit_s)
        self.cursor = 0
        self.records: list[ScreenRecord] = []
        self.state = "created"

    @property
    def finished(self) -> bool:
        return self.cursor >= len(self.screens)

    def next_screen(self):
        """Return the current unanswered screen (idempotent until answered)."""
        if self.finished:
            raise SessionFinishedError(f"session {self.session_id} is finished")
        if self.state == "created":
            self.state = "running"
        return self.screens[self.cursor]

    def submit(
        self,
        screen_index: int,
        choice: int | None,
        timeout: bool,
        client_elapsed_ms: float,
        server_ts: str,
    ) -> ScreenRecord:
        if self.finished:
            raise SessionFinishedError(f"session {self.session_id} is finished")
        if screen_index < self.cursor:
            raise DuplicateResponseError(
                f"screen {screen_index} already has a response (cursor at {self.cursor})"
            )
        if screen_index > self.cursor:
            raise OutOfOrderResponseError(
                f"screen {screen_index} submitted but cursor is at {self.cursor}"
            )
        if client_elapsed_ms < 0:
            raise ResponseTimingError(f"negative elapsed time {client_elapsed_ms}")
        limit_ms = self.time_limit_s * 1000.0 + RESPONSE_TOLERANCE_MS
        if not timeout and client_elapsed_ms > limit_ms:
            raise ResponseTimingError(
                f"elapsed {client_elapsed_ms} ms exceeds limit "
                f"{limit_ms} ms without a timeout flag"
            )
        if timeout:
            chosen = None
        else:
            if choice is None or not 0 <= choice < CHOICES_PER_SCREEN:
                raise ResponseTimingError(f"choice must be 0..3, got {choice!r}")
            chosen = int(choice)
        screen = self.screens[self.cursor]
        record = ScreenRecord(
            screen_index=screen.index,
            phase=screen.phase,
            question_type=screen.question_type,
            target_emotion=screen.target_emotion,
            stimulus_ids=screen.stimulus_ids,
            content_ids=screen.content_ids,
            correct_index=screen.correct_index,
            chosen_index=chosen,
            is_timeout=timeout,
            is_correct=(chosen == screen.correct_index) if not timeout else False,
            response_time_ms=None if timeout else float(client_elapsed_ms),
            server_ts=server_ts,
        )
        return self._apply(record)

    def _apply(self, record: ScreenRecord) -> ScreenRecord:
        """Advance the state machine; also used when replaying the event log."""
        self.records.append(record)
        self.cursor += 1
        self.state = "finished" if self.finished else "running"
        return record
