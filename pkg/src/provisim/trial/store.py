"""Plan/session persistence and stimulus pre-rendering.

Stimuli are rendered through every phase preset once, at plan creation, and
served from content-hash filenames; sessions append one JSON line per event
to their own log, flushed and fsynced before the caller gets an ack, so a
crash can lose at most the screen in flight and a restart reconstructs every
session by replay.
"""

from __future__ import annotations

import hashlib
import io
import json
import threading
import uuid
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .. import pipeline, tone
from ..imagecore import load_image
from ..landmarks import load_landmarks
from .plan import (
    PhaseSpec,
    PlanError,
    Screen,
    StimulusRecord,
    TrialPlan,
    generate_screens,
    validate_plan,
)
from .session import ScreenRecord, TrialSession


class UnknownPlanError(KeyError):
    pass


class UnknownSessionError(KeyError):
    pass


class UnknownStimulusError(KeyError):
    pass


def _curve_from_doc(doc):
    if doc is None:
        return None
    if doc.get("type") == "gamma":
        return tone.GammaCurve(float(doc["gamma"]))
    if doc.get("type") == "sigmoid":
        return tone.SigmoidCurve(float(doc["gain"]), float(doc.get("shift", 0.2)))
    raise PlanError(f"unknown curve doc {doc!r}")


def phase_config(phase: PhaseSpec) -> pipeline.PipelineConfig:
    return pipeline.preset_config(phase.preset, curve=_curve_from_doc(phase.curve))


def _needs_landmarks(cfg: pipeline.PipelineConfig) -> bool:
    return any(s.name == "enhance_landmarks" for s in cfg.stages)


class TrialStore:
    """Single source of truth for plans, stimuli and session logs."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.plans_dir = self.data_dir / "plans"
        self.sessions_dir = self.data_dir / "sessions"
        self.stimuli_dir = self.data_dir / "stimuli"
        for d in (self.plans_dir, self.sessions_dir, self.stimuli_dir):
            d.mkdir(parents=True, exist_ok=True)
        self._plans: dict[str, TrialPlan] = {}
        self._sessions: dict[str, TrialSession] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._store_lock = threading.Lock()
        self._load_existing()

    # -- plans ---------------------------------------------------------------

    def create_plan(self, doc: dict, base_dir=None) -> TrialPlan:
        plan = _plan_from_doc(doc, plan_id=uuid.uuid4().hex[:12])
        validate_plan(plan)
        base = Path(base_dir) if base_dir else Path(".")
        stimulus_map = self._render_stimuli(plan, base)
        plan = TrialPlan(
            plan_id=plan.plan_id,
            phases=plan.phases,
            manifest=plan.manifest,
            name=plan.name,
            repetitions_per_type=plan.repetitions_per_type,
            time_limit_s=plan.time_limit_s,
            stimulus_map=stimulus_map,
        )
        with self._store_lock:
            self._plans[plan.plan_id] = plan
            path = self.plans_dir / f"{plan.plan_id}.json"
            path.write_text(json.dumps(_plan_to_doc(plan), sort_keys=True), encoding="utf-8")
        return plan

    def get_plan(self, plan_id: str) -> TrialPlan:
        try:
            return self._plans[plan_id]
        except KeyError:
            raise UnknownPlanError(plan_id) from None

    def list_plans(self):
        return sorted(self._plans)

    def _render_stimuli(self, plan: TrialPlan, base: Path) -> dict:
        stimulus_map: dict = {}
        for phase in plan.phases:
            cfg = phase_config(phase)
            needs_lm = _needs_landmarks(cfg)
            phase_map = {}
            for record in plan.manifest:
                image_path = base / record.image_path
                lm = None
                if needs_lm:
                    if not record.landmarks_path:
                        raise PlanError(
                            f"stimulus {record.stimulus_id!r} has no landmark file but "
                            f"phase {phase.name!r} requires one"
                        )
                    lm = load_landmarks(base / record.landmarks_path)
                color = load_image(image_path)
                result = pipeline.simulate(color, cfg, lm=lm)
                phase_map[record.stimulus_id] = self._store_png(result.pixels)
            stimulus_map[phase.name] = phase_map
        return stimulus_map

    def _store_png(self, pixels: np.ndarray) -> str:
        samples = np.floor(pixels * 255.0 + 0.5).astype(np.uint8)
        buf = io.BytesIO()
        PILImage.fromarray(samples, mode="L").save(buf, format="PNG")
        data = buf.getvalue()
        content_id = hashlib.sha256(data).hexdigest()
        path = self.stimuli_dir / f"{content_id}.png"
        if not path.exists():
            path.write_bytes(data)
        return content_id

    def stimulus_path(self, content_id: str) -> Path:
        if not content_id.isalnum():
            raise UnknownStimulusError(content_id)
        path = self.stimuli_dir / f"{content_id}.png"
        if not path.exists():
            raise UnknownStimulusError(content_id)
        return path

    # -- sessions ------------------------------------------------------------

    def create_session(self, plan_id: str, participant: str, seed: int) -> TrialSession:
        plan = self.get_plan(plan_id)
        screens = generate_screens(plan, seed)
        session_id = uuid.uuid4().hex[:12]
        session = TrialSession(
            session_id, plan_id, participant, seed, screens, plan.time_limit_s
        )
        with self._store_lock:
            self._sessions[session_id] = session
            self._session_locks[session_id] = threading.Lock()
        self._append_event(
            session_id,
            {
                "type": "created",
                "session_id": session_id,
                "plan_id": plan_id,
                "participant": participant,
                "seed": seed,
                "time_limit_s": plan.time_limit_s,
                "screens": [_screen_to_doc(s) for s in screens],
            },
        )
        return session

    def get_session(self, session_id: str) -> TrialSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def session_lock(self, session_id: str) -> threading.Lock:
        self.get_session(session_id)
        return self._session_locks[session_id]

    def list_sessions(self):
        return sorted(self._sessions)

    def finished_sessions(self):
        return [self._sessions[k] for k in sorted(self._sessions) if self._sessions[k].finished]

    def record_response(self, session_id: str, record: ScreenRecord) -> None:
        """Persist a response; must run before the ack leaves the server."""
        self._append_event(
            session_id,
            {
                "type": "response",
                "screen_index": record.screen_index,
                "chosen_index": record.chosen_index,
                "is_timeout": record.is_timeout,
                "is_correct": record.is_correct,
                "response_time_ms": record.response_time_ms,
                "server_ts": record.server_ts,
            },
        )

    def _append_event(self, session_id: str, event: dict) -> None:
        path = self.sessions_dir / f"{session_id}.jsonl"
        line = json.dumps(event, sort_keys=True) + "\n"
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            import os

            os.fsync(fh.fileno())

    # -- replay --------------------------------------------------------------

    def _load_existing(self) -> None:
        for path in sorted(self.plans_dir.glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            plan = _plan_from_doc(doc, plan_id=doc["plan_id"])
            self._plans[plan.plan_id] = plan
        for path in sorted(self.sessions_dir.glob("*.jsonl")):
            session = _replay_session(path)
            if session is not None:
                self._sessions[session.session_id] = session
                self._session_locks[session.session_id] = threading.Lock()


def _plan_from_doc(doc: dict, plan_id: str) -> TrialPlan:
    if not isinstance(doc, dict):
        raise PlanError("plan document must be an object")
    try:
        phases = tuple(
            PhaseSpec(p["name"], p["preset"], p.get("curve")) for p in doc["phases"]
        )
        manifest = tuple(
            StimulusRecord(
                stimulus_id=str(m["id"]),
                person=str(m["person"]),
                gender=str(m["gender"]),
                emotion=str(m["emotion"]),
                image_path=str(m["image"]),
                landmarks_path=str(m.get("landmarks", "")),
            )
            for m in doc["manifest"]
        )
    except (KeyError, TypeError) as exc:
        raise PlanError(f"malformed plan document: {exc}") from exc
    return TrialPlan(
        plan_id=plan_id,
        phases=phases,
        manifest=manifest,
        name=str(doc.get("name", "")),
        repetitions_per_type=int(doc.get("repetitions_per_type", 24)),
        time_limit_s=float(doc.get("time_limit_s", 20.0)),
        stimulus_map=doc.get("stimulus_map", {}),
    )


def _plan_to_doc(plan: TrialPlan) -> dict:
    return {
        "plan_id": plan.plan_id,
        "name": plan.name,
        "phases": [
            {"name": p.name, "preset": p.preset, **({"curve": p.curve} if p.curve else {})}
            for p in plan.phases
        ],
        "manifest": [
            {
                "id": m.stimulus_id,
                "person": m.person,
                "gender": m.gender,
                "emotion": m.emotion,
                "image": m.image_path,
                **({"landmarks": m.landmarks_path} if m.landmarks_path else {}),
            }
            for m in plan.manifest
        ],
        "repetitions_per_type": plan.repetitions_per_type,
        "time_limit_s": plan.time_limit_s,
        "stimulus_map": plan.stimulus_map,
    }


def _screen_to_doc(s: Screen) -> dict:
    return {
        "index": s.index,
        "phase": s.phase,
        "phase_index": s.phase_index,
        "question_type": s.question_type,
        "prompt": s.prompt,
        "stimulus_ids": list(s.stimulus_ids),
        "content_ids": list(s.content_ids),
        "correct_index": s.correct_index,
        "target_emotion": s.target_emotion,
    }


def _screen_from_doc(doc: dict) -> Screen:
    return Screen(
        index=doc["index"],
        phase=doc["phase"],
        phase_index=doc["phase_index"],
        question_type=doc["question_type"],
        prompt=doc["prompt"],
        stimulus_ids=tuple(doc["stimulus_ids"]),
        content_ids=tuple(doc["content_ids"]),
        correct_index=doc["correct_index"],
        target_emotion=doc.get("target_emotion", ""),
    )


def _replay_session(path: Path):
    session = None
    lines = path.read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        try:
            event = json.loads(line)
        except json.JSONDecodeError:
            if lineno == len(lines) - 1:
                break  # torn tail from a crash mid-append; everything acked is intact
            raise
        if event["type"] == "created":
            screens = tuple(_screen_from_doc(d) for d in event["screens"])
            session = TrialSession(
                event["session_id"],
                event["plan_id"],
                event["participant"],
                event["seed"],
                screens,
                event["time_limit_s"],
            )
        elif event["type"] == "response" and session is not None:
            screen = session.screens[session.cursor]
            session._apply(
                ScreenRecord(
                    screen_index=event["screen_index"],
                    phase=screen.phase,
                    question_type=screen.question_type,
                    target_emotion=screen.target_emotion,
                    stimulus_ids=screen.stimulus_ids,
                    content_ids=screen.content_ids,
                    correct_index=screen.correct_index,
                    chosen_index=event["chosen_index"],
                    is_timeout=event["is_timeout"],
                    is_correct=event["is_correct"],
                    response_time_ms=event["response_time_ms"],
                    server_ts=event["server_ts"],
                )
            )
    return session
