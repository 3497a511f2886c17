"""Session summaries and CSV export.

Accuracy is correct/presented per task, phase and emotion; response time is
averaged over answered (non-timeout) screens only. Cross-session aggregates
weight sessions equally, and per-participant phase differences (mean delta
plus sign counts) are emitted so significance tests can run downstream on
the exported data.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .session import SessionNotFinishedError, TrialSession

SCREEN_COLUMNS = (
    "session_id",
    "participant",
    "phase",
    "task",
    "emotion",
    "stim_1",
    "stim_2",
    "stim_3",
    "stim_4",
    "correct_index",
    "chosen_index",
    "is_correct",
    "is_timeout",
    "rt_ms",
    "server_ts",
)

SUMMARY_COLUMNS = (
    "scope",
    "session_id",
    "participant",
    "phase",
    "task",
    "emotion",
    "n",
    "accuracy",
    "mean_rt_ms",
    "n_improved",
    "n_worse",
    "n_equal",
)


def _require_finished(sessions) -> None:
    for s in sessions:
        if not s.finished:
            raise SessionNotFinishedError(f"session {s.session_id} is not finished")


def _cell_stats(records):
    n = len(records)
    correct = sum(1 for r in records if r.is_correct)
    answered = [r.response_time_ms for r in records if not r.is_timeout]
    return {
        "n": n,
        "n_correct": correct,
        "accuracy": correct / n if n else 0.0,
        "n_answered": len(answered),
        "mean_rt_ms": sum(answered) / len(answered) if answered else None,
    }


def summarize_session(session: TrialSession) -> dict:
    _require_finished([session])
    phases: dict = {}
    for record in session.records:
        phase = phases.setdefault(record.phase, {"tasks": {}, "emotions": {}})
        phase["tasks"].setdefault(record.question_type, []).append(record)
        if record.question_type == "emotion":
            phase["emotions"].setdefault(record.target_emotion, []).append(record)
    out = {
        "session_id": session.session_id,
        "participant": session.participant,
        "screens": len(session.records),
        "phases": {},
    }
    for phase, groups in phases.items():
        out["phases"][phase] = {
            "tasks": {task: _cell_stats(v) for task, v in groups["tasks"].items()},
            "emotions": {emo: _cell_stats(v) for emo, v in groups["emotions"].items()},
        }
    return out


def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def summarize(sessions) -> dict:
    """Aggregate one or more finished sessions."""
    _require_finished(sessions)
    per_session = [summarize_session(s) for s in sessions]
    phases = sorted({p for s in per_session for p in s["phases"]})
    tasks = sorted({t for s in per_session for p in s["phases"].values() for t in p["tasks"]})
    emotions = sorted(
        {e for s in per_session for p in s["phases"].values() for e in p["emotions"]}
    )
    cross: dict = {}
    for phase in phases:
        cross[phase] = {"tasks": {}, "emotions": {}}
        for task in tasks:
            cells = [
                s["phases"][phase]["tasks"][task]
                for s in per_session
                if task in s["phases"].get(phase, {}).get("tasks", {})
            ]
            if cells:
                cross[phase]["tasks"][task] = {
                    "n_sessions": len(cells),
                    "accuracy": _mean([c["accuracy"] for c in cells]),
                    "mean_rt_ms": _mean([c["mean_rt_ms"] for c in cells]),
                }
        for emo in emotions:
            cells = [
                s["phases"][phase]["emotions"][emo]
                for s in per_session
                if emo in s["phases"].get(phase, {}).get("emotions", {})
            ]
            if cells:
                cross[phase]["emotions"][emo] = {
                    "n_sessions": len(cells),
                    "accuracy": _mean([c["accuracy"] for c in cells]),
                    "mean_rt_ms": _mean([c["mean_rt_ms"] for c in cells]),
                }
    paired = _paired_phase_differences(per_session, phases, tasks)
    return {"sessions": per_session, "cross": cross, "paired": paired}


def _paired_phase_differences(per_session, phases, tasks) -> dict:
    """Within-session (last phase - first phase) deltas, aggregated per task."""
    if len(phases) < 2:
        return {}
    first, last = phases[0], phases[-1]
    out = {}
    for task in tasks:
        acc_deltas, rt_deltas = [], []
        for s in per_session:
            try:
                a = s["phases"][first]["tasks"][task]
                b = s["phases"][last]["tasks"][task]
            except KeyError:
                continue
            acc_deltas.append(b["accuracy"] - a["accuracy"])
            if a["mean_rt_ms"] is not None and b["mean_rt_ms"] is not None:
                rt_deltas.append(b["mean_rt_ms"] - a["mean_rt_ms"])
        if acc_deltas:
            out[task] = {
                "phases": [first, last],
                "n": len(acc_deltas),
                "mean_accuracy_delta": _mean(acc_deltas),
                "mean_rt_delta_ms": _mean(rt_deltas),
                "n_improved": sum(1 for d in acc_deltas if d > 0),
                "n_worse": sum(1 for d in acc_deltas if d < 0),
                "n_equal": sum(1 for d in acc_deltas if d == 0),
            }
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def export_screens_csv(sessions) -> str:
    """One row per presented screen, ordered by session then screen index."""
    _require_finished(sessions)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCREEN_COLUMNS)
    for session in sorted(sessions, key=lambda s: s.session_id):
        for r in session.records:
            writer.writerow(
                [
                    session.session_id,
                    session.participant,
                    r.phase,
                    r.question_type,
                    r.target_emotion,
                    *r.stimulus_ids,
                    r.correct_index,
                    _fmt(r.chosen_index),
                    _fmt(r.is_correct),
                    _fmt(r.is_timeout),
                    _fmt(r.response_time_ms),
                    r.server_ts,
                ]
            )
    return buf.getvalue()


def export_summary_csv(sessions) -> str:
    data = summarize(sessions)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)

    def row(scope, sid, participant, phase, task, emotion, n, acc, rt, ni="", nw="", ne=""):
        writer.writerow(
            [scope, sid, participant, phase, task, emotion, n, _fmt(acc), _fmt(rt), ni, nw, ne]
        )

    for s in data["sessions"]:
        for phase in sorted(s["phases"]):
            groups = s["phases"][phase]
            for task in sorted(groups["tasks"]):
                c = groups["tasks"][task]
                row("session-task", s["session_id"], s["participant"], phase, task, "",
                    c["n"], c["accuracy"], c["mean_rt_ms"])
            for emo in sorted(groups["emotions"]):
                c = groups["emotions"][emo]
                row("session-emotion", s["session_id"], s["participant"], phase, "emotion",
                    emo, c["n"], c["accuracy"], c["mean_rt_ms"])
    for phase in sorted(data["cross"]):
        for task in sorted(data["cross"][phase]["tasks"]):
            c = data["cross"][phase]["tasks"][task]
            row("cross-task", "", "", phase, task, "", c["n_sessions"], c["accuracy"],
                c["mean_rt_ms"])
        for emo in sorted(data["cross"][phase]["emotions"]):
            c = data["cross"][phase]["emotions"][emo]
            row("cross-emotion", "", "", phase, "emotion", emo, c["n_sessions"],
                c["accuracy"], c["mean_rt_ms"])
    for task in sorted(data["paired"]):
        c = data["paired"][task]
        row("paired-task", "", "", "-".join(c["phases"]), task, "", c["n"],
            c["mean_accuracy_delta"], c["mean_rt_delta_ms"],
            c["n_improved"], c["n_worse"], c["n_equal"])
    return buf.getvalue()


def export_results(sessions, path) -> Path:
    """Write the per-screen CSV at `path` and a summary CSV next to it."""
    path = Path(path)
    path.write_text(export_screens_csv(sessions), encoding="utf-8")
    summary_path = path.with_name(path.stem + "_summary.csv")
    summary_path.write_text(export_summary_csv(sessions), encoding="utf-8")
    return summary_path
