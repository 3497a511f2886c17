"""Trial plans and deterministic screen-sequence generation.

A plan names its phases (each a pipeline preset), the stimulus manifest
(faces with person / gender / emotion attributes) and the question counts.
Screen generation is a pure function of (plan, seed): every random choice
draws from a sorted collection through one seeded generator, so a seed
fully reproduces a participant's sequence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

EMOTIONS = (
    "happy",
    "sad",
    "surprised",
    "disgusted",
    "angry",
    "confused",
    "fearful",
    "neutral",
)
QUESTION_TYPES = ("odd_one_out", "gender", "emotion")
CHOICES_PER_SCREEN = 4

PROMPTS = {
    "odd_one_out": "Which person is the odd one out?",
    "gender": "Which person is a different gender?",
}


class PlanError(ValueError):
    """Plan definition is structurally invalid."""


class InsufficientStimuliError(PlanError):
    """The manifest cannot satisfy the plan's screen counts."""


@dataclass(frozen=True)
class StimulusRecord:
    stimulus_id: str
    person: str
    gender: str
    emotion: str
    image_path: str
    landmarks_path: str = ""


@dataclass(frozen=True)
class PhaseSpec:
    name: str
    preset: str
    curve: dict | None = None  # optional tone-curve override for the preset


@dataclass(frozen=True)
class TrialPlan:
    plan_id: str
    phases: tuple
    manifest: tuple
    name: str = ""
    repetitions_per_type: int = 24
    time_limit_s: float = 20.0
    emotions: tuple = EMOTIONS
    question_types: tuple = QUESTION_TYPES
    stimulus_map: dict = field(default_factory=dict)  # phase -> manifest id -> content id

    @property
    def screens_total(self) -> int:
        return len(self.phases) * len(self.question_types) * self.repetitions_per_type


@dataclass(frozen=True)
class Screen:
    index: int
    phase: str
    phase_index: int
    question_type: str
    prompt: str
    stimulus_ids: tuple  # manifest ids, one per choice slot
    content_ids: tuple  # content-hash ids of the pre-rendered stimuli
    correct_index: int
    target_emotion: str = ""


def validate_plan(plan: TrialPlan) -> None:
    if not plan.phases:
        raise PlanError("plan needs at least one phase")
    if len({p.name for p in plan.phases}) != len(plan.phases):
        raise PlanError("phase names must be unique")
    reps = plan.repetitions_per_type
    if reps < 1:
        raise PlanError(f"repetitions_per_type must be >= 1, got {reps}")
    if reps % len(plan.emotions) != 0:
        raise PlanError(
            f"repetitions_per_type ({reps}) must be divisible by the "
            f"emotion count ({len(plan.emotions)})"
        )
    if plan.time_limit_s <= 0:
        raise PlanError("time_limit_s must be positive")
    records = plan.manifest
    if not records:
        raise InsufficientStimuliError("manifest is empty")
    ids = [r.stimulus_id for r in records]
    if len(set(ids)) != len(ids):
        raise PlanError("stimulus ids must be unique")
    for r in records:
        if r.emotion not in plan.emotions:
            raise PlanError(f"stimulus {r.stimulus_id!r} has unknown emotion {r.emotion!r}")

    covered = {r.emotion for r in records}
    missing = [e for e in plan.emotions if e not in covered]
    if missing:
        raise InsufficientStimuliError(
            f"emotion task needs at least one stimulus per emotion; missing {missing}"
        )
    per_person = _group(records, lambda r: r.person)
    if len(per_person) < 2:
        raise InsufficientStimuliError("odd-one-out task needs at least two persons")
    if not any(len(v) >= 3 for v in per_person.values()):
        raise InsufficientStimuliError(
            "odd-one-out task needs a person with at least three stimuli"
        )
    per_gender = _group(records, lambda r: r.gender)
    if len(per_gender) < 2:
        raise InsufficientStimuliError("gender task needs stimuli of two genders")
    if not any(len(v) >= 3 for v in per_gender.values()):
        raise InsufficientStimuliError(
            "gender task needs a gender with at least three stimuli"
        )


def _group(records, key):
    out: dict = {}
    for r in records:
        out.setdefault(key(r), []).append(r)
    for v in out.values():
        v.sort(key=lambda r: r.stimulus_id)
    return out


def _place(rng: random.Random, correct, distractors):
    """Shuffle distractors and drop the correct stimulus into a uniform slot."""
    slot = rng.randrange(CHOICES_PER_SCREEN)
    others = list(distractors)
    rng.shuffle(others)
    choices = others[:slot] + [correct] + others[slot:]
    return tuple(r.stimulus_id for r in choices), slot


def _odd_one_out_screen(rng, records):
    per_person = _group(records, lambda r: r.person)
    majors = sorted(p for p, v in per_person.items() if len(v) >= 3)
    person_a = rng.choice(majors)
    person_b = rng.choice(sorted(p for p in per_person if p != person_a))
    distractors = rng.sample(per_person[person_a], 3)
    correct = rng.choice(per_person[person_b])
    return _place(rng, correct, distractors)


def _gender_screen(rng, records):
    per_gender = _group(records, lambda r: r.gender)
    majors = sorted(g for g, v in per_gender.items() if len(v) >= 3)
    major = rng.choice(majors)
    minority_pool = sorted(
        (r for r in records if r.gender != major), key=lambda r: r.stimulus_id
    )
    correct = rng.choice(minority_pool)
    major_by_person = _group(per_gender[major], lambda r: r.person)
    if len(major_by_person) >= 3:
        persons = rng.sample(sorted(major_by_person), 3)
        distractors = [rng.choice(major_by_person[p]) for p in persons]
    else:
        distractors = rng.sample(per_gender[major], 3)
    return _place(rng, correct, distractors)


def _emotion_screen(rng, records, target):
    pool = sorted(
        (r for r in records if r.emotion == target), key=lambda r: r.stimulus_id
    )
    correct = rng.choice(pool)
    same_person = [
        r for r in records if r.person == correct.person and r.emotion != target
    ]
    by_emotion = _group(same_person, lambda r: r.emotion)
    if len(by_emotion) < 3:
        others = [r for r in records if r.emotion != target]
        by_emotion = _group(others, lambda r: r.emotion)
    picked = rng.sample(sorted(by_emotion), 3)
    distractors = [rng.choice(by_emotion[e]) for e in picked]
    return _place(rng, correct, distractors)


def generate_screens(plan: TrialPlan, seed: int):
    """Pre-generate the full, shuffled screen list for one session."""
    validate_plan(plan)
    rng = random.Random(seed)
    records = sorted(plan.manifest, key=lambda r: r.stimulus_id)
    reps = plan.repetitions_per_type
    screens = []
    for phase_index, phase in enumerate(plan.phases):
        phase_screens = []
        for qtype in plan.question_types:
            if qtype == "emotion":
                targets = list(plan.emotions) * (reps // len(plan.emotions))
                for target in targets:
                    ids, slot = _emotion_screen(rng, records, target)
                    phase_screens.append(
                        ("emotion", f"Which face looks {target}?", ids, slot, target)
                    )
            else:
                builder = _odd_one_out_screen if qtype == "odd_one_out" else _gender_screen
                for _ in range(reps):
                    ids, slot = builder(rng, records)
                    phase_screens.append((qtype, PROMPTS[qtype], ids, slot, ""))
        rng.shuffle(phase_screens)
        for qtype, prompt, ids, slot, target in phase_screens:
            content_ids = tuple(
                plan.stimulus_map.get(phase.name, {}).get(sid, "") for sid in ids
            )
            screens.append(
                Screen(
                    index=len(screens),
                    phase=phase.name,
                    phase_index=phase_index,
                    question_type=qtype,
                    prompt=prompt,
                    stimulus_ids=ids,
                    content_ids=content_ids,
                    correct_index=slot,
                    target_emotion=target,
                )
            )
    return tuple(screens)
