import json
from collections import Counter

import pytest
from fastapi.testclient import TestClient

from provisim.trial.fixtures import demo_plan_doc
from provisim.trial.plan import (
    EMOTIONS,
    InsufficientStimuliError,
    PhaseSpec,
    StimulusRecord,
    TrialPlan,
    generate_screens,
    validate_plan,
)
from provisim.trial.service import create_app
from provisim.trial.session import (
    DuplicateResponseError,
    OutOfOrderResponseError,
    ResponseTimingError,
    SessionFinishedError,
    SessionNotFinishedError,
    TrialSession,
)
from provisim.trial.store import TrialStore
from provisim.trial.summary import (
    SCREEN_COLUMNS,
    export_results,
    export_screens_csv,
    summarize,
)


def metadata_manifest(persons=("a", "b", "c", "d")):
    records = []
    for i, person in enumerate(persons):
        gender = "female" if i % 2 == 0 else "male"
        for emotion in EMOTIONS:
            records.append(
                StimulusRecord(
                    stimulus_id=f"{person}_{emotion}",
                    person=person,
                    gender=gender,
                    emotion=emotion,
                    image_path=f"images/{person}_{emotion}.png",
                )
            )
    return tuple(records)


def metadata_plan(reps=24, phases=("phase1", "phase2")):
    return TrialPlan(
        plan_id="test-plan",
        phases=tuple(PhaseSpec(n, "paper-trial-phase1") for n in phases),
        manifest=metadata_manifest(),
        repetitions_per_type=reps,
    )


class TestPlan:
    def test_screen_count(self):
        screens = generate_screens(metadata_plan(), seed=5)
        assert len(screens) == 144

    def test_each_emotion_three_times_per_phase(self):
        screens = generate_screens(metadata_plan(), seed=5)
        counts = Counter(
            (s.phase, s.target_emotion) for s in screens if s.question_type == "emotion"
        )
        assert len(counts) == 2 * len(EMOTIONS)
        assert all(v == 3 for v in counts.values())

    def test_same_seed_reproduces(self):
        a = generate_screens(metadata_plan(), seed=123)
        b = generate_screens(metadata_plan(), seed=123)
        assert a == b

    def test_different_seed_differs(self):
        a = generate_screens(metadata_plan(), seed=1)
        b = generate_screens(metadata_plan(), seed=2)
        assert a != b

    def test_exactly_one_correct_choice(self):
        screens = generate_screens(metadata_plan(), seed=9)
        for s in screens:
            assert len(s.stimulus_ids) == 4
            assert len(set(s.stimulus_ids)) == 4
            assert 0 <= s.correct_index < 4

    def test_screen_semantics(self):
        by_id = {r.stimulus_id: r for r in metadata_manifest()}
        for s in generate_screens(metadata_plan(), seed=11):
            records = [by_id[i] for i in s.stimulus_ids]
            correct = records[s.correct_index]
            others = [r for k, r in enumerate(records) if k != s.correct_index]
            if s.question_type == "odd_one_out":
                assert len({r.person for r in others}) == 1
                assert correct.person != others[0].person
            elif s.question_type == "gender":
                assert len({r.gender for r in others}) == 1
                assert correct.gender != others[0].gender
            else:
                assert correct.emotion == s.target_emotion
                assert all(r.emotion != s.target_emotion for r in others)
                assert len({r.emotion for r in others}) == 3

    def test_phases_are_sequential_blocks(self):
        screens = generate_screens(metadata_plan(), seed=3)
        phase_of = [s.phase for s in screens]
        assert phase_of[:72] == ["phase1"] * 72
        assert phase_of[72:] == ["phase2"] * 72

    def test_correct_position_uniform_chi_square(self):
        # >= 10,000 screens across seeds; chi-square at p > 0.01 (df=3)
        counts = Counter()
        plan = metadata_plan()
        for seed in range(70):
            for s in generate_screens(plan, seed):
                counts[s.correct_index] += 1
        total = sum(counts.values())
        assert total >= 10000
        expected = total / 4.0
        chi2 = sum((counts[k] - expected) ** 2 / expected for k in range(4))
        assert chi2 < 11.3449  # critical value at alpha = 0.01, df = 3

    def test_missing_emotion_is_insufficient(self):
        records = tuple(r for r in metadata_manifest() if r.emotion != "fearful")
        plan = TrialPlan(
            plan_id="p",
            phases=(PhaseSpec("phase1", "baseline"),),
            manifest=records,
        )
        with pytest.raises(InsufficientStimuliError):
            validate_plan(plan)

    def test_single_person_is_insufficient(self):
        plan = TrialPlan(
            plan_id="p",
            phases=(PhaseSpec("phase1", "baseline"),),
            manifest=metadata_manifest(persons=("solo",)),
        )
        with pytest.raises(InsufficientStimuliError):
            validate_plan(plan)

    def test_indivisible_repetitions_rejected(self):
        plan = metadata_plan(reps=23)
        with pytest.raises(Exception):
            validate_plan(plan)


def driven_session(reps=8, answer=lambda s: s.correct_index, delays=lambda i: 1000.0 + i):
    plan = metadata_plan(reps=reps)
    screens = generate_screens(plan, seed=77)
    session = TrialSession("s1", plan.plan_id, "tester", 77, screens, plan.time_limit_s)
    while not session.finished:
        screen = session.next_screen()
        session.submit(
            screen.index, answer(screen), False, delays(screen.index), "2026-01-01T00:00:00+00:00"
        )
    return session, screens


class TestSession:
    def test_next_is_idempotent_until_answered(self):
        plan = metadata_plan(reps=8)
        session = TrialSession("s", "p", "x", 1, generate_screens(plan, 1), 20.0)
        assert session.next_screen().index == 0
        assert session.next_screen().index == 0
        session.submit(0, 1, False, 500.0, "t")
        assert session.next_screen().index == 1

    def test_out_of_order_and_duplicate(self):
        plan = metadata_plan(reps=8)
        session = TrialSession("s", "p", "x", 1, generate_screens(plan, 1), 20.0)
        with pytest.raises(OutOfOrderResponseError):
            session.submit(3, 0, False, 100.0, "t")
        session.submit(0, 0, False, 100.0, "t")
        with pytest.raises(DuplicateResponseError):
            session.submit(0, 1, False, 100.0, "t")

    def test_time_limit_enforced(self):
        plan = metadata_plan(reps=8)
        session = TrialSession("s", "p", "x", 1, generate_screens(plan, 1), 20.0)
        with pytest.raises(ResponseTimingError):
            session.submit(0, 0, False, 20501.0, "t")
        session.submit(0, 0, False, 20499.0, "t")  # inside the 500 ms tolerance

    def test_timeout_recorded_incorrect(self):
        plan = metadata_plan(reps=8)
        session = TrialSession("s", "p", "x", 1, generate_screens(plan, 1), 20.0)
        record = session.submit(0, None, True, 20000.0, "t")
        assert record.is_timeout
        assert not record.is_correct
        assert record.response_time_ms is None

    def test_finished_session_rejects_everything(self):
        session, _ = driven_session()
        assert session.state == "finished"
        with pytest.raises(SessionFinishedError):
            session.next_screen()
        with pytest.raises(SessionFinishedError):
            session.submit(48, 0, False, 100.0, "t")

    def test_invalid_choice_rejected(self):
        plan = metadata_plan(reps=8)
        session = TrialSession("s", "p", "x", 1, generate_screens(plan, 1), 20.0)
        with pytest.raises(ResponseTimingError):
            session.submit(0, 7, False, 100.0, "t")

    def test_random_call_sequences_admit_no_disorder(self):
        # property: whatever the call sequence, the cursor only ever advances
        # by accepted responses, in order, exactly once per screen
        import random

        plan = metadata_plan(reps=8)
        for seed in range(20):
            rng = random.Random(seed)
            screens = generate_screens(plan, seed)
            session = TrialSession("s", "p", "x", seed, screens, 20.0)
            expected_cursor = 0
            while expected_cursor < len(screens) and rng.random() > 0.001:
                action = rng.choice(
                    ["next", "submit_ok", "submit_past", "submit_future",
                     "timeout", "submit_bad_time"]
                )
                if action == "next":
                    assert session.next_screen().index == expected_cursor
                elif action == "submit_ok":
                    session.submit(expected_cursor, rng.randrange(4), False, 1000.0, "t")
                    expected_cursor += 1
                elif action == "timeout":
                    session.submit(expected_cursor, None, True, 20000.0, "t")
                    expected_cursor += 1
                elif action == "submit_past" and expected_cursor > 0:
                    with pytest.raises(DuplicateResponseError):
                        session.submit(rng.randrange(expected_cursor), 0, False, 1000.0, "t")
                elif action == "submit_future" and expected_cursor < len(screens) - 1:
                    with pytest.raises(OutOfOrderResponseError):
                        session.submit(
                            rng.randrange(expected_cursor + 1, len(screens)),
                            0, False, 1000.0, "t",
                        )
                elif action == "submit_bad_time":
                    with pytest.raises(ResponseTimingError):
                        session.submit(expected_cursor, 0, False, 99999.0, "t")
                assert session.cursor == expected_cursor
            assert [r.screen_index for r in session.records] == list(range(expected_cursor))


class TestSummary:
    def test_all_correct_gives_unit_accuracy(self):
        session, _ = driven_session()
        data = summarize([session])
        for phase in data["sessions"][0]["phases"].values():
            for cell in phase["tasks"].values():
                assert cell["accuracy"] == 1.0

    def test_emotion_accuracy_quantized(self):
        # answer emotion screens wrong with probability ~depends on screen index
        session, screens = driven_session(
            reps=8,
            answer=lambda s: s.correct_index
            if not (s.question_type == "emotion" and s.index % 2)
            else (s.correct_index + 1) % 4,
        )
        data = summarize([session])
        allowed = {0.0, 1.0}  # reps=8 -> each emotion shown once per phase
        for phase in data["sessions"][0]["phases"].values():
            for cell in phase["emotions"].values():
                assert cell["accuracy"] in allowed

    def test_mean_rt_over_answers(self):
        session, screens = driven_session(delays=lambda i: 2000.0)
        data = summarize([session])
        for phase in data["sessions"][0]["phases"].values():
            for cell in phase["tasks"].values():
                assert cell["mean_rt_ms"] == pytest.approx(2000.0, abs=1e-9)

    def test_unfinished_rejected(self):
        plan = metadata_plan(reps=8)
        session = TrialSession("s", "p", "x", 1, generate_screens(plan, 1), 20.0)
        with pytest.raises(SessionNotFinishedError):
            summarize([session])

    def test_paired_differences_present(self):
        session, _ = driven_session()
        data = summarize([session])
        assert set(data["paired"]) == {"odd_one_out", "gender", "emotion"}
        for cell in data["paired"].values():
            assert cell["n"] == 1
            assert cell["n_improved"] + cell["n_worse"] + cell["n_equal"] == 1


class TestExport:
    def test_row_count_and_header(self):
        session, _ = driven_session()
        text = export_screens_csv([session])
        lines = text.splitlines()
        assert lines[0] == ",".join(SCREEN_COLUMNS)
        assert len(lines) == 1 + len(session.records)

    def test_empty_set_has_header_only(self):
        assert export_screens_csv([]).splitlines() == [",".join(SCREEN_COLUMNS)]

    def test_re_export_identical(self, tmp_path):
        session, _ = driven_session()
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        s1 = export_results([session], p1)
        s2 = export_results([session], p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert s1.read_bytes() == s2.read_bytes()


@pytest.fixture(scope="module")
def service(fixture_corpus, tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("trialdata")
    app = create_app(data_dir)
    client = TestClient(app)
    doc = demo_plan_doc(fixture_corpus, repetitions_per_type=8)
    resp = client.post("/plans", json=doc)
    assert resp.status_code == 200, resp.text
    return client, resp.json()["plan_id"], data_dir


class TestHttpApi:
    def test_plan_info(self, service):
        client, plan_id, _ = service
        resp = client.get(f"/plans/{plan_id}")
        assert resp.status_code == 200
        assert resp.json()["screens_total"] == 48

    def test_unknown_plan_404(self, service):
        client, _, _ = service
        assert client.get("/plans/nope").status_code == 404
        assert client.post(
            "/sessions", json={"plan_id": "nope", "participant": "p", "seed": 1}
        ).status_code == 404

    def test_insufficient_manifest_400(self, service, fixture_corpus):
        client, _, _ = service
        doc = demo_plan_doc(fixture_corpus, repetitions_per_type=8)
        doc["manifest"] = [m for m in doc["manifest"] if m["emotion"] != "happy"]
        resp = client.post("/plans", json=doc)
        assert resp.status_code == 400
        assert "missing" in resp.json()["detail"]

    def test_full_session_flow(self, service):
        client, plan_id, data_dir = service
        resp = client.post(
            "/sessions", json={"plan_id": plan_id, "participant": "p9", "seed": 41}
        )
        session_id = resp.json()["session_id"]
        total = resp.json()["screens_total"]
        store = TrialStore(data_dir)  # server-side view for the oracle answers
        oracle = {s.index: s.correct_index for s in store.get_session(session_id).screens}

        answered = 0
        while True:
            nxt = client.get(f"/sessions/{session_id}/next")
            if nxt.status_code == 409:
                break
            screen = nxt.json()
            assert len(screen["choices"]) == 4
            # stimulus URLs resolve to real PNGs
            if screen["screen_index"] == 0:
                png = client.get(screen["choices"][0]["url"])
                assert png.status_code == 200
                assert png.content[:8] == b"\x89PNG\r\n\x1a\n"
            submit = client.post(
                f"/sessions/{session_id}/responses",
                json={
                    "screen_index": screen["screen_index"],
                    "choice": oracle[screen["screen_index"]],
                    "client_elapsed_ms": 1500.0,
                },
            )
            assert submit.status_code == 200
            answered += 1
        assert answered == total

        summary = client.get(f"/sessions/{session_id}/summary")
        assert summary.status_code == 200
        body = summary.json()
        for phase in body["sessions"][0]["phases"].values():
            for cell in phase["tasks"].values():
                assert cell["accuracy"] == 1.0

        export = client.get("/export.csv")
        assert export.status_code == 200
        assert export.text.splitlines()[0] == ",".join(SCREEN_COLUMNS)

    def test_stimulus_404(self, service):
        client, _, _ = service
        assert client.get("/stimuli/deadbeef.png").status_code == 404
        assert client.get("/stimuli/..%2Fescape.png").status_code == 404

    def test_store_replay_after_restart(self, service):
        client, plan_id, data_dir = service
        resp = client.post(
            "/sessions", json={"plan_id": plan_id, "participant": "p10", "seed": 5}
        )
        session_id = resp.json()["session_id"]
        client.post(
            f"/sessions/{session_id}/responses",
            json={"screen_index": 0, "choice": 2, "client_elapsed_ms": 900.0},
        )
        fresh = TrialStore(data_dir)
        session = fresh.get_session(session_id)
        assert session.cursor == 1
        assert session.records[0].chosen_index == 2
        assert session.plan_id == plan_id

    def test_replay_tolerates_torn_final_write(self, service):
        client, plan_id, data_dir = service
        resp = client.post(
            "/sessions", json={"plan_id": plan_id, "participant": "p11", "seed": 6}
        )
        session_id = resp.json()["session_id"]
        for i in range(2):
            client.post(
                f"/sessions/{session_id}/responses",
                json={"screen_index": i, "choice": 1, "client_elapsed_ms": 700.0},
            )
        log = data_dir / "sessions" / f"{session_id}.jsonl"
        with open(log, "a", encoding="utf-8") as fh:
            fh.write('{"type": "response", "screen_in')  # crash mid-append
        session = TrialStore(data_dir).get_session(session_id)
        assert session.cursor == 2  # every acked screen survives, the torn one does not
