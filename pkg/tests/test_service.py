import json

import pytest
from fastapi.testclient import TestClient

from policyeval.service import create_app


@pytest.fixture
def sessions_dir(tmp_path):
    return tmp_path / "sessions"


@pytest.fixture
def client(sessions_dir):
    return TestClient(create_app(sessions_dir))


@pytest.fixture
def task_doc(bar_task):
    return json.loads(bar_task.to_json())


def start_session(client, task_doc, policies=("A", "B"), repetitions=2, seed=7):
    resp = client.post(
        "/sessions",
        json={
            "task": task_doc,
            "policies": list(policies),
            "repetitions": repetitions,
            "seed": seed,
        },
    )
    assert resp.status_code == 200, resp.text
    return resp.json()["session_id"]


def answer_all_yes(client, sid, task_doc, n=None, note=""):
    """Drive /next + rubric submissions until done or n rollouts recorded."""
    answers = {q["id"]: True for q in task_doc["rubric"]}
    done = 0
    while n is None or done < n:
        nxt = client.get(f"/sessions/{sid}/next").json()
        if nxt["complete"]:
            break
        idx = nxt["assignment"]["rollout_index"]
        resp = client.post(
            f"/sessions/{sid}/rollouts/{idx}/rubric",
            json={"answers": answers, "failure_note": note},
        )
        assert resp.status_code == 200, resp.text
        done += 1
    return done


class TestSessionFlow:
    def test_create_reports_total(self, client, task_doc):
        sid = start_session(client, task_doc)
        nxt = client.get(f"/sessions/{sid}/next").json()
        assert nxt["complete"] is False
        assert nxt["progress"] == {"completed": 0, "total": 40, "blinded": True}

    def test_next_is_stable_until_submission(self, client, task_doc):
        sid = start_session(client, task_doc)
        first = client.get(f"/sessions/{sid}/next").json()
        again = client.get(f"/sessions/{sid}/next").json()
        assert first == again

    def test_full_session_end_to_end(self, client, task_doc):
        sid = start_session(client, task_doc)
        assert answer_all_yes(client, sid, task_doc) == 40
        nxt = client.get(f"/sessions/{sid}/next").json()
        assert nxt["complete"] is True
        fin = client.post(f"/sessions/{sid}/finalize", json={}).json()
        assert fin["success_counts"]["A"] == {"successes": 20, "failures": 0, "total": 20}
        assert fin["success_counts"]["B"] == {"successes": 20, "failures": 0, "total": 20}
        assert fin["excluded_rollouts"] == []
        assert len(fin["comparisons"]) == 1
        report = client.get(f"/sessions/{sid}/report")
        assert report.status_code == 200
        assert report.headers["content-type"].startswith("text/markdown")
        assert "Policy A succeeded 20/20 (1.00)" in report.text

    def test_json_report_format(self, client, task_doc):
        sid = start_session(client, task_doc)
        answer_all_yes(client, sid, task_doc)
        client.post(f"/sessions/{sid}/finalize", json={})
        resp = client.get(f"/sessions/{sid}/report", params={"format": "json"})
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["task_name"] == "energy-bar"

    def test_amend_supersedes_earlier_answer(self, client, task_doc):
        sid = start_session(client, task_doc)
        answer_all_yes(client, sid, task_doc, n=3)
        first_idx = None
        # the first assignment of the session was rollout plan.entries[0]
        nxt = client.get(f"/sessions/{sid}/next").json()
        current = nxt["assignment"]["rollout_index"]
        # amend a rollout that is no longer current
        log_answers = {q["id"]: False for q in task_doc["rubric"]}
        # find a completed rollout index: submit without amend must 409
        for idx in range(40):
            if idx == current:
                continue
            resp = client.post(
                f"/sessions/{sid}/rollouts/{idx}/rubric",
                json={"answers": log_answers},
            )
            if resp.status_code == 409:
                first_idx = idx
                break
        assert first_idx is not None
        assert resp.json()["error"] == "not_current_rollout"
        resp = client.post(
            f"/sessions/{sid}/rollouts/{first_idx}/rubric",
            json={"answers": log_answers, "amend": True},
        )
        assert resp.status_code == 200


class TestErrors:
    def test_unknown_session(self, client):
        resp = client.get("/sessions/nope/next")
        assert resp.status_code == 404
        assert set(resp.json()) == {"error", "detail"}
        assert resp.json()["error"] == "unknown_session"

    def test_invalid_task_rejected(self, client, task_doc):
        bad = dict(task_doc)
        bad["success_criteria"] = ""
        resp = client.post(
            "/sessions", json={"task": bad, "policies": ["A"], "repetitions": 1, "seed": 0}
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "invalid_task"

    def test_missing_questions_named(self, client, task_doc):
        sid = start_session(client, task_doc)
        nxt = client.get(f"/sessions/{sid}/next").json()
        idx = nxt["assignment"]["rollout_index"]
        resp = client.post(
            f"/sessions/{sid}/rollouts/{idx}/rubric", json={"answers": {"overall": True}}
        )
        assert resp.status_code == 422
        body = resp.json()
        assert body["error"] == "missing_questions"
        assert "grasped" in body["detail"]

    def test_unknown_rollout(self, client, task_doc):
        sid = start_session(client, task_doc)
        resp = client.post(
            f"/sessions/{sid}/rollouts/99/rubric",
            json={"answers": {"overall": True, "grasped": True}},
        )
        assert resp.status_code == 404
        assert resp.json()["error"] == "unknown_rollout"

    def test_finalize_incomplete_lists_pending(self, client, task_doc):
        sid = start_session(client, task_doc)
        answer_all_yes(client, sid, task_doc, n=2)
        resp = client.post(f"/sessions/{sid}/finalize", json={})
        assert resp.status_code == 409
        body = resp.json()
        assert body["error"] == "session_incomplete"
        assert "pending rollouts" in body["detail"]

    def test_finalize_twice(self, client, task_doc):
        sid = start_session(client, task_doc)
        answer_all_yes(client, sid, task_doc)
        assert client.post(f"/sessions/{sid}/finalize", json={}).status_code == 200
        resp = client.post(f"/sessions/{sid}/finalize", json={})
        assert resp.status_code == 409
        assert resp.json()["error"] == "already_unblinded"

    def test_report_while_blinded(self, client, task_doc):
        sid = start_session(client, task_doc)
        resp = client.get(f"/sessions/{sid}/report")
        assert resp.status_code == 409
        assert resp.json()["error"] == "session_blinded"

    def test_submit_after_finalize(self, client, task_doc):
        sid = start_session(client, task_doc)
        answer_all_yes(client, sid, task_doc)
        client.post(f"/sessions/{sid}/finalize", json={})
        resp = client.post(
            f"/sessions/{sid}/rollouts/0/rubric",
            json={"answers": {"overall": True, "grasped": True}, "amend": True},
        )
        assert resp.status_code == 409
        assert resp.json()["error"] == "session_unblinded"

    def test_unknown_report_format(self, client, task_doc):
        sid = start_session(client, task_doc)
        resp = client.get(f"/sessions/{sid}/report", params={"format": "pdf"})
        assert resp.status_code == 422
        assert resp.json()["error"] == "unknown_format"


class TestBlindness:
    def test_no_blinded_response_leaks_policy_ids(self, client, task_doc):
        policies = ["alpha-v3-checkpoint", "beta-v1-checkpoint"]
        sid = start_session(client, task_doc, policies=policies, repetitions=1)
        answers = {q["id"]: True for q in task_doc["rubric"]}
        bodies = []
        for _ in range(5):
            nxt = client.get(f"/sessions/{sid}/next")
            bodies.append(nxt.text)
            idx = nxt.json()["assignment"]["rollout_index"]
            sub = client.post(
                f"/sessions/{sid}/rollouts/{idx}/rubric", json={"answers": answers}
            )
            bodies.append(sub.text)
        bodies.append(client.post(f"/sessions/{sid}/finalize", json={}).text)  # 409 body
        for body in bodies[:-1]:
            for p in policies:
                assert p not in body
        # error bodies while blinded must not leak either
        assert all(p not in bodies[-1] for p in policies) or "pending" in bodies[-1]

    def test_finalize_reveals_plan(self, client, task_doc):
        sid = start_session(client, task_doc, policies=["A", "B"], repetitions=1)
        answer_all_yes(client, sid, task_doc)
        fin = client.post(f"/sessions/{sid}/finalize", json={}).json()
        labels = {e["blinded_label"]: e["policy_id"] for e in fin["plan"]["entries"]}
        assert len(labels) == 20
        assert set(labels.values()) == {"A", "B"}


class TestCrashSafety:
    def test_restart_mid_session_resumes_identically(self, sessions_dir, task_doc):
        client1 = TestClient(create_app(sessions_dir))
        sid = start_session(client1, task_doc)
        answer_all_yes(client1, sid, task_doc, n=7)
        expected_next = client1.get(f"/sessions/{sid}/next").json()

        # simulate a crash: fresh app instance over the same log directory
        client2 = TestClient(create_app(sessions_dir))
        assert client2.get(f"/sessions/{sid}/next").json() == expected_next
        answer_all_yes(client2, sid, task_doc)
        fin = client2.post(f"/sessions/{sid}/finalize", json={})
        assert fin.status_code == 200

    def test_corrupted_log_surfaces_conflict(self, sessions_dir, task_doc):
        client = TestClient(create_app(sessions_dir))
        sid = start_session(client, task_doc)
        log_path = sessions_dir / f"{sid}.log"
        data = log_path.read_text(encoding="utf-8")
        log_path.write_text(data[:-5], encoding="utf-8")  # truncate mid-line
        resp = client.get(f"/sessions/{sid}/next")
        assert resp.status_code == 409
        assert resp.json()["error"] == "invalid_event"
        assert "truncated" in resp.json()["detail"]
