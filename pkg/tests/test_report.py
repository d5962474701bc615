import re
from pathlib import Path

import pytest

from policyeval.report import EvaluationReport, ReportError, build_report, render
from policyeval.store import replay

from conftest import DATA_DIR
from test_store import events_for_full_session

GOLDEN = DATA_DIR / "report_golden.md"


class TestBuildReport:
    def test_counts_match_rubric_aggregation(self, fixture_state):
        report = build_report(fixture_state)
        counts = report.results["success_counts"]
        assert counts["A"] == {"successes": 13, "failures": 7, "total": 20}
        assert counts["B"] == {"successes": 14, "failures": 6, "total": 20}

    def test_blinded_session_rejected(self, bar_task):
        state = replay(events_for_full_session(bar_task, finalize=False))
        with pytest.raises(ReportError, match="blinded"):
            build_report(state)

    def test_zero_rollouts_yields_warning(self, bar_task):
        state = replay(events_for_full_session(bar_task, n_complete=0))
        report = build_report(state)
        assert report.results["completed"] == 0
        md = render(report).decode("utf-8")
        assert "Warning: incomplete session" in md
        assert "No completed rollouts" in md

    def test_single_policy_summary(self, bar_task, tmp_path):
        from policyeval.store import EventLog, create_plan

        plan = create_plan(["solo"], [ic.id for ic in bar_task.initial_conditions], 1, 0)
        log = EventLog(tmp_path / "solo.log")
        log.create_session(bar_task, plan)
        for e in plan.entries:
            log.append("RolloutStarted", {"rollout_index": e.rollout_index})
            log.append("RubricRecorded", {
                "rollout_index": e.rollout_index,
                "answers": {"overall": True, "grasped": True},
                "failure_note": "",
            })
        log.append("SessionUnblinded", {"forced": False})
        report = build_report(log.replay())
        assert report.results["comparisons"] == []
        md = render(report).decode("utf-8")
        assert "Single policy under evaluation" in md
        assert "Beta(" in md

    def test_missing_metrics_render_as_not_computed(self, fixture_state):
        metrics = {0: {"sparc": -3.25, "peaks": 2, "robustness": {"low_grasp": 9.0}}}
        report = build_report(fixture_state, metrics=metrics)
        md = render(report).decode("utf-8")
        assert "not computed" in md
        assert "-3.250" in md
        assert "9.000" in md

    def test_every_completed_rollout_appears_once(self, fixture_state):
        report = build_report(fixture_state)
        indices = []
        for p in fixture_state.plan.policies:
            indices.extend(report.performance[p]["rollouts"])
        assert sorted(indices) == list(range(40))


class TestRender:
    def test_golden_markdown_is_byte_identical(self, fixture_state):
        report = build_report(fixture_state)
        assert render(report, "markdown") == GOLDEN.read_bytes()

    def test_rendering_twice_is_stable(self, fixture_state):
        report = build_report(fixture_state)
        assert render(report, "markdown") == render(report, "markdown")

    def test_json_roundtrip(self, fixture_state):
        report = build_report(fixture_state)
        body = render(report, "json").decode("utf-8")
        assert EvaluationReport.from_json(body) == report

    def test_fixed_section_order(self, fixture_state):
        md = render(build_report(fixture_state)).decode("utf-8")
        positions = [
            md.index("## Experiment parameters"),
            md.index("## Results"),
            md.index("## Performance"),
            md.index("## Failure analysis"),
        ]
        assert positions == sorted(positions)

    def test_every_rate_has_raw_counts(self, fixture_state):
        md = render(build_report(fixture_state)).decode("utf-8")
        triples = re.findall(r"(\d+)/(\d+) \((\d+\.\d{2})\)", md)
        assert triples, "expected s/n (rate) triples in the report"
        for s, n, r in triples:
            assert float(r) == pytest.approx(round(int(s) / int(n), 2))

    def test_ic6_double_failure_listed(self, fixture_state):
        md = render(build_report(fixture_state)).decode("utf-8")
        assert "- IC 6: Both policies failed (A: 2, B: 2)" in md

    def test_non_ascii_failure_note(self, bar_task, tmp_path):
        from policyeval.store import EventLog, create_plan

        plan = create_plan(["A"], [ic.id for ic in bar_task.initial_conditions], 1, 0)
        log = EventLog(tmp_path / "u.log")
        log.create_session(bar_task, plan)
        for e in plan.entries:
            log.append("RolloutStarted", {"rollout_index": e.rollout_index})
            log.append("RubricRecorded", {
                "rollout_index": e.rollout_index,
                "answers": {"overall": False, "grasped": False},
                "failure_note": "café déplacé — ñ",
            })
        log.append("SessionUnblinded", {"forced": False})
        body = render(build_report(log.replay()), "markdown")
        assert "café déplacé — ñ" in body.decode("utf-8")
        body_json = render(build_report(log.replay()), "json")
        assert "café" in body_json.decode("utf-8")

    def test_unknown_format(self, fixture_state):
        with pytest.raises(ReportError, match="unknown report format"):
            render(build_report(fixture_state), "pdf")
