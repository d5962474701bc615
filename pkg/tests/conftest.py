import json
from pathlib import Path

import pytest

from policyeval.model import InitialCondition, RubricQuestion, TaskSpec
from policyeval.store import EventLog, create_plan

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def pancake_task():
    """Six-question rubric in the style of a bimanual pancake task."""
    return TaskSpec(
        name="pancake",
        success_criteria=(
            "The pancake is flipped, picked up, and resting on the plate at the end "
            "of the run."
        ),
        rubric=(
            RubricQuestion("overall", "Overall success?", is_overall_success=True),
            RubricQuestion("collision", "Robot collided with anything?"),
            RubricQuestion("right_spatula", "Right arm picked up spatula?"),
            RubricQuestion("left_spatula", "Left arm picked up spatula?"),
            RubricQuestion("flipped", "Robot flipped pancake?"),
            RubricQuestion("picked_up", "Robot picked up pancake?"),
        ),
        initial_conditions=tuple(
            InitialCondition(id=i, description=f"pancake centered on griddle, offset {i}")
            for i in range(5)
        ),
    )


@pytest.fixture
def bar_task():
    """Bimanual pick-and-place task used for the report fixtures."""
    return TaskSpec(
        name="energy-bar",
        success_criteria=(
            "Energy bar is on the wooden tray and the tray is on the table. "
            "Collisions with other items are not failures."
        ),
        rubric=(
            RubricQuestion("overall", "Energy bar ended up on the wooden tray?",
                           is_overall_success=True),
            RubricQuestion("grasped", "Robot grasped the energy bar?"),
        ),
        initial_conditions=tuple(
            InitialCondition(id=i, description=f"bar pose {i}") for i in range(10)
        ),
        stl_specs={
            "low_grasp": "always ((gripper_diff*1000 > 9) -> (z < 0.25))",
        },
        contact_signal="contact",
        contact_threshold=500.0,
    )


# Failure layout mirroring the report fixture: A fails 7 runs (both runs of
# ICs 4 and 6, one run each of 7, 8, 9), B fails 6 (both runs of ICs 2, 6, 9).
A_FAILS = {4: 2, 6: 2, 7: 1, 8: 1, 9: 1}
B_FAILS = {2: 2, 6: 2, 9: 2}


def fixture_outcome(policy_id, ic_id, occurrence):
    fails = (A_FAILS if policy_id == "A" else B_FAILS).get(ic_id, 0)
    success = occurrence >= fails
    if policy_id == "A":
        grasped = success or ic_id == 7
        note = "" if success else (
            "placed the bar beside the tray" if ic_id == 7
            else "failed to grasp or dropped the bar prematurely"
        )
    else:
        grasped = True
        note = "" if success else "picked the bar up but moved away from the tray"
    return {"overall": success, "grasped": grasped}, note


def build_fixture_log(path, task, finalize=True):
    """Write the 40-rollout fixture session (A 13/20, B 14/20) to a log file."""
    plan = create_plan(policies=["A", "B"], ics=[ic.id for ic in task.initial_conditions],
                       repetitions=2, seed=7)
    log = EventLog(path)
    log.create_session(task, plan)
    seen: dict[tuple[str, int], int] = {}
    for entry in plan.entries:
        key = (entry.policy_id, entry.ic_id)
        occurrence = seen.get(key, 0)
        seen[key] = occurrence + 1
        answers, note = fixture_outcome(entry.policy_id, entry.ic_id, occurrence)
        log.append("RolloutStarted", {"rollout_index": entry.rollout_index})
        log.append(
            "RubricRecorded",
            {"rollout_index": entry.rollout_index, "answers": answers, "failure_note": note},
        )
    if finalize:
        log.append("SessionUnblinded", {"forced": False})
    return log


@pytest.fixture
def fixture_log(tmp_path, bar_task):
    return build_fixture_log(tmp_path / "session.log", bar_task)


@pytest.fixture
def fixture_state(fixture_log):
    return fixture_log.replay()


@pytest.fixture
def bar_task_file(tmp_path, bar_task):
    path = tmp_path / "energy-bar.json"
    path.write_text(bar_task.to_json(), encoding="utf-8")
    return path
