"""Blind A/B session planning and an append-only, replayable event log.

A session is a single log file of LF-delimited JSON objects
``{"seq": n, "ts": iso8601, "kind": "...", "payload": {...}}``. The
full session state is derivable purely by replaying the log, so a
session survives crashes and can be released as a portable artifact.
While a session is blinded, no projection returned by SessionState
exposes a policy id; the mapping from blinded labels to policies lives
only in the plan recorded at session creation.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .model import RolloutRecord, TaskSpec


class StoreError(ValueError):
    pass


class LogCorruptionError(StoreError):
    def __init__(self, line_number: int, detail: str):
        self.line_number = line_number
        super().__init__(f"corrupted event log at line {line_number}: {detail}")


# ---------------------------------------------------------------------------
# Assignment plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanEntry:
    rollout_index: int
    blinded_label: str
    policy_id: str
    ic_id: int


@dataclass(frozen=True)
class AssignmentPlan:
    entries: tuple[PlanEntry, ...]
    seed: int
    policies: tuple[str, ...]
    ics: tuple[int, ...]
    repetitions: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "policies": list(self.policies),
            "ics": list(self.ics),
            "repetitions": self.repetitions,
            "entries": [
                {
                    "rollout_index": e.rollout_index,
                    "blinded_label": e.blinded_label,
                    "policy_id": e.policy_id,
                    "ic_id": e.ic_id,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AssignmentPlan":
        return cls(
            entries=tuple(PlanEntry(**e) for e in doc["entries"]),
            seed=doc["seed"],
            policies=tuple(doc["policies"]),
            ics=tuple(doc["ics"]),
            repetitions=doc["repetitions"],
        )


def create_plan(
    policies: Sequence[str], ics: Sequence[int], repetitions: int, seed: int
) -> AssignmentPlan:
    """Seeded, balanced, interleaved assignment of (policy, IC) pairs.

    Every pair appears exactly ``repetitions`` times in a seeded random
    order; blinded labels carry only the rollout index.
    """
    if not policies or not ics:
        raise StoreError("policies and initial conditions must be non-empty")
    if len(set(policies)) != len(policies):
        raise StoreError("duplicate policy ids")
    if repetitions < 1:
        raise StoreError("repetitions must be >= 1")
    pairs = [(p, ic) for p in policies for ic in ics for _ in range(repetitions)]
    random.Random(seed).shuffle(pairs)
    entries = tuple(
        PlanEntry(rollout_index=i, blinded_label=f"R-{i}", policy_id=p, ic_id=ic)
        for i, (p, ic) in enumerate(pairs)
    )
    return AssignmentPlan(
        entries=entries,
        seed=seed,
        policies=tuple(policies),
        ics=tuple(ics),
        repetitions=repetitions,
    )


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------

KINDS = (
    "SessionCreated",
    "RolloutStarted",
    "RubricRecorded",
    "TrajectoryAttached",
    "SessionUnblinded",
    "NoteAdded",
)


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    ts: str
    kind: str
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "ts": self.ts, "kind": self.kind, "payload": self.payload}
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def make_event(seq: int, kind: str, payload: dict, ts: Optional[str] = None) -> SessionEvent:
    if kind not in KINDS:
        raise StoreError(f"unknown event kind {kind!r}")
    return SessionEvent(seq=seq, ts=ts or _now(), kind=kind, payload=payload)


# ---------------------------------------------------------------------------
# Session state (replay target)
# ---------------------------------------------------------------------------

@dataclass
class SessionState:
    task: TaskSpec
    plan: AssignmentPlan
    blinded: bool = True
    started: set[int] = field(default_factory=set)
    records: dict[int, RolloutRecord] = field(default_factory=dict)
    rubric_history: dict[int, list[dict]] = field(default_factory=dict)
    trajectories: dict[int, str] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    unblind_forced: bool = False

    @property
    def total(self) -> int:
        return len(self.plan.entries)

    @property
    def completed(self) -> int:
        return len(self.records)

    def is_complete(self) -> bool:
        return self.completed == self.total

    def next_index(self) -> Optional[int]:
        """First plan entry without a complete rubric, or None when done."""
        for e in self.plan.entries:
            if e.rollout_index not in self.records:
                return e.rollout_index
        return None

    def incomplete_indices(self) -> list[int]:
        return [e.rollout_index for e in self.plan.entries if e.rollout_index not in self.records]

    def assignment_view(self, rollout_index: int) -> dict:
        """Blinded projection of one plan entry; never includes a policy id."""
        entry = self.plan.entries[rollout_index]
        ic = next(ic for ic in self.task.initial_conditions if ic.id == entry.ic_id)
        return {
            "rollout_index": entry.rollout_index,
            "blinded_label": entry.blinded_label,
            "ic_id": ic.id,
            "ic_description": ic.description,
            "reference_image": ic.reference_image,
            "rubric": [
                {"id": q.id, "text": q.text, "is_overall_success": q.is_overall_success}
                for q in self.task.rubric
            ],
        }

    def progress_view(self) -> dict:
        return {
            "completed": self.completed,
            "total": self.total,
            "blinded": self.blinded,
        }

    def completed_records(self, include_aborted: bool = False) -> list[RolloutRecord]:
        """Records with a full rubric; started-but-unanswered rollouts are
        excluded unless include_aborted, in which case they count as
        all-no records."""
        out = [self.records[i] for i in sorted(self.records)]
        if include_aborted:
            for i in sorted(self.started - set(self.records)):
                entry = self.plan.entries[i]
                out.append(
                    RolloutRecord(
                        rollout_index=i,
                        policy_id=entry.policy_id,
                        ic_id=entry.ic_id,
                        rubric_responses={q.id: False for q in self.task.rubric},
                        failure_note="aborted rollout (no rubric recorded)",
                    )
                )
            out.sort(key=lambda r: r.rollout_index)
        return out


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------

def _apply(state: Optional[SessionState], event: SessionEvent) -> SessionState:
    if event.kind == "SessionCreated":
        if state is not None:
            raise StoreError("duplicate SessionCreated")
        return SessionState(
            task=TaskSpec.from_dict(event.payload["task"]),
            plan=AssignmentPlan.from_dict(event.payload["plan"]),
        )
    if state is None:
        raise StoreError("no SessionCreated")
    if not state.blinded and event.kind != "NoteAdded":
        raise StoreError(f"{event.kind} after SessionUnblinded")

    if event.kind == "RolloutStarted":
        idx = event.payload["rollout_index"]
        if not 0 <= idx < state.total:
            raise StoreError(f"RolloutStarted for unknown rollout {idx}")
        state.started.add(idx)
    elif event.kind == "RubricRecorded":
        idx = event.payload["rollout_index"]
        if not 0 <= idx < state.total:
            raise StoreError(f"RubricRecorded for unknown rollout {idx}")
        answers = {k: bool(v) for k, v in event.payload["answers"].items()}
        qids = set(state.task.question_ids())
        missing = sorted(qids - set(answers))
        if missing:
            raise StoreError(
                f"RubricRecorded for rollout {idx} missing question ids: {', '.join(missing)}"
            )
        unknown = sorted(set(answers) - qids)
        if unknown:
            raise StoreError(
                f"RubricRecorded for rollout {idx} has unknown question ids: {', '.join(unknown)}"
            )
        entry = state.plan.entries[idx]
        # superseding answers are allowed; the latest wins, history is kept
        state.rubric_history.setdefault(idx, []).append(event.payload)
        state.records[idx] = RolloutRecord(
            rollout_index=idx,
            policy_id=entry.policy_id,
            ic_id=entry.ic_id,
            rubric_responses=answers,
            failure_note=event.payload.get("failure_note", ""),
            trace_ref=state.trajectories.get(idx),
            timestamp=event.ts,
        )
    elif event.kind == "TrajectoryAttached":
        idx = event.payload["rollout_index"]
        if not 0 <= idx < state.total:
            raise StoreError(f"TrajectoryAttached for unknown rollout {idx}")
        state.trajectories[idx] = event.payload["path"]
        if idx in state.records:
            old = state.records[idx]
            state.records[idx] = RolloutRecord(
                rollout_index=old.rollout_index,
                policy_id=old.policy_id,
                ic_id=old.ic_id,
                rubric_responses=old.rubric_responses,
                failure_note=old.failure_note,
                trace_ref=event.payload["path"],
                timestamp=old.timestamp,
            )
    elif event.kind == "SessionUnblinded":
        forced = bool(event.payload.get("forced", False))
        if not state.is_complete() and not forced:
            raise StoreError(
                "SessionUnblinded before completion without force; pending rollouts: "
                + ", ".join(str(i) for i in state.incomplete_indices())
            )
        state.blinded = False
        state.unblind_forced = forced
    elif event.kind == "NoteAdded":
        state.notes.append(event.payload["text"])
    else:
        raise StoreError(f"unknown event kind {event.kind!r}")
    return state


def replay(events: Iterable[SessionEvent]) -> SessionState:
    """Deterministically rebuild session state from an event sequence."""
    state: Optional[SessionState] = None
    expected_seq = 0
    for event in events:
        if event.seq != expected_seq:
            raise StoreError(f"sequence gap: expected {expected_seq}, got {event.seq}")
        state = _apply(state, event)
        expected_seq += 1
    if state is None:
        raise StoreError("no SessionCreated")
    return state


# ---------------------------------------------------------------------------
# File-backed log
# ---------------------------------------------------------------------------

class EventLog:
    """Append-only event log in a file; one JSON object per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists()

    def read_events(self) -> list[SessionEvent]:
        events: list[SessionEvent] = []
        text = self.path.read_text(encoding="utf-8")
        if text and not text.endswith("\n"):
            last = text.count("\n") + 1
            raise LogCorruptionError(last, "truncated line (missing trailing newline)")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                raise LogCorruptionError(lineno, "blank line")
            try:
                doc = json.loads(line)
                events.append(
                    SessionEvent(
                        seq=doc["seq"], ts=doc["ts"], kind=doc["kind"], payload=doc["payload"]
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise LogCorruptionError(lineno, str(exc)) from exc
        return events

    def replay(self) -> SessionState:
        return replay(self.read_events())

    def append(self, kind: str, payload: dict) -> SessionEvent:
        """Validate against the replayed state, then append one event."""
        events = self.read_events() if self.exists() else []
        event = make_event(len(events), kind, payload)
        replay(events + [event])  # raises if the event is invalid
        with self.path.open("a", encoding="utf-8", newline="\n") as fh:
            fh.write(event.to_line() + "\n")
        return event

    def create_session(self, task: TaskSpec, plan: AssignmentPlan) -> SessionEvent:
        if self.exists() and self.path.stat().st_size > 0:
            raise StoreError(f"log file {self.path} already exists")
        return self.append(
            "SessionCreated", {"task": json.loads(task.to_json()), "plan": plan.to_dict()}
        )
