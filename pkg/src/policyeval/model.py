"""Shared domain types: tasks, rubrics, initial conditions, rollouts, traces.

Everything here is immutable after construction and safe for concurrent
reads. Trace files are either CSV (``t,<signal>,...``) or JSON; task
specs are plain JSON documents mirroring the dataclass fields.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Mapping, Optional, Sequence


class ModelError(ValueError):
    pass


class IncompleteRecordError(ModelError):
    """A rollout record is missing rubric answers."""

    def __init__(self, rollout_index: int, missing: Sequence[str]):
        self.rollout_index = rollout_index
        self.missing = list(missing)
        super().__init__(
            f"rollout {rollout_index} is missing answers for: {', '.join(self.missing)}"
        )


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trace:
    """Time-indexed multi-signal record of one rollout.

    ``times`` is a strictly increasing sequence of timestamps in seconds
    (relative time only; no epoch). Every signal series has exactly the
    same length as ``times`` and all values are finite.
    """

    times: tuple[float, ...]
    signals: Mapping[str, tuple[float, ...]]
    units: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) < 1:
            raise ModelError("trace must have at least one sample")
        for a, b in zip(self.times, self.times[1:]):
            if not b > a:
                raise ModelError("trace times must be strictly increasing")
        if not all(math.isfinite(t) for t in self.times):
            raise ModelError("trace times must be finite")
        for name, series in self.signals.items():
            if len(series) != len(self.times):
                raise ModelError(
                    f"signal {name!r} has {len(series)} samples, expected {len(self.times)}"
                )
            if not all(math.isfinite(v) for v in series):
                raise ModelError(f"signal {name!r} contains non-finite values")
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(
            self,
            "signals",
            {k: tuple(float(v) for v in vs) for k, vs in self.signals.items()},
        )
        object.__setattr__(self, "units", dict(self.units))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return self.times[-1] - self.times[0]

    def signal(self, name: str) -> tuple[float, ...]:
        if name not in self.signals:
            raise ModelError(f"unknown signal {name!r}")
        return self.signals[name]

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "times": list(self.times),
            "signals": {k: list(v) for k, v in self.signals.items()},
            "units": dict(self.units),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Trace":
        doc = json.loads(text)
        return cls(
            times=tuple(doc["times"]),
            signals={k: tuple(v) for k, v in doc["signals"].items()},
            units=doc.get("units", {}),
        )

    def to_csv(self) -> str:
        names = list(self.signals)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + names)
        for i, t in enumerate(self.times):
            w.writerow([repr(t)] + [repr(self.signals[n][i]) for n in names])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trace":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:1] != ["t"]:
            raise ModelError("trace CSV must start with a 't,...' header")
        names = rows[0][1:]
        times = []
        series: list[list[float]] = [[] for _ in names]
        for row in rows[1:]:
            if not row:
                continue
            times.append(float(row[0]))
            for j, v in enumerate(row[1:]):
                series[j].append(float(v))
        return cls(times=tuple(times), signals={n: tuple(s) for n, s in zip(names, series)})

    @classmethod
    def load(cls, path: str | Path) -> "Trace":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".json":
            return cls.from_json(text)
        return cls.from_csv(text)


# ---------------------------------------------------------------------------
# Task definition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RubricQuestion:
    id: str
    text: str
    is_overall_success: bool = False


@dataclass(frozen=True)
class InitialCondition:
    id: int
    description: str = ""
    reference_image: Optional[str] = None  # opaque path, never decoded
    in_distribution: bool = True


@dataclass(frozen=True)
class SparcConfig:
    pad_level: int = 4
    max_cutoff_hz: float = 10.0
    amplitude_threshold: float = 0.05

    def __post_init__(self):
        if self.pad_level < 0:
            raise ModelError("pad_level must be >= 0")
        if not self.max_cutoff_hz > 0:
            raise ModelError("max_cutoff_hz must be > 0")
        if not 0 < self.amplitude_threshold < 1:
            raise ModelError("amplitude_threshold must be in (0, 1)")


@dataclass(frozen=True)
class PeakConfig:
    prominence_fraction: float = 0.05

    def __post_init__(self):
        if not 0 < self.prominence_fraction < 1:
            raise ModelError("prominence_fraction must be in (0, 1)")


@dataclass(frozen=True)
class MetricConfig:
    sparc: SparcConfig = field(default_factory=SparcConfig)
    peaks: PeakConfig = field(default_factory=PeakConfig)


@dataclass(frozen=True)
class TaskSpec:
    name: str
    success_criteria: str
    rubric: tuple[RubricQuestion, ...]
    initial_conditions: tuple[InitialCondition, ...]
    stl_specs: Mapping[str, str] = field(default_factory=dict)
    contact_signal: Optional[str] = None
    contact_threshold: Optional[float] = None
    metric_config: MetricConfig = field(default_factory=MetricConfig)

    def __post_init__(self):
        object.__setattr__(self, "rubric", tuple(self.rubric))
        object.__setattr__(self, "initial_conditions", tuple(self.initial_conditions))
        object.__setattr__(self, "stl_specs", dict(self.stl_specs))

    @property
    def overall_question(self) -> RubricQuestion:
        for q in self.rubric:
            if q.is_overall_success:
                return q
        raise ModelError("task has no overall-success question")

    def question_ids(self) -> list[str]:
        return [q.id for q in self.rubric]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "TaskSpec":
        mc = doc.get("metric_config", {})
        return cls(
            name=doc["name"],
            success_criteria=doc.get("success_criteria", ""),
            rubric=tuple(RubricQuestion(**q) for q in doc.get("rubric", [])),
            initial_conditions=tuple(
                InitialCondition(**ic) for ic in doc.get("initial_conditions", [])
            ),
            stl_specs=doc.get("stl_specs", {}),
            contact_signal=doc.get("contact_signal"),
            contact_threshold=doc.get("contact_threshold"),
            metric_config=MetricConfig(
                sparc=SparcConfig(**mc.get("sparc", {})),
                peaks=PeakConfig(**mc.get("peaks", {})),
            ),
        )

    @classmethod
    def from_json(cls, text: str) -> "TaskSpec":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "TaskSpec":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class RolloutRecord:
    rollout_index: int
    policy_id: str
    ic_id: int
    rubric_responses: Mapping[str, bool]
    failure_note: str = ""
    trace_ref: Optional[str] = None
    timestamp: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "rubric_responses", dict(self.rubric_responses))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def validate_task_spec(spec: TaskSpec) -> list[str]:
    """Return every invariant violation as a message; empty list means valid."""
    violations: list[str] = []
    if not spec.success_criteria.strip():
        violations.append("success criteria missing")
    if not spec.rubric:
        violations.append("rubric is empty")
    if not spec.initial_conditions:
        violations.append("no initial conditions defined")

    overall = [q.id for q in spec.rubric if q.is_overall_success]
    if spec.rubric and len(overall) == 0:
        violations.append("no rubric question is marked as overall success")
    elif len(overall) > 1:
        violations.append(
            "multiple rubric questions marked as overall success: " + ", ".join(overall)
        )

    ids = [q.id for q in spec.rubric]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        violations.append("duplicate rubric question ids: " + ", ".join(dupes))
    for q in spec.rubric:
        if not q.text.strip():
            violations.append(f"rubric question {q.id!r} has empty text")

    ic_ids = [ic.id for ic in spec.initial_conditions]
    if spec.initial_conditions and sorted(ic_ids) != list(range(len(ic_ids))):
        violations.append(
            "initial condition ids must be unique and contiguous from 0, got "
            + str(ic_ids)
        )
    return violations


@dataclass(frozen=True)
class RubricTable:
    """Per-question, per-policy yes/no counts, in rubric order."""

    questions: tuple[RubricQuestion, ...]
    policies: tuple[str, ...]
    counts: Mapping[tuple[str, str], tuple[int, int]]  # (question_id, policy) -> (yes, no)

    def cell(self, question_id: str, policy: str) -> tuple[int, int]:
        return self.counts.get((question_id, policy), (0, 0))


def aggregate_rubric(
    task: TaskSpec, records: Sequence[RolloutRecord], policies: Optional[Sequence[str]] = None
) -> RubricTable:
    """Tally yes/no answers per rubric question, grouped by policy.

    Raises IncompleteRecordError for any record that does not answer every
    rubric question.
    """
    qids = task.question_ids()
    for r in records:
        missing = [q for q in qids if q not in r.rubric_responses]
        if missing:
            raise IncompleteRecordError(r.rollout_index, missing)
    if policies is None:
        seen: list[str] = []
        for r in records:
            if r.policy_id not in seen:
                seen.append(r.policy_id)
        policies = sorted(seen)
    counts: dict[tuple[str, str], tuple[int, int]] = {}
    for q in qids:
        for p in policies:
            yes = sum(1 for r in records if r.policy_id == p and r.rubric_responses[q])
            no = sum(1 for r in records if r.policy_id == p and not r.rubric_responses[q])
            counts[(q, p)] = (yes, no)
    return RubricTable(questions=task.rubric, policies=tuple(policies), counts=counts)
