"""Build and render the evaluation report for a finished session.

The report always pairs every percentage with its raw counts, states the
sampler settings behind every comparison, and lists failures both per
initial condition and pooled. Markdown output uses a fixed section
order (Experiment parameters, Results, Performance, Failure analysis)
and fixed number formatting (rates to 2 decimals, robustness and
smoothness to 3), so rendering the same report twice is byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .model import aggregate_rubric
from .stats import compare, posterior
from .store import SessionState


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class EvaluationReport:
    task_name: str
    experiment_parameters: dict
    results: dict
    performance: dict
    failure_analysis: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "task_name": self.task_name,
                "experiment_parameters": self.experiment_parameters,
                "results": self.results,
                "performance": self.performance,
                "failure_analysis": self.failure_analysis,
            },
            indent=2,
            sort_keys=True,
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, text: str) -> "EvaluationReport":
        return cls(**json.loads(text))


def _rate(successes: int, total: int) -> str:
    if total == 0:
        return "0/0"
    return f"{successes}/{total} ({successes / total:.2f})"


def build_report(
    state: SessionState,
    metrics: Optional[Mapping[int, Mapping]] = None,
    comparisons: Optional[Sequence] = None,
    include_aborted: bool = False,
    prior: tuple[float, float] = (1.0, 1.0),
    level: float = 0.95,
    n_samples: int = 100_000,
    seed: int = 0,
) -> EvaluationReport:
    """Assemble the report from an unblinded session plus computed metrics.

    ``metrics`` maps rollout index to a dict with optional keys
    "sparc", "peaks" and "robustness" (spec name -> value); anything
    missing is rendered as "not computed". ``comparisons`` may carry
    precomputed ComparisonResults for consecutive policy pairs;
    otherwise they are computed here with the stated sampler settings.
    """
    if state.blinded:
        raise ReportError("session is still blinded; finalize it before reporting")
    metrics = metrics or {}
    task = state.task
    plan = state.plan
    policies = list(plan.policies)
    records = state.completed_records(include_aborted=include_aborted)
    table = aggregate_rubric(task, records, policies=policies)
    overall_q = task.overall_question

    per_policy_counts = {}
    for p in policies:
        yes, no = table.cell(overall_q.id, p)
        per_policy_counts[p] = {"successes": yes, "failures": no, "total": yes + no}

    experiment_parameters = {
        "success_criteria": task.success_criteria,
        "policies": policies,
        "rollouts_per_policy": {
            p: per_policy_counts[p]["total"] for p in policies
        },
        "planned_per_policy": len(plan.ics) * plan.repetitions,
        "ab_protocol": (
            "interleaved blind A/B within a single session; assignment order "
            f"seeded with {plan.seed}, {plan.repetitions} repetition(s) per "
            "(policy, initial condition) pair"
        ),
        "initial_conditions": [
            {
                "id": ic.id,
                "description": ic.description,
                "in_distribution": ic.in_distribution,
            }
            for ic in task.initial_conditions
        ],
        "unblind_forced": state.unblind_forced,
        "excluded_rollouts": sorted(state.incomplete_indices()) if not include_aborted else [],
    }

    rubric_rows = []
    for q in table.questions:
        rubric_rows.append(
            {
                "question": q.text,
                "id": q.id,
                "is_overall_success": q.is_overall_success,
                "counts": {p: list(table.cell(q.id, p)) for p in policies},
            }
        )

    posteriors = {}
    for p in policies:
        c = per_policy_counts[p]
        post = posterior(prior[0], prior[1], c["successes"], c["failures"])
        posteriors[p] = {
            "alpha": post.alpha,
            "beta": post.beta,
            "mean": post.mean,
            "successes": c["successes"],
            "failures": c["failures"],
        }

    comparison_docs = []
    if comparisons is not None:
        pairs = list(zip(policies, policies[1:]))
        for (a, b), res in zip(pairs, comparisons):
            comparison_docs.append(_comparison_doc(a, b, res))
    else:
        for a, b in zip(policies, policies[1:]):
            ca, cb = per_policy_counts[a], per_policy_counts[b]
            if ca["total"] == 0 or cb["total"] == 0:
                continue
            res = compare(
                (ca["successes"], ca["failures"]),
                (cb["successes"], cb["failures"]),
                prior=prior,
                level=level,
                n_samples=n_samples,
                seed=seed,
            )
            comparison_docs.append(_comparison_doc(a, b, res))

    results = {
        "completed": len(records),
        "planned": state.total,
        "complete": len(records) == state.total,
        "success_counts": per_policy_counts,
        "rubric_table": rubric_rows,
        "posteriors": posteriors,
        "comparisons": comparison_docs,
    }

    performance = {}
    for p in policies:
        indices = sorted(r.rollout_index for r in records if r.policy_id == p)
        sparc_vals = [_metric(metrics, i, "sparc") for i in indices]
        peak_vals = [_metric(metrics, i, "peaks") for i in indices]
        robustness: dict[str, list] = {name: [] for name in task.stl_specs}
        for i in indices:
            rb = metrics.get(i, {}).get("robustness", {})
            for name in task.stl_specs:
                robustness[name].append(rb.get(name))
        performance[p] = {
            "rollouts": indices,
            "sparc": sparc_vals,
            "velocity_peaks": peak_vals,
            "robustness": robustness,
        }

    per_ic: dict[str, dict] = {}
    for ic in task.initial_conditions:
        fails = {}
        for p in policies:
            fails[p] = sum(
                1
                for r in records
                if r.ic_id == ic.id and r.policy_id == p and not r.rubric_responses[overall_q.id]
            )
        if any(fails.values()):
            per_ic[str(ic.id)] = fails
    notes = sorted(
        {r.failure_note for r in records if r.failure_note and not r.rubric_responses[overall_q.id]}
    )
    failure_analysis = {
        "per_ic_failures": per_ic,
        "pooled_failures": {
            p: {"failures": per_policy_counts[p]["failures"], "total": per_policy_counts[p]["total"]}
            for p in policies
        },
        "failure_notes": notes,
        "session_notes": list(state.notes),
    }

    return EvaluationReport(
        task_name=task.name,
        experiment_parameters=experiment_parameters,
        results=results,
        performance=performance,
        failure_analysis=failure_analysis,
    )


def _metric(metrics: Mapping, index: int, key: str):
    value = metrics.get(index, {}).get(key)
    return value


def _comparison_doc(first: str, second: str, res) -> dict:
    return {
        "first_policy": first,
        "second_policy": second,
        "prob_second_better": res.prob_second_better,
        "diff_interval": [res.diff_interval[0], res.diff_interval[1]],
        "level": res.level,
        "excludes_zero": res.excludes_zero,
        "n_samples": res.n_samples,
        "seed": res.seed,
    }


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _fmt(value, digits: int = 3) -> str:
    if value is None:
        return "not computed"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    return f"{value:.{digits}f}"


def render(report: EvaluationReport, format: str = "markdown") -> bytes:
    if format == "json":
        return (report.to_json() + "\n").encode("utf-8")
    if format != "markdown":
        raise ReportError(f"unknown report format {format!r}")

    ep = report.experiment_parameters
    res = report.results
    lines: list[str] = []
    add = lines.append

    add(f"# Evaluation report: {report.task_name}")
    add("")
    add("## Experiment parameters")
    add("")
    add(f"- Success criteria: {ep['success_criteria']}")
    add(f"- Policies compared: {', '.join(ep['policies'])}")
    counts = ", ".join(
        f"{p}: {ep['rollouts_per_policy'][p]}" for p in ep["policies"]
    )
    add(f"- Rollouts per policy (completed / planned {ep['planned_per_policy']}): {counts}")
    add(f"- Protocol: {ep['ab_protocol']}")
    if ep.get("unblind_forced"):
        add("- Warning: session was unblinded before completion (forced)")
    if ep.get("excluded_rollouts"):
        excluded = ", ".join(str(i) for i in ep["excluded_rollouts"])
        add(f"- Excluded incomplete rollouts: {excluded}")
    add(f"- Initial conditions ({len(ep['initial_conditions'])}):")
    for ic in ep["initial_conditions"]:
        dist = "in-distribution" if ic["in_distribution"] else "out-of-distribution"
        desc = ic["description"] or "(no description)"
        add(f"  - IC {ic['id']}: {desc} [{dist}]")
    add("")

    add("## Results")
    add("")
    if not res["complete"]:
        add(
            f"- Warning: incomplete session, {res['completed']}/{res['planned']} "
            "rollouts recorded"
        )
    if res["completed"] == 0:
        add("- No completed rollouts; nothing to report.")
    for p in ep["policies"]:
        c = res["success_counts"][p]
        add(f"- Policy {p} succeeded {_rate(c['successes'], c['total'])}")
    add("")
    add("### Rubric")
    add("")
    header = "| Sub-goal |" + "".join(f" {p} (Y/N) |" for p in ep["policies"])
    add(header)
    add("|" + "---|" * (len(ep["policies"]) + 1))
    for row in res["rubric_table"]:
        cells = "".join(f" {row['counts'][p][0]} / {row['counts'][p][1]} |" for p in ep["policies"])
        add(f"| {row['question']} |" + cells)
    add("")
    add("### Posteriors")
    add("")
    for p in ep["policies"]:
        post = res["posteriors"][p]
        add(
            f"- Policy {p}: Beta({_fmt(post['alpha'], 1)}, {_fmt(post['beta'], 1)}), "
            f"posterior mean {post['mean']:.2f} "
            f"[{post['successes']}/{post['successes'] + post['failures']} raw]"
        )
    if len(ep["policies"]) < 2:
        add("- Single policy under evaluation; no comparison to report.")
    for cmp_doc in res["comparisons"]:
        lo, hi = cmp_doc["diff_interval"]
        add(
            f"- P({cmp_doc['second_policy']} better than {cmp_doc['first_policy']}) = "
            f"{cmp_doc['prob_second_better']:.2f}; {cmp_doc['level']:.0%} credible interval "
            f"of the rate difference [{lo:.2f}, {hi:.2f}] "
            f"({'excludes' if cmp_doc['excludes_zero'] else 'contains'} zero; "
            f"{cmp_doc['n_samples']} samples, seed {cmp_doc['seed']})"
        )
    add("")

    add("## Performance")
    add("")
    for p in ep["policies"]:
        perf = report.performance[p]
        add(f"### Policy {p}")
        add("")
        add("- Smoothness (spectral arc length, less negative is smoother): "
            + (", ".join(_fmt(v) for v in perf["sparc"]) or "none"))
        add("- Velocity peaks: " + (", ".join(_fmt(v) for v in perf["velocity_peaks"]) or "none"))
        for spec_name in sorted(perf["robustness"]):
            vals = perf["robustness"][spec_name]
            add(
                f"- Robustness ({spec_name}): "
                + (", ".join(_fmt(v) for v in vals) or "none")
            )
        add("")

    add("## Failure analysis")
    add("")
    per_ic = report.failure_analysis["per_ic_failures"]
    if per_ic:
        add("Failures per initial condition:")
        add("")
        for ic_id in sorted(per_ic, key=int):
            fails = per_ic[ic_id]
            both = [p for p in ep["policies"] if fails.get(p)]
            detail = ", ".join(f"{p}: {fails[p]}" for p in both)
            prefix = "Both policies failed" if len(both) == len(ep["policies"]) > 1 else "Failures"
            add(f"- IC {ic_id}: {prefix} ({detail})")
        add("")
    add("Pooled failures:")
    add("")
    for p in ep["policies"]:
        pooled = report.failure_analysis["pooled_failures"][p]
        add(f"- Policy {p} failed {_rate(pooled['failures'], pooled['total'])}")
    notes = report.failure_analysis["failure_notes"]
    if notes:
        add("")
        add("Failure notes:")
        add("")
        for note in notes:
            add(f"- {note}")
    session_notes = report.failure_analysis["session_notes"]
    if session_notes:
        add("")
        add("Session notes:")
        add("")
        for note in session_notes:
            add(f"- {note}")
    add("")
    return ("\n".join(lines)).encode("utf-8")
