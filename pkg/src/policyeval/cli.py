"""Command-line surface: batch analysis plus session management.

The CLI is a thin composition layer over the library; it reads and
writes the same trace, task and event-log files as the HTTP service.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .metrics import count_velocity_peaks, sparc, speed_profile, split_at_contact
from .model import PeakConfig, SparcConfig, TaskSpec, Trace, validate_task_spec
from .report import build_report, render
from .stats import compare as stats_compare
from .stats import shift_report
from .stl import eval_boolean, eval_robustness, parse_formula
from .store import EventLog, StoreError, create_plan


@click.group()
def cli():
    """Evaluation toolkit for learned robot policies."""


def _parse_counts(text: str) -> tuple[int, int]:
    s, f = text.split(",")
    return int(s), int(f)


def _parse_prior(text: str) -> tuple[float, float]:
    a, b = text.split(",")
    return float(a), float(b)


# -- task -------------------------------------------------------------------

@cli.group()
def task():
    """Task definition utilities."""


@task.command("validate")
@click.argument("spec_path", type=click.Path(exists=True))
def task_validate(spec_path):
    """Check a task file against all invariants."""
    spec = TaskSpec.load(spec_path)
    violations = validate_task_spec(spec)
    if violations:
        for v in violations:
            click.echo(f"violation: {v}")
        sys.exit(1)
    click.echo("ok")


# -- session ----------------------------------------------------------------

@cli.group()
def session():
    """Blind A/B session management."""


@session.command("plan")
@click.option("--task", "task_path", required=True, type=click.Path(exists=True))
@click.option("--policies", required=True, help="comma-separated policy ids")
@click.option("--reps", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
def session_plan(task_path, policies, reps, seed, out_path):
    """Create a session log with a seeded blind assignment plan."""
    spec = TaskSpec.load(task_path)
    violations = validate_task_spec(spec)
    if violations:
        raise click.ClickException("invalid task: " + "; ".join(violations))
    plan = create_plan(
        policies=policies.split(","),
        ics=[ic.id for ic in spec.initial_conditions],
        repetitions=reps,
        seed=seed,
    )
    log = EventLog(out_path)
    log.create_session(spec, plan)
    click.echo(f"created session with {len(plan.entries)} rollouts at {out_path}")


@session.command("submit")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--rollout", required=True, type=int)
@click.option("--answers", required=True, help="comma-separated qid=yes|no pairs")
@click.option("--note", default="")
def session_submit(log_path, rollout, answers, note):
    """Record a rubric for one rollout (scripted evaluator input)."""
    log = EventLog(log_path)
    state = log.replay()
    parsed = {}
    for pair in answers.split(","):
        qid, _, val = pair.partition("=")
        parsed[qid.strip()] = val.strip().lower() in ("yes", "y", "true", "1")
    try:
        if rollout not in state.started:
            log.append("RolloutStarted", {"rollout_index": rollout})
        log.append(
            "RubricRecorded",
            {"rollout_index": rollout, "answers": parsed, "failure_note": note},
        )
    except StoreError as exc:
        raise click.ClickException(str(exc))
    state = log.replay()
    click.echo(f"progress {state.completed}/{state.total}")


@session.command("attach")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--rollout", required=True, type=int)
@click.option("--trace", "trace_path", required=True, type=click.Path())
def session_attach(log_path, rollout, trace_path):
    """Attach a trajectory file to a rollout after the fact."""
    EventLog(log_path).append(
        "TrajectoryAttached", {"rollout_index": rollout, "path": trace_path}
    )
    click.echo("attached")


@session.command("finalize")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--force", is_flag=True, default=False)
def session_finalize(log_path, force):
    """Unblind a session; refuses while rollouts are pending unless --force."""
    log = EventLog(log_path)
    state = log.replay()
    try:
        log.append("SessionUnblinded", {"forced": force and not state.is_complete()})
    except StoreError as exc:
        raise click.ClickException(str(exc))
    click.echo("unblinded")


@session.command("serve")
@click.option("--sessions-dir", default="sessions", show_default=True, type=click.Path())
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static-dir", default=None, type=click.Path())
def session_serve(sessions_dir, port, host, static_dir):
    """Run the live session service for the evaluator UI."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(sessions_dir, static_dir), host=host, port=port)


# -- metrics ----------------------------------------------------------------

def _load_profile(trace_path, signals, rate, contact_signal, contact_threshold):
    trace = Trace.load(trace_path)
    if contact_signal is not None:
        pre, _, _ = split_at_contact(trace, contact_signal, contact_threshold)
        if pre is None:
            raise click.ClickException("no pre-contact samples in trace")
        trace = pre
    return speed_profile(trace, signals.split(","), rate)


@cli.group()
def metrics():
    """Trajectory metrics over trace files."""


@metrics.command("stl")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--formula", "formula_src", default=None, help="formula source text")
@click.option("--task", "task_path", default=None, type=click.Path(exists=True),
              help="evaluate every formula declared by the task")
def metrics_stl(trace_path, formula_src, task_path):
    """Robustness and Boolean verdicts of formulas on a trace."""
    trace = Trace.load(trace_path)
    formulas: dict[str, str] = {}
    if formula_src:
        formulas["formula"] = formula_src
    if task_path:
        formulas.update(TaskSpec.load(task_path).stl_specs)
    if not formulas:
        raise click.ClickException("provide --formula and/or --task")
    for name, src in formulas.items():
        f = parse_formula(src)
        rho = eval_robustness(f, trace)
        verdict = "satisfied" if eval_boolean(f, trace) else "violated"
        click.echo(f"{name}: robustness {rho:.3f} ({verdict})")


@metrics.command("sparc")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--signals", required=True, help="comma-separated position signals")
@click.option("--rate", default=100.0, show_default=True, type=float)
@click.option("--contact-signal", default=None)
@click.option("--contact-threshold", default=500.0, show_default=True, type=float)
@click.option("--pad-level", default=4, show_default=True, type=int)
@click.option("--max-cutoff-hz", default=10.0, show_default=True, type=float)
@click.option("--amplitude-threshold", default=0.05, show_default=True, type=float)
def metrics_sparc(trace_path, signals, rate, contact_signal, contact_threshold,
                  pad_level, max_cutoff_hz, amplitude_threshold):
    """Spectral arc-length smoothness of the (pre-contact) speed profile."""
    profile = _load_profile(trace_path, signals, rate, contact_signal, contact_threshold)
    config = SparcConfig(pad_level=pad_level, max_cutoff_hz=max_cutoff_hz,
                         amplitude_threshold=amplitude_threshold)
    click.echo(f"{sparc(profile, config):.3f}")


@metrics.command("peaks")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--signals", required=True, help="comma-separated position signals")
@click.option("--rate", default=100.0, show_default=True, type=float)
@click.option("--contact-signal", default=None)
@click.option("--contact-threshold", default=500.0, show_default=True, type=float)
@click.option("--prominence", default=0.05, show_default=True, type=float)
def metrics_peaks(trace_path, signals, rate, contact_signal, contact_threshold, prominence):
    """Count velocity peaks of the (pre-contact) speed profile."""
    profile = _load_profile(trace_path, signals, rate, contact_signal, contact_threshold)
    click.echo(count_velocity_peaks(profile, PeakConfig(prominence_fraction=prominence)))


# -- stats ------------------------------------------------------------------

@cli.group()
def stats():
    """Success-rate analysis."""


@stats.command("compare")
@click.option("--a", "a_counts", required=True, help="successes,failures for the first policy")
@click.option("--b", "b_counts", required=True, help="successes,failures for the second policy")
@click.option("--prior", default="1,1", show_default=True)
@click.option("--level", default=0.95, show_default=True, type=float)
@click.option("--samples", default=100_000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
def stats_compare_cmd(a_counts, b_counts, prior, level, samples, seed):
    """Bayesian comparison of two policies' success counts."""
    res = stats_compare(
        _parse_counts(a_counts),
        _parse_counts(b_counts),
        prior=_parse_prior(prior),
        level=level,
        n_samples=samples,
        seed=seed,
    )
    lo, hi = res.diff_interval
    click.echo(f"P(second better) = {res.prob_second_better:.4f}")
    click.echo(
        f"{level:.0%} credible interval of the rate difference: [{lo:.4f}, {hi:.4f}]"
        f" ({'excludes' if res.excludes_zero else 'contains'} zero;"
        f" {samples} samples, seed {seed})"
    )


@stats.command("shift")
@click.option("--before", "before_path", required=True, type=click.Path(exists=True),
              help="JSON mapping IC id to [successes, failures]")
@click.option("--after", "after_path", required=True, type=click.Path(exists=True))
@click.option("--prior", default="1,1", show_default=True)
@click.option("--level", default=0.95, show_default=True, type=float)
@click.option("--samples", default=100_000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
def stats_shift(before_path, after_path, prior, level, samples, seed):
    """Detect matched-IC distribution shift between two sessions."""
    def load(path):
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return {int(k): (int(v[0]), int(v[1])) for k, v in doc.items()}

    rep = shift_report(
        load(before_path), load(after_path), prior=_parse_prior(prior),
        level=level, n_samples=samples, seed=seed,
    )
    click.echo(
        f"pooled (ICs {', '.join(map(str, rep.shared_ics))}): "
        f"P(after better) = {rep.pooled.prob_second_better:.4f}"
    )
    for ic in sorted(rep.per_ic):
        click.echo(f"IC {ic}: P(after better) = {rep.per_ic[ic].prob_second_better:.4f}")


# -- report -----------------------------------------------------------------

@cli.group()
def report():
    """Evaluation reports."""


@report.command("build")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="markdown", show_default=True,
              type=click.Choice(["markdown", "json"]))
@click.option("--metrics", "metrics_path", default=None, type=click.Path(exists=True),
              help="JSON mapping rollout index to computed metrics")
@click.option("--include-aborted", is_flag=True, default=False,
              help="count started-but-unanswered rollouts as failures")
@click.option("--prior", default="1,1", show_default=True)
@click.option("--level", default=0.95, show_default=True, type=float)
@click.option("--samples", default=100_000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", default="-", show_default=True)
def report_build(log_path, fmt, metrics_path, include_aborted, prior, level,
                 samples, seed, out_path):
    """Render the evaluation report for a finalized session."""
    state = EventLog(log_path).replay()
    computed = None
    if metrics_path:
        doc = json.loads(Path(metrics_path).read_text(encoding="utf-8"))
        computed = {int(k): v for k, v in doc.items()}
    rep = build_report(
        state,
        metrics=computed,
        include_aborted=include_aborted,
        prior=_parse_prior(prior),
        level=level,
        n_samples=samples,
        seed=seed,
    )
    body = render(rep, fmt)
    if out_path == "-":
        click.echo(body.decode("utf-8"), nl=False)
    else:
        Path(out_path).write_bytes(body)
        click.echo(f"wrote {out_path}")


def main():
    cli()


if __name__ == "__main__":
    main()
