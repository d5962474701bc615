"""Evaluation toolkit for learned robot policies.

Monitors rollout traces against temporal-logic specifications, computes
smoothness and performance metrics, runs blind A/B evaluation sessions
with rubric capture, performs Bayesian success-rate analysis, and
renders evaluation reports.
"""

from .model import (
    InitialCondition,
    MetricConfig,
    PeakConfig,
    RolloutRecord,
    RubricQuestion,
    RubricTable,
    SparcConfig,
    TaskSpec,
    Trace,
    aggregate_rubric,
    validate_task_spec,
)
from .metrics import SpeedProfile, count_velocity_peaks, sparc, speed_profile, split_at_contact
from .stats import (
    BetaPosterior,
    ComparisonResult,
    clopper_pearson,
    compare,
    posterior,
    prob_superior,
    shift_report,
)
from .stl import eval_boolean, eval_robustness, parse_formula
from .store import AssignmentPlan, EventLog, SessionState, create_plan, replay
from .report import EvaluationReport, build_report, render

__version__ = "0.1.0"
