"""Formula AST for the temporal-logic monitor.

Predicates are normalized to an affine function h over signal values with
the convention: the predicate is True iff h >= 0. ``e1 > e2`` and
``e1 >= e2`` both normalize to h = e1 - e2; ``<`` and ``<=`` to
h = e2 - e1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Mapping, Optional

Interval = Optional[tuple[float, float]]  # None = untimed ([0, end of trace])


def _check_interval(interval: Interval) -> None:
    if interval is None:
        return
    a, b = interval
    if not (0 <= a < b):
        raise ValueError(f"interval must satisfy 0 <= a < b, got [{a}, {b}]")


def _num(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class AtomExpr:
    """Affine expression over signal names: sum(coeff * signal) + const."""

    coeffs: Mapping[str, float]
    const: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", {k: float(v) for k, v in sorted(self.coeffs.items()) if v != 0.0}
        )
        object.__setattr__(self, "const", float(self.const))

    def __add__(self, other: "AtomExpr") -> "AtomExpr":
        coeffs = dict(self.coeffs)
        for k, v in other.coeffs.items():
            coeffs[k] = coeffs.get(k, 0.0) + v
        return AtomExpr(coeffs, self.const + other.const)

    def __sub__(self, other: "AtomExpr") -> "AtomExpr":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "AtomExpr":
        return AtomExpr({k: c * v for k, v in self.coeffs.items()}, c * self.const)

    def value(self, sample: Mapping[str, float]) -> float:
        return sum(c * sample[name] for name, c in self.coeffs.items()) + self.const

    @property
    def signal_names(self) -> frozenset[str]:
        return frozenset(self.coeffs)

    def to_source(self) -> str:
        parts = []
        for name, c in self.coeffs.items():
            term = name if c == 1.0 else f"{_num(c)}*{name}"
            parts.append(term)
        if self.const != 0.0 or not parts:
            parts.append(_num(self.const))
        out = parts[0]
        for p in parts[1:]:
            if p.startswith("-"):
                out += f" - {p[1:]}"
            else:
                out += f" + {p}"
        return out


class Formula:
    """Base class for AST nodes."""

    def signal_names(self) -> frozenset[str]:
        raise NotImplementedError

    def to_source(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_source()


@dataclass(frozen=True)
class Predicate(Formula):
    expr: AtomExpr  # True iff expr value >= 0

    def signal_names(self):
        return self.expr.signal_names

    def to_source(self):
        return f"{self.expr.to_source()} >= 0"


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def signal_names(self):
        return self.child.signal_names()

    def to_source(self):
        return f"not ({self.child.to_source()})"


@dataclass(frozen=True)
class _Binary(Formula):
    left: Formula
    right: Formula
    op: ClassVar[str] = ""

    def signal_names(self):
        return self.left.signal_names() | self.right.signal_names()

    def to_source(self):
        return f"({self.left.to_source()}) {self.op} ({self.right.to_source()})"


@dataclass(frozen=True)
class And(_Binary):
    op = "and"


@dataclass(frozen=True)
class Or(_Binary):
    op = "or"


@dataclass(frozen=True)
class Implies(_Binary):
    op = "->"


@dataclass(frozen=True)
class Iff(_Binary):
    op = "<->"


def _interval_source(interval: Interval) -> str:
    if interval is None:
        return ""
    a, b = interval
    return f"[{_num(a)},{_num(b)}]"


@dataclass(frozen=True)
class Always(Formula):
    child: Formula
    interval: Interval = None

    def __post_init__(self):
        _check_interval(self.interval)

    def signal_names(self):
        return self.child.signal_names()

    def to_source(self):
        return f"always{_interval_source(self.interval)} ({self.child.to_source()})"


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula
    interval: Interval = None

    def __post_init__(self):
        _check_interval(self.interval)

    def signal_names(self):
        return self.child.signal_names()

    def to_source(self):
        return f"eventually{_interval_source(self.interval)} ({self.child.to_source()})"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    interval: Interval = None

    def __post_init__(self):
        _check_interval(self.interval)

    def signal_names(self):
        return self.left.signal_names() | self.right.signal_names()

    def to_source(self):
        return (
            f"({self.left.to_source()}) until{_interval_source(self.interval)}"
            f" ({self.right.to_source()})"
        )
