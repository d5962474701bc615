from .ast import (
    Formula,
    AtomExpr,
    Predicate,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Always,
    Eventually,
    Until,
)
from .parser import parse_formula, ParseError
from .monitor import (
    eval_robustness,
    eval_boolean,
    MonitorError,
    UnknownSignalError,
    InsufficientTraceError,
)

__all__ = [
    "Formula",
    "AtomExpr",
    "Predicate",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "Always",
    "Eventually",
    "Until",
    "parse_formula",
    "ParseError",
    "eval_robustness",
    "eval_boolean",
    "MonitorError",
    "UnknownSignalError",
    "InsufficientTraceError",
]
