"""Cautious consequences of ground normal programs and CNF backbones,
computed by replayable solver-graph strategies with machine-checked traces."""

from .logic import (
    CnfFormula,
    Program,
    Rule,
    Theory,
    Vocabulary,
    atoms_of,
    brute_consequences,
    enumerate_models,
    is_answer_set,
    is_classical_model,
    least_model,
    reduct,
    with_constraint,
)
from .parsers import ParseError, parse_dimacs, parse_program, render_dimacs, render_program
from .engine import ResourceLimit
from .generate import gen_instances, random_3cnf, random_program
from .runner import (
    CH,
    FS,
    FS_THEN_CH,
    MIXED,
    OV,
    UN,
    Interrupted,
    RunResult,
    StrategyConfig,
    run,
)
from .trace import (
    TraceEvent,
    ValidationReport,
    deserialize,
    serialize,
    validate_semantics,
    validate_structure,
)

__version__ = "0.1.0"

__all__ = [
    "CnfFormula",
    "Program",
    "Rule",
    "Theory",
    "Vocabulary",
    "atoms_of",
    "brute_consequences",
    "enumerate_models",
    "is_answer_set",
    "is_classical_model",
    "least_model",
    "reduct",
    "with_constraint",
    "ParseError",
    "parse_dimacs",
    "parse_program",
    "render_dimacs",
    "render_program",
    "ResourceLimit",
    "gen_instances",
    "random_3cnf",
    "random_program",
    "OV",
    "UN",
    "CH",
    "MIXED",
    "FS",
    "FS_THEN_CH",
    "Interrupted",
    "RunResult",
    "StrategyConfig",
    "run",
    "TraceEvent",
    "ValidationReport",
    "deserialize",
    "serialize",
    "validate_semantics",
    "validate_structure",
]
