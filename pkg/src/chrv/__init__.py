"""chrv: a CHR rule engine with a generic tracer, driver and rebuilder.

The pieces line up with the classic tracing pipeline: the engine is the
observed process, the tracer extracts the actual trace (and speaks the
chrv XML format), the driver filters and dispatches events to analyzers,
and the rebuilder reconstructs virtual states to check that nothing was
lost.  An independent fluent-calculus simulator (chrv.ossim) executes
observational-semantics specifications as oracles.
"""

from .driver import Driver, DriverConfig, FilterQuery
from .engine import BudgetExceeded, EngineRun, ExecutionState, run
from .lang import (
    ChrSemanticError,
    ChrSyntaxError,
    Constant,
    Constraint,
    Functional,
    Program,
    Query,
    Rule,
    Variable,
    parse_program,
    parse_query,
    render,
)
from .rebuild import check_faithful, rebuild
from .tracer import ActualTraceEvent, Trace, extract, from_xml, to_xml, trace_run, validate_xml

__version__ = "0.1.0"

__all__ = [
    "ActualTraceEvent",
    "BudgetExceeded",
    "ChrSemanticError",
    "ChrSyntaxError",
    "Constant",
    "Constraint",
    "Driver",
    "DriverConfig",
    "EngineRun",
    "ExecutionState",
    "FilterQuery",
    "Functional",
    "Program",
    "Query",
    "Rule",
    "Trace",
    "Variable",
    "check_faithful",
    "extract",
    "from_xml",
    "parse_program",
    "parse_query",
    "rebuild",
    "render",
    "run",
    "to_xml",
    "trace_run",
    "validate_xml",
]
