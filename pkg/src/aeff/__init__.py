"""Core calculus for asynchronous algebraic effects: syntax, typing,
small-step semantics, reduction-graph exploration, and termination
measures, with a CLI front end (``aeff``)."""

from .effects import BOTTOM, Effect, effect, join, leq, op_act, paths, size_i
from .errors import (
    AeffError,
    AuditPreconditionError,
    ContinuationArityError,
    IllScopedTermError,
    LexError,
    MeasureUndefinedError,
    ParseError,
    ScopeError,
)
from .explorer import (
    SN,
    BudgetExceeded,
    NonSN,
    ReductionGraph,
    audit_lex_decrease,
    explore,
    max_steps,
    normal_forms,
)
from .measures import (
    Continuation,
    apply_cont,
    cont_interrupts,
    cont_len,
    flat_measures,
    max_sh,
    max_signals,
    proc_measures,
    shape_of,
    step_shape,
)
from .reduce_par import FlatProcess, ProcRuleLabel, step_flat, step_proc
from .reduce_seq import RuleLabel, is_normal, leftmost_step, step_seq
from .surface import SourceProgram, parse, pretty
from .syntax import alpha_eq, rename, subst
from .typecheck import (
    Diagnostic,
    TypeCheckError,
    check_effects,
    check_program,
    erase,
    infer_effects,
    infer_skeletal,
    typecheck_process,
)

__version__ = "0.1.0"

__all__ = [
    "AeffError",
    "AuditPreconditionError",
    "BOTTOM",
    "BudgetExceeded",
    "Continuation",
    "ContinuationArityError",
    "Diagnostic",
    "Effect",
    "FlatProcess",
    "IllScopedTermError",
    "LexError",
    "MeasureUndefinedError",
    "NonSN",
    "ParseError",
    "ProcRuleLabel",
    "ReductionGraph",
    "RuleLabel",
    "SN",
    "ScopeError",
    "SourceProgram",
    "TypeCheckError",
    "alpha_eq",
    "apply_cont",
    "audit_lex_decrease",
    "check_effects",
    "check_program",
    "cont_interrupts",
    "cont_len",
    "effect",
    "erase",
    "explore",
    "flat_measures",
    "infer_effects",
    "infer_skeletal",
    "is_normal",
    "join",
    "leftmost_step",
    "leq",
    "max_sh",
    "max_signals",
    "max_steps",
    "normal_forms",
    "op_act",
    "parse",
    "paths",
    "pretty",
    "proc_measures",
    "rename",
    "shape_of",
    "size_i",
    "step_flat",
    "step_proc",
    "step_seq",
    "step_shape",
    "subst",
    "typecheck_process",
]
