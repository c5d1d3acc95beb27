"""Skeletal and effect-annotated type checking.

Two modes share one bidirectional engine:

* ``skeletal`` ignores effect annotations entirely (arrows carry none) and
  accepts all three handler variants, including legacy reinstallable
  handlers, whose reinstall variable gets the skeletal arrow
  ``unit -> promise X``.
* ``effects`` additionally infers the least effect annotation bottom-up:
  signals extend the signal set, interrupts act on the annotation,
  handlers record their body's annotation under their operation, and
  sequencing joins.  Legacy handlers are rejected, since no finite
  annotation types them.

Inference is principal up to the placeholder types introduced by sum
injections: the un-taken side of ``inl``/``inr`` starts as a placeholder
and must be resolved by use or by a type ascription; if one survives to
the result, the term is reported as ambiguous rather than guessed at.
All functions are pure and reentrant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .effects import BOTTOM, Effect, effect, join, leq, op_act
from .errors import AeffError
from .surface import SourceProgram, pretty
from .syntax import (
    App,
    Await,
    Computation,
    Fun,
    Handler,
    HandlerKind,
    Inl,
    Inr,
    Interrupt,
    Let,
    Match,
    Par,
    PInterrupt,
    Process,
    Promise,
    PSignal,
    Return,
    Run,
    Signal,
    Term,
    Unit,
    Value,
    Var,
)
from .types import (
    ArrowT,
    BaseT,
    MetaT,
    PromiseT,
    SumT,
    TypeExpr,
    UnitT,
    contains_meta,
    is_annotated,
    is_skeletal,
    pretty_type,
)

Signature = dict[str, TypeExpr]
Context = Sequence[tuple[str, TypeExpr]]


@dataclass
class Diagnostic:
    """Structured type-checking diagnostic.

    ``where`` is the offending subterm in concrete syntax (terms carry no
    source spans once parsed; parse-time rejections carry line/column in
    their exceptions instead).
    """

    severity: str
    code: str
    message: str
    where: str | None = None
    expected: str | None = None
    actual: str | None = None

    def as_record(self) -> dict:
        return {
            "record": "diagnostic",
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "where": self.where,
            "expected": self.expected,
            "actual": self.actual,
        }


class TypeCheckError(AeffError):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def _err(code: str, message: str, where=None, expected=None, actual=None):
    return TypeCheckError(
        Diagnostic(
            "error",
            code,
            message,
            None if where is None else pretty(where),
            expected,
            actual,
        )
    )


def _check_mode_type(t: TypeExpr, effects: bool, where: Term | None) -> None:
    if effects and not is_annotated(t):
        raise _err(
            "mode",
            "annotated mode requires effect annotations on all arrow types",
            where,
            actual=pretty_type(t),
        )
    if not effects and not is_skeletal(t):
        raise _err(
            "mode",
            "skeletal mode forbids effect annotations on arrow types",
            where,
            actual=pretty_type(t),
        )


class _Infer:
    def __init__(self, sig: Signature, effects: bool):
        self.sig = sig
        self.effects = effects
        self.metas: dict[int, TypeExpr] = {}
        self.counter = 0

    # -- unification ---------------------------------------------------------

    def fresh(self) -> MetaT:
        self.counter += 1
        return MetaT(self.counter)

    def resolve(self, t: TypeExpr) -> TypeExpr:
        while isinstance(t, MetaT):
            bound = self.metas.get(t.ident)
            if bound is None:
                return t
            t = bound
        return t

    def zonk(self, t: TypeExpr) -> TypeExpr:
        t = self.resolve(t)
        if isinstance(t, PromiseT):
            return PromiseT(self.zonk(t.item))
        if isinstance(t, SumT):
            return SumT(self.zonk(t.left), self.zonk(t.right))
        if isinstance(t, ArrowT):
            return ArrowT(self.zonk(t.dom), self.zonk(t.cod), t.eff)
        return t

    def _occurs(self, ident: int, t: TypeExpr) -> bool:
        t = self.resolve(t)
        if isinstance(t, MetaT):
            return t.ident == ident
        if isinstance(t, PromiseT):
            return self._occurs(ident, t.item)
        if isinstance(t, SumT):
            return self._occurs(ident, t.left) or self._occurs(ident, t.right)
        if isinstance(t, ArrowT):
            return self._occurs(ident, t.dom) or self._occurs(ident, t.cod)
        return False

    def unify(self, a: TypeExpr, b: TypeExpr, where: Term | None) -> None:
        a = self.resolve(a)
        b = self.resolve(b)
        if isinstance(a, MetaT) and isinstance(b, MetaT) and a.ident == b.ident:
            return
        if isinstance(a, MetaT):
            if self._occurs(a.ident, b):
                raise _err("mismatch", "cyclic type", where)
            self.metas[a.ident] = b
            return
        if isinstance(b, MetaT):
            self.unify(b, a, where)
            return
        if isinstance(a, BaseT) and isinstance(b, BaseT) and a.name == b.name:
            return
        if isinstance(a, UnitT) and isinstance(b, UnitT):
            return
        if isinstance(a, PromiseT) and isinstance(b, PromiseT):
            self.unify(a.item, b.item, where)
            return
        if isinstance(a, SumT) and isinstance(b, SumT):
            self.unify(a.left, b.left, where)
            self.unify(a.right, b.right, where)
            return
        if isinstance(a, ArrowT) and isinstance(b, ArrowT):
            if a.eff != b.eff:
                raise _err(
                    "mismatch",
                    "function types carry different effect annotations",
                    where,
                    expected=pretty_type(self.zonk(a)),
                    actual=pretty_type(self.zonk(b)),
                )
            self.unify(a.dom, b.dom, where)
            self.unify(a.cod, b.cod, where)
            return
        raise _err(
            "mismatch",
            "type mismatch",
            where,
            expected=pretty_type(self.zonk(a)),
            actual=pretty_type(self.zonk(b)),
        )

    # -- signatures ----------------------------------------------------------

    def payload_type(self, op: str, where: Term | None) -> TypeExpr:
        t = self.sig.get(op)
        if t is None:
            raise _err("undeclared-operation", f"operation {op!r} is not declared", where)
        return t

    # -- values --------------------------------------------------------------

    def value(self, env: tuple[TypeExpr, ...], v: Value) -> TypeExpr:
        if isinstance(v, Var):
            if v.ix >= len(env):
                raise _err("unbound-variable", f"unbound variable #{v.ix}", v)
            return env[v.ix]
        if isinstance(v, Unit):
            return UnitT()
        if isinstance(v, Promise):
            return PromiseT(self.value(env, v.value))
        if isinstance(v, Inl):
            return SumT(self.value(env, v.value), self.fresh())
        if isinstance(v, Inr):
            return SumT(self.fresh(), self.value(env, v.value))
        if isinstance(v, Fun):
            ann = v.ann
            if ann is None:
                if self.effects:
                    raise _err(
                        "mode",
                        "function binders must be annotated in annotated mode",
                        v,
                    )
                ann = self.fresh()
            else:
                _check_mode_type(ann, self.effects, v)
            body_t, body_e = self.comp((ann,) + env, v.body)
            return ArrowT(ann, body_t, body_e)
        raise _err("mismatch", f"not a value: {v!r}")

    # -- computations ----------------------------------------------------------

    def comp(self, env: tuple[TypeExpr, ...], m: Computation) -> tuple[TypeExpr, Effect | None]:
        bot = BOTTOM if self.effects else None
        if isinstance(m, Return):
            return self.value(env, m.value), bot
        if isinstance(m, Let):
            bound_t, bound_e = self.comp(env, m.bound)
            body_t, body_e = self.comp((bound_t,) + env, m.body)
            return body_t, self._join(bound_e, body_e)
        if isinstance(m, App):
            fn_t = self.resolve(self.value(env, m.fn))
            arg_t = self.value(env, m.arg)
            if isinstance(fn_t, MetaT):
                if self.effects:
                    # an unknown arrow would need an unknown effect
                    # annotation; there are no placeholders for those
                    raise _err(
                        "ambiguous-type",
                        "cannot determine the type of the applied value",
                        m,
                    )
                arrow = ArrowT(self.fresh(), self.fresh(), None)
                self.unify(fn_t, arrow, m)
                fn_t = arrow
            if not isinstance(fn_t, ArrowT):
                raise _err(
                    "mismatch",
                    "only functions can be applied",
                    m,
                    expected="a function type",
                    actual=pretty_type(self.zonk(fn_t)),
                )
            self.unify(fn_t.dom, arg_t, m)
            return fn_t.cod, fn_t.eff if self.effects else None
        if isinstance(m, Signal):
            self.unify(self.payload_type(m.op, m), self.value(env, m.payload), m)
            cont_t, cont_e = self.comp(env, m.cont)
            if self.effects:
                cont_e = Effect(cont_e.ops | {m.op}, cont_e.handlers)
            return cont_t, cont_e
        if isinstance(m, Interrupt):
            self.unify(self.payload_type(m.op, m), self.value(env, m.payload), m)
            cont_t, cont_e = self.comp(env, m.cont)
            if self.effects:
                cont_e = op_act(m.op, cont_e)
            return cont_t, cont_e
        if isinstance(m, Handler):
            return self.handler(env, m)
        if isinstance(m, Await):
            item = self.fresh()
            self.unify(PromiseT(item), self.value(env, m.promise), m)
            return self.comp((item,) + env, m.body)
        if isinstance(m, Match):
            left_t = self.fresh()
            right_t = self.fresh()
            self.unify(SumT(left_t, right_t), self.value(env, m.scrutinee), m)
            l_t, l_e = self.comp((left_t,) + env, m.left)
            r_t, r_e = self.comp((right_t,) + env, m.right)
            self.unify(l_t, r_t, m)
            return l_t, self._join(l_e, r_e)
        raise _err("mismatch", f"not a computation: {m!r}")

    def handler(self, env: tuple[TypeExpr, ...], m: Handler) -> tuple[TypeExpr, Effect | None]:
        payload = self.payload_type(m.op, m)
        item = self.fresh()
        if m.kind is HandlerKind.LEGACY:
            if self.effects:
                raise _err(
                    "legacy-reinstall",
                    "legacy reinstallable handlers have no finite effect "
                    "annotation; check them in skeletal mode",
                    m,
                )
            reinstall = ArrowT(UnitT(), PromiseT(item), None)
            body_env = (reinstall, payload) + env
            expected = PromiseT(item)
        elif m.kind is HandlerKind.SUM:
            body_env = (payload,) + env
            expected = SumT(PromiseT(item), UnitT())
        else:
            body_env = (payload,) + env
            expected = PromiseT(item)
        body_t, body_e = self.comp(body_env, m.body)
        self.unify(expected, body_t, m)
        cont_t, cont_e = self.comp((PromiseT(item),) + env, m.cont)
        if self.effects:
            cont_e = join(cont_e, effect((), {m.op: body_e}))
        return cont_t, cont_e

    def _join(self, a: Effect | None, b: Effect | None) -> Effect | None:
        if not self.effects:
            return None
        return join(a, b)

    # -- results ---------------------------------------------------------------

    def finish_type(self, t: TypeExpr, where: Term | None) -> TypeExpr:
        out = self.zonk(t)
        if contains_meta(out):
            raise _err(
                "ambiguous-type",
                "the type is ambiguous (an injection's other side is "
                "undetermined); add a type ascription",
                where,
                actual=pretty_type(out),
            )
        return out


def _env_of(ctx: Context, effects: bool) -> tuple[TypeExpr, ...]:
    env = tuple(t for _, t in reversed(list(ctx)))
    for t in env:
        _check_mode_type(t, effects, None)
    return env


def infer_skeletal(sig: Signature, ctx: Context, t: Term) -> TypeExpr:
    """Infer the unique skeletal type of a value or computation."""
    inf = _Infer(sig, effects=False)
    env = _env_of(ctx, effects=False)
    if isinstance(t, Value):
        out = inf.value(env, t)
    elif isinstance(t, Computation):
        out, _ = inf.comp(env, t)
    else:
        raise _err("mismatch", "expected a value or computation")
    return inf.finish_type(out, t)


def infer_effects(
    sig: Signature, ctx: Context, m: Computation, allow_ambiguous: bool = False
) -> tuple[TypeExpr, Effect]:
    """Infer the principal annotated type and least effect annotation.

    ``allow_ambiguous`` admits result types with unresolved injection
    placeholders; the effect annotation never contains one, so callers
    interested only in it (e.g. the termination measures) stay sound.
    """
    inf = _Infer(sig, effects=True)
    env = _env_of(ctx, effects=True)
    t, e = inf.comp(env, m)
    if allow_ambiguous:
        return inf.zonk(t), e
    return inf.finish_type(t, m), e


def check_effects(
    sig: Signature, ctx: Context, m: Computation, ty: TypeExpr, eff: Effect
) -> bool:
    """Does ``m`` check against the declared type and annotation?

    Structural errors inside ``m`` (unbound variables, genuine
    mismatches) still raise; a well-formed computation that merely does
    not fit the declaration yields ``False``.
    """
    _check_mode_type(ty, True, None)
    inf = _Infer(sig, effects=True)
    env = _env_of(ctx, effects=True)
    t, e = inf.comp(env, m)
    try:
        inf.unify(t, ty, m)
        inf.finish_type(t, m)
    except TypeCheckError:
        return False
    return leq(e, eff)


def erase(t: TypeExpr) -> TypeExpr:
    """Drop all effect annotations, yielding the skeletal type."""
    if isinstance(t, PromiseT):
        return PromiseT(erase(t.item))
    if isinstance(t, SumT):
        return SumT(erase(t.left), erase(t.right))
    if isinstance(t, ArrowT):
        return ArrowT(erase(t.dom), erase(t.cod), None)
    return t


def erase_term(t: Term) -> Term:
    """Erase the binder annotations inside a term so the skeletal checker
    accepts terms written for annotated mode."""
    if isinstance(t, Fun):
        ann = None if t.ann is None else erase(t.ann)
        return Fun(ann, erase_term(t.body), hint=t.hint)
    if isinstance(t, Var) or isinstance(t, Unit):
        return t
    if isinstance(t, Promise):
        return Promise(erase_term(t.value))
    if isinstance(t, Inl):
        return Inl(erase_term(t.value))
    if isinstance(t, Inr):
        return Inr(erase_term(t.value))
    if isinstance(t, Return):
        return Return(erase_term(t.value))
    if isinstance(t, Let):
        return Let(erase_term(t.bound), erase_term(t.body), hint=t.hint)
    if isinstance(t, App):
        return App(erase_term(t.fn), erase_term(t.arg))
    if isinstance(t, Signal):
        return Signal(t.op, erase_term(t.payload), erase_term(t.cont))
    if isinstance(t, Interrupt):
        return Interrupt(t.op, erase_term(t.payload), erase_term(t.cont))
    if isinstance(t, Handler):
        return Handler(
            t.op,
            erase_term(t.body),
            erase_term(t.cont),
            t.kind,
            body_hint=t.body_hint,
            reinstall_hint=t.reinstall_hint,
            cont_hint=t.cont_hint,
        )
    if isinstance(t, Await):
        return Await(erase_term(t.promise), erase_term(t.body), hint=t.hint)
    if isinstance(t, Match):
        return Match(
            erase_term(t.scrutinee),
            erase_term(t.left),
            erase_term(t.right),
            left_hint=t.left_hint,
            right_hint=t.right_hint,
        )
    if isinstance(t, Run):
        return Run(erase_term(t.comp))
    if isinstance(t, Par):
        return Par(erase_term(t.left), erase_term(t.right))
    if isinstance(t, PSignal):
        return PSignal(t.op, erase_term(t.payload), erase_term(t.cont))
    if isinstance(t, PInterrupt):
        return PInterrupt(t.op, erase_term(t.payload), erase_term(t.cont))
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Processes


@dataclass(frozen=True)
class RunT:
    type: TypeExpr
    eff: Effect | None


@dataclass(frozen=True)
class ParT:
    left: "ProcType"
    right: "ProcType"


ProcType = RunT | ParT


@dataclass
class LeafReport:
    path: tuple[str, ...]
    type: TypeExpr
    eff: Effect | None


@dataclass
class ProcessReport:
    leaves: list[LeafReport]
    composite: ProcType


def _map_leaf_effects(pt: ProcType, fn) -> ProcType:
    if isinstance(pt, RunT):
        return RunT(pt.type, None if pt.eff is None else fn(pt.eff))
    return ParT(_map_leaf_effects(pt.left, fn), _map_leaf_effects(pt.right, fn))


def typecheck_process(
    sig: Signature, ctx: Context, p: Process, mode: str = "effects"
) -> ProcessReport:
    """Type every run-leaf and compose the process type.

    The per-leaf reports carry each leaf computation's own inferred type
    and annotation; in the composite type, pending process-level
    interrupts act on the leaf annotations underneath them and
    process-level signals extend their signal sets, mirroring the
    computation-level rules.
    """
    effects = mode == "effects"
    env_ctx = list(ctx)
    leaves: list[LeafReport] = []

    def go(proc: Process, path: tuple[str, ...]) -> ProcType:
        if isinstance(proc, Run):
            inf = _Infer(sig, effects)
            env = _env_of(env_ctx, effects)
            try:
                t, e = inf.comp(env, proc.comp)
                t = inf.finish_type(t, proc.comp)
            except TypeCheckError as exc:
                d = exc.diagnostic
                raise TypeCheckError(
                    Diagnostic(
                        d.severity,
                        d.code,
                        f"leaf at {'/'.join(path) or 'root'}: {d.message}",
                        d.where,
                        d.expected,
                        d.actual,
                    )
                ) from None
            leaves.append(LeafReport(path, t, e))
            return RunT(t, e)
        if isinstance(proc, Par):
            return ParT(go(proc.left, path + ("parL",)), go(proc.right, path + ("parR",)))
        if isinstance(proc, (PSignal, PInterrupt)):
            inf = _Infer(sig, effects)
            env = _env_of(env_ctx, effects)
            inf.unify(inf.payload_type(proc.op, proc), inf.value(env, proc.payload), proc)
            slot = "send" if isinstance(proc, PSignal) else "recv"
            inner = go(proc.cont, path + (slot,))
            if isinstance(proc, PSignal):
                return _map_leaf_effects(
                    inner, lambda e: Effect(e.ops | {proc.op}, e.handlers)
                )
            return _map_leaf_effects(inner, lambda e: op_act(proc.op, e))
        raise _err("mismatch", f"not a process: {proc!r}")

    composite = go(p, ())
    return ProcessReport(leaves, composite)


# ---------------------------------------------------------------------------
# Whole programs


@dataclass
class ProgramReport:
    kind: str  # "computation" | "process"
    type: TypeExpr | None = None
    eff: Effect | None = None
    process: ProcessReport | None = None


def check_program(sp: SourceProgram, mode: str = "effects") -> ProgramReport:
    """Type-check a parsed program in the given mode, honouring its
    trailing ascription (which may resolve injection placeholders)."""
    effects = mode == "effects"
    if isinstance(sp.body, Process):
        return ProgramReport("process", process=typecheck_process(sp.signature, (), sp.body, mode))
    inf = _Infer(sp.signature, effects)
    t, e = inf.comp((), sp.body)
    if sp.ascription is not None:
        _check_mode_type(sp.ascription, effects, None)
        inf.unify(t, sp.ascription, sp.body)
    t = inf.finish_type(t, sp.body)
    return ProgramReport("computation", type=t, eff=e)
