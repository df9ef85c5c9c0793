"""Desugaring of flow actions into bounded temporal loops.

Every `do { v' = r || ... } until (expr)` becomes

    signal <stop>;
    abort (<stop>)
      loop {
        v = v + r*wcrt;            (one assignment per rate, source order)
        if (!TTL([v' = r, ...], expr, {v, ...})) emit <stop>;
        pause
      }

with `<stop>` a fresh signal that cannot collide with any name in the
program. The rate-times-step products are folded to rational constants at
rewrite time. The special invariant `true` needs no look-ahead and no stop
signal: it becomes the non-terminating `loop { assignments; pause }`,
preemptable only from outside.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import CompileError
from .syntax.checks import fold_constant, reject_nonlinear_combine
from .syntax.nodes import (
    Abort,
    Binary,
    BoolLit,
    ContAssign,
    ContDecl,
    DoUntil,
    Emit,
    Expr,
    If,
    Label,
    Loop,
    NameRef,
    Nothing,
    NumLit,
    ParamDecl,
    Parallel,
    Pause,
    Program,
    Seq,
    SignalDecl,
    Stmt,
    Suspend,
    TtlCall,
    Unary,
    sub_exprs,
    walk_exprs,
    walk_stmt,
)

STOP_PREFIX = "__stop"


@dataclass(frozen=True)
class RewriteConfig:
    """Time units per logical tick: the controller's worst-case reaction
    time, fixed for the whole program."""

    wcrt: Fraction

    def __post_init__(self):
        if self.wcrt <= 0:
            raise CompileError("wcrt must be strictly positive")


@dataclass(frozen=True)
class FlowSite:
    """One flow action: its rates, invariant, variables and the combine
    operator of every multi-rate variable."""

    odes: tuple  # ((name, Fraction), ...) in source order
    invariant: Expr
    vars: tuple  # unique names, first-occurrence order
    combine: dict  # name -> 'plus' | 'times' for declared operators

    @property
    def free_running(self) -> bool:
        return isinstance(self.invariant, BoolLit) and self.invariant.value


def flow_site(stmt: DoUntil, env: dict) -> FlowSite:
    """Fold one do-until statement into a FlowSite. env maps names to
    declarations (for combine operators); rates must be parameter-free."""
    odes = tuple((name, fold_constant(rate)) for name, rate in stmt.odes)
    seen: list = []
    for name, _ in odes:
        if name not in seen:
            seen.append(name)
    combine = {}
    for name in seen:
        decl = env.get(name)
        if isinstance(decl, ContDecl) and decl.combine is not None:
            combine[name] = decl.combine
    return FlowSite(odes, stmt.invariant, tuple(seen), combine)


def rewrite_flows(program: Program, cfg: RewriteConfig) -> Program:
    """Replace every flow action with its bounded-loop form.

    The program must already have its named constants bound; rewriting a
    program with no flow actions returns it unchanged (so the pass is
    idempotent).
    """
    reject_nonlinear_combine(program)
    gensym = _StopNames(program)
    root = _rewrite(program.root, cfg, gensym)
    return Program(root)


class _StopNames:
    def __init__(self, program: Program):
        taken = set(program.declared_names())
        for node in program.walk():
            for _, expr in walk_exprs(node):
                for sub in sub_exprs(expr):
                    if isinstance(sub, NameRef):
                        taken.add(sub.name)
        self.taken = taken
        self.counter = 0

    def fresh(self) -> str:
        while True:
            self.counter += 1
            name = f"{STOP_PREFIX}{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _rewrite(stmt: Stmt, cfg: RewriteConfig, gensym: _StopNames) -> Stmt:
    if isinstance(stmt, DoUntil):
        return _rewrite_site(stmt, cfg, gensym)
    if isinstance(stmt, (Abort, Suspend, Loop, Label)):
        return replace(stmt, body=_rewrite(stmt.body, cfg, gensym))
    if isinstance(stmt, If):
        return replace(
            stmt,
            then=_rewrite(stmt.then, cfg, gensym),
            orelse=_rewrite(stmt.orelse, cfg, gensym),
        )
    if isinstance(stmt, (SignalDecl, ContDecl, ParamDecl)):
        return replace(stmt, body=_rewrite(stmt.body, cfg, gensym))
    if isinstance(stmt, Seq):
        return replace(stmt, stmts=tuple(_rewrite(s, cfg, gensym) for s in stmt.stmts))
    if isinstance(stmt, Parallel):
        return replace(
            stmt, branches=tuple(_rewrite(b, cfg, gensym) for b in stmt.branches)
        )
    return stmt


def _rewrite_site(stmt: DoUntil, cfg: RewriteConfig, gensym: _StopNames) -> Stmt:
    odes = tuple((name, fold_constant(rate)) for name, rate in stmt.odes)
    assigns = [
        ContAssign(name, Binary("+", NameRef(name), NumLit(rate * cfg.wcrt)))
        for name, rate in odes
    ]
    if isinstance(stmt.invariant, BoolLit) and stmt.invariant.value:
        return Loop(_seq(assigns + [Pause()]))
    vars_ordered: list = []
    for name, _ in odes:
        if name not in vars_ordered:
            vars_ordered.append(name)
    stop = gensym.fresh()
    ttl = TtlCall(
        tuple((name, NumLit(rate)) for name, rate in odes),
        stmt.invariant,
        tuple(vars_ordered),
    )
    body = Loop(
        _seq(
            assigns
            + [If(Unary("!", ttl), Emit(stop), Nothing()), Pause()]
        )
    )
    return SignalDecl(None, None, stop, None, None, Abort(False, NameRef(stop), body))


def _seq(stmts: list) -> Stmt:
    return stmts[0] if len(stmts) == 1 else Seq(tuple(stmts))


def stop_signals(program: Program) -> list:
    """Names of the generated stop signals, in declaration order."""
    return [
        node.name
        for node in walk_stmt(program.root)
        if isinstance(node, SignalDecl) and node.name.startswith(STOP_PREFIX)
    ]
