"""Static validation: name resolution, typing, loop and combine checks.

`check_program` runs everything `parse` promises. `reject_nonlinear_combine`
is the separate gate the rewrite pass requires: a continuous variable with
more than one simultaneous write site must be declared with the linear
combine operator `op+`.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import (
    CombineError,
    InstantaneousLoopError,
    NonConstantRateError,
    ResolveError,
    TypeError_,
)
from .nodes import (
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
    ValueRef,
    ValueWrite,
)

# expression types: 'bool' | 'int' | 'ratio'
_NUMERIC = ("int", "ratio")


def check_program(program: Program) -> None:
    """Resolution, typing, loop non-instantaneity, rate constancy,
    duplicate-declaration checks. Raises on the first violation."""
    _check_stmt(program.root, {}, set())
    _check_loops(program.root)


def _value_type(stype: str) -> str:
    return {"ratio": "ratio", "int": "int", "boolean": "bool"}[stype]


def _check_stmt(stmt: Stmt, env: dict, block: set) -> None:
    """env: name -> declaration node; block: names declared in the current
    brace-block (duplicates within one block are rejected, shadowing in a
    nested block is fine)."""
    if isinstance(stmt, (Nothing, Pause)):
        return
    if isinstance(stmt, Emit):
        decl = _resolve(stmt.name, env, stmt.pos)
        if not isinstance(decl, SignalDecl):
            raise TypeError_(f"emit target {stmt.name!r} is not a signal", *_p(stmt))
        return
    if isinstance(stmt, ValueWrite):
        decl = _resolve(stmt.name, env, stmt.pos)
        if not isinstance(decl, SignalDecl) or decl.pure:
            raise TypeError_(
                f"{stmt.name!r} is not a valued signal", *_p(stmt)
            )
        t = _check_expr(stmt.expr, env)
        _require_assignable(t, _value_type(decl.stype), stmt.name, stmt.pos)
        return
    if isinstance(stmt, ContAssign):
        decl = _resolve(stmt.name, env, stmt.pos)
        if not isinstance(decl, ContDecl):
            raise TypeError_(
                f"assignment target {stmt.name!r} is not a continuous variable",
                *_p(stmt),
            )
        t = _check_expr(stmt.expr, env)
        if t not in _NUMERIC:
            raise TypeError_(f"cannot assign a {t} value to {stmt.name!r}", *_p(stmt))
        return
    if isinstance(stmt, (Abort, Suspend)):
        t = _check_expr(stmt.guard, env)
        if t != "bool":
            raise TypeError_("preemption guard must be boolean", *_p(stmt))
        _check_stmt(stmt.body, env, set())
        return
    if isinstance(stmt, If):
        t = _check_expr(stmt.cond, env)
        if t != "bool":
            raise TypeError_("if condition must be boolean", *_p(stmt))
        _check_stmt(stmt.then, env, set())
        _check_stmt(stmt.orelse, env, set())
        return
    if isinstance(stmt, SignalDecl):
        _check_duplicate(stmt.name, block, stmt.pos)
        if stmt.pure:
            if stmt.combine is not None:
                raise TypeError_(
                    f"pure signal {stmt.name!r} cannot carry a combine operator",
                    *_p(stmt),
                )
            if stmt.init is not None:
                raise TypeError_(
                    f"pure signal {stmt.name!r} cannot carry an initial value",
                    *_p(stmt),
                )
        else:
            vt = _value_type(stmt.stype)
            if stmt.combine is not None and vt == "bool":
                raise TypeError_(
                    f"combine operator on boolean signal {stmt.name!r}", *_p(stmt)
                )
            if stmt.init is not None:
                t = _check_expr(stmt.init, env)
                _require_assignable(t, vt, stmt.name, stmt.pos)
        _check_stmt(stmt.body, {**env, stmt.name: stmt}, block | {stmt.name})
        return
    if isinstance(stmt, ContDecl):
        _check_duplicate(stmt.name, block, stmt.pos)
        if stmt.init is not None:
            t = _check_expr(stmt.init, env)
            if t not in _NUMERIC:
                raise TypeError_(
                    f"continuous variable {stmt.name!r} needs a numeric initial value",
                    *_p(stmt),
                )
        _check_stmt(stmt.body, {**env, stmt.name: stmt}, block | {stmt.name})
        return
    if isinstance(stmt, ParamDecl):
        _check_duplicate(stmt.name, block, stmt.pos)
        if stmt.default is not None:
            if not _is_constant(stmt.default, env):
                raise TypeError_(
                    f"default for constant {stmt.name!r} must itself be constant",
                    *_p(stmt),
                )
        _check_stmt(stmt.body, {**env, stmt.name: stmt}, block | {stmt.name})
        return
    if isinstance(stmt, Loop):
        _check_stmt(stmt.body, env, set())
        return
    if isinstance(stmt, Seq):
        for s in stmt.stmts:
            _check_stmt(s, env, block)
        return
    if isinstance(stmt, Parallel):
        for b in stmt.branches:
            _check_stmt(b, env, set())
        return
    if isinstance(stmt, DoUntil):
        for name, rate in stmt.odes:
            decl = _resolve(name, env, stmt.pos)
            if not isinstance(decl, ContDecl):
                raise TypeError_(
                    f"flow target {name!r} is not a continuous variable", *_p(stmt)
                )
            if not _is_constant(rate, env):
                raise NonConstantRateError(
                    f"rate of {name!r} does not fold to a constant", *_p(stmt)
                )
            _check_expr(rate, env)
        t = _check_expr(stmt.invariant, env)
        if t != "bool":
            raise TypeError_("until expression must be boolean", *_p(stmt))
        return
    if isinstance(stmt, Label):
        _check_stmt(stmt.body, env, block)
        return
    raise AssertionError(f"unhandled statement {stmt!r}")


def _check_duplicate(name: str, block: set, pos) -> None:
    if name in block:
        line, col = pos if pos else (None, None)
        raise ResolveError(f"duplicate declaration of {name!r} in this scope", line, col)


def _require_assignable(actual: str, target: str, name: str, pos) -> None:
    # the type discipline separates boolean from numeric; integrality of
    # writes to int signals is enforced when the write settles
    line, col = pos if pos else (None, None)
    if target == "bool":
        if actual != "bool":
            raise TypeError_(f"{name!r} holds a boolean value", line, col)
    else:
        if actual not in _NUMERIC:
            raise TypeError_(f"{name!r} holds a numeric value", line, col)


def _resolve(name: str, env: dict, pos):
    decl = env.get(name)
    if decl is None:
        line, col = pos if pos else (None, None)
        raise ResolveError(f"undefined name {name!r}", line, col)
    return decl


def _check_expr(expr: Expr, env: dict) -> str:
    if isinstance(expr, NumLit):
        return "int" if expr.value.denominator == 1 else "ratio"
    if isinstance(expr, BoolLit):
        return "bool"
    if isinstance(expr, NameRef):
        decl = _resolve(expr.name, env, expr.pos)
        if isinstance(decl, SignalDecl):
            return "bool"  # status reference
        if isinstance(decl, ContDecl):
            return "ratio"
        return "ratio"  # named constant
    if isinstance(expr, ValueRef):
        decl = _resolve(expr.name, env, expr.pos)
        if not isinstance(decl, SignalDecl) or decl.pure:
            line, col = expr.pos if expr.pos else (None, None)
            raise TypeError_(f"{expr.name!r} has no value to read", line, col)
        return _value_type(decl.stype)
    if isinstance(expr, Unary):
        t = _check_expr(expr.operand, env)
        line, col = expr.pos if expr.pos else (None, None)
        if expr.op == "!":
            if t != "bool":
                raise TypeError_("'!' needs a boolean operand", line, col)
            return "bool"
        if t not in _NUMERIC:
            raise TypeError_("negation needs a numeric operand", line, col)
        return t
    if isinstance(expr, Binary):
        lt = _check_expr(expr.left, env)
        rt = _check_expr(expr.right, env)
        line, col = expr.pos if expr.pos else (None, None)
        if expr.op in ("&&", "||"):
            if lt != "bool" or rt != "bool":
                raise TypeError_(f"{expr.op!r} needs boolean operands", line, col)
            return "bool"
        if expr.op in ("==", "!="):
            both_bool = lt == "bool" and rt == "bool"
            both_num = lt in _NUMERIC and rt in _NUMERIC
            if not (both_bool or both_num):
                raise TypeError_(f"{expr.op!r} needs operands of one kind", line, col)
            return "bool"
        if expr.op in ("<", "<=", ">", ">="):
            if lt not in _NUMERIC or rt not in _NUMERIC:
                raise TypeError_(f"{expr.op!r} needs numeric operands", line, col)
            return "bool"
        # + - *
        if lt not in _NUMERIC or rt not in _NUMERIC:
            raise TypeError_(f"{expr.op!r} needs numeric operands", line, col)
        return "int" if lt == rt == "int" else "ratio"
    if isinstance(expr, TtlCall):
        for name, rate in expr.odes:
            decl = _resolve(name, env, expr.pos)
            if not isinstance(decl, ContDecl):
                line, col = expr.pos if expr.pos else (None, None)
                raise TypeError_(f"TTL target {name!r} is not continuous", line, col)
            if not _is_constant(rate, env):
                line, col = expr.pos if expr.pos else (None, None)
                raise NonConstantRateError(
                    f"TTL rate for {name!r} is not constant", line, col
                )
        for name in expr.vars:
            _resolve(name, env, expr.pos)
        t = _check_expr(expr.invariant, env)
        if t != "bool":
            line, col = expr.pos if expr.pos else (None, None)
            raise TypeError_("TTL invariant must be boolean", line, col)
        return "bool"
    raise AssertionError(f"unhandled expression {expr!r}")


def _is_constant(expr: Expr, env: dict) -> bool:
    """Structurally constant: literals, named constants, and arithmetic on
    those. Signal and continuous references disqualify."""
    if isinstance(expr, NumLit):
        return True
    if isinstance(expr, NameRef):
        decl = env.get(expr.name)
        return isinstance(decl, ParamDecl)
    if isinstance(expr, Unary):
        return expr.op == "-" and _is_constant(expr.operand, env)
    if isinstance(expr, Binary):
        return (
            expr.op in ("+", "-", "*")
            and _is_constant(expr.left, env)
            and _is_constant(expr.right, env)
        )
    return False


def fold_constant(expr: Expr) -> Fraction:
    """Fold a parameter-free constant expression to a rational."""
    if isinstance(expr, NumLit):
        return expr.value
    if isinstance(expr, Unary) and expr.op == "-":
        return -fold_constant(expr.operand)
    if isinstance(expr, Binary) and expr.op in ("+", "-", "*"):
        left = fold_constant(expr.left)
        right = fold_constant(expr.right)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        return left * right
    raise NonConstantRateError(f"expression does not fold to a constant: {expr!r}")


# --- loop non-instantaneity --------------------------------------------------


def _check_loops(root: Stmt) -> None:
    from .nodes import walk_stmt

    for node in walk_stmt(root):
        if isinstance(node, Loop) and _may_be_instantaneous(node.body):
            raise InstantaneousLoopError(
                "loop body has a path that consumes no tick", *_p(node)
            )


def _may_be_instantaneous(stmt: Stmt) -> bool:
    if isinstance(stmt, (Nothing, Emit, ValueWrite, ContAssign)):
        return True
    if isinstance(stmt, (Pause, DoUntil, Loop)):
        return False
    if isinstance(stmt, Abort):
        # an immediate abort may terminate on entry if its guard holds
        return True if stmt.immediate else _may_be_instantaneous(stmt.body)
    if isinstance(stmt, Suspend):
        return _may_be_instantaneous(stmt.body)
    if isinstance(stmt, If):
        return _may_be_instantaneous(stmt.then) or _may_be_instantaneous(stmt.orelse)
    if isinstance(stmt, (SignalDecl, ContDecl, ParamDecl)):
        return _may_be_instantaneous(stmt.body)
    if isinstance(stmt, Seq):
        return all(_may_be_instantaneous(s) for s in stmt.stmts)
    if isinstance(stmt, Parallel):
        return all(_may_be_instantaneous(b) for b in stmt.branches)
    if isinstance(stmt, Label):
        return _may_be_instantaneous(stmt.body)
    raise AssertionError(f"unhandled statement {stmt!r}")


# --- write-write legality ----------------------------------------------------


def reject_nonlinear_combine(program: Program) -> None:
    """Reject any continuous variable with more than one simultaneous write
    site unless it is declared with the linear combine operator.

    Simultaneous write sites are: several ODEs for one variable inside one
    do-block, or writes to one variable from distinct branches of one
    parallel composition (do-block or plain assignment).
    """
    multi: dict[int, ContDecl] = {}
    _collect_multi_writers(program.root, {}, multi)
    for decl in multi.values():
        if decl.combine is None:
            raise CombineError(
                f"continuous variable {decl.name!r} has simultaneous writers "
                "but no combine operator",
                *_p(decl),
            )
        if decl.combine != "plus":
            raise CombineError(
                f"continuous variable {decl.name!r} combines simultaneous "
                "writers with a non-linear operator",
                *_p(decl),
            )


def _collect_multi_writers(stmt: Stmt, env: dict, out: dict) -> None:
    if isinstance(stmt, DoUntil):
        seen: dict[int, int] = {}
        for name, _ in stmt.odes:
            decl = env.get(name)
            if isinstance(decl, ContDecl):
                seen[id(decl)] = seen.get(id(decl), 0) + 1
                if seen[id(decl)] > 1:
                    out[id(decl)] = decl
        return
    if isinstance(stmt, Parallel):
        # flag a variable written from several branches only when a flow
        # drives it somewhere; simultaneous plain assignments are legal and
        # resolved (or rejected) when the writes settle
        counts: dict[int, int] = {}
        decls: dict[int, ContDecl] = {}
        flow_driven: set = set()
        for branch in stmt.branches:
            written: dict[int, tuple] = {}
            _written_conts(branch, env, written)
            for key, (decl, via_flow) in written.items():
                counts[key] = counts.get(key, 0) + 1
                decls[key] = decl
                if via_flow:
                    flow_driven.add(key)
        for key, count in counts.items():
            if count > 1 and key in flow_driven:
                out[key] = decls[key]
        for branch in stmt.branches:
            _collect_multi_writers(branch, env, out)
        return
    if isinstance(stmt, (SignalDecl, ContDecl, ParamDecl)):
        _collect_multi_writers(stmt.body, {**env, stmt.name: stmt}, out)
        return
    from .nodes import children

    for child in children(stmt):
        _collect_multi_writers(child, env, out)


def _written_conts(stmt: Stmt, env: dict, out: dict) -> None:
    """Continuous-variable declarations written anywhere inside stmt,
    excluding variables declared inside stmt itself. Values are
    (declaration, written-by-a-flow?)."""
    if isinstance(stmt, ContAssign):
        decl = env.get(stmt.name)
        if isinstance(decl, ContDecl):
            prev = out.get(id(decl), (decl, False))
            out[id(decl)] = (decl, prev[1])
        return
    if isinstance(stmt, DoUntil):
        for name, _ in stmt.odes:
            decl = env.get(name)
            if isinstance(decl, ContDecl):
                out[id(decl)] = (decl, True)
        return
    if isinstance(stmt, (SignalDecl, ContDecl, ParamDecl)):
        _written_conts(stmt.body, {**env, stmt.name: stmt}, out)
        return
    from .nodes import children

    for child in children(stmt):
        _written_conts(child, env, out)


def _p(node) -> tuple:
    return node.pos if node.pos else (None, None)
