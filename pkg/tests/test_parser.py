from __future__ import annotations

from fractions import Fraction

import pytest

from tickflow.errors import (
    CombineError,
    InstantaneousLoopError,
    LexError,
    ParseError,
    ResolveError,
    TypeError_,
)
from tickflow.syntax import parse, reject_nonlinear_combine
from tickflow.syntax.nodes import (
    Binary,
    ContDecl,
    DoUntil,
    Label,
    Loop,
    NameRef,
    Nothing,
    NumLit,
    Parallel,
    Seq,
    SignalDecl,
)

from conftest import corpus_sources


def test_single_flow_shape():
    program = parse("cont a = 0;\ndo {a' = 1} until (a <= 2)")
    decl = program.root
    assert isinstance(decl, ContDecl)
    assert decl.name == "a"
    assert decl.init == NumLit(Fraction(0))
    flow = decl.body
    assert isinstance(flow, DoUntil)
    assert flow.odes == (("a", NumLit(Fraction(1))),)
    assert flow.invariant == Binary("<=", NameRef("a"), NumLit(Fraction(2)))


def test_smallest_program():
    program = parse("nothing")
    assert isinstance(program.root, Nothing)
    assert program.declared_names() == set()


def test_instantaneous_loop_rejected():
    with pytest.raises(InstantaneousLoopError):
        parse("signal S;\nloop { emit S }")


def test_loop_with_pause_on_one_branch_only_rejected():
    with pytest.raises(InstantaneousLoopError):
        parse("signal S;\nloop { if (S) pause else emit S }")


def test_loop_through_flow_is_fine():
    parse("cont a;\nloop { do {a' = 1} until (a <= 2) }")


def test_multi_declarator_desugars_to_nested_decls():
    program = parse("cont a = 0, b = 0;\npause")
    outer = program.root
    assert isinstance(outer, ContDecl) and outer.name == "a"
    inner = outer.body
    assert isinstance(inner, ContDecl) and inner.name == "b"


def test_declarations_scope_across_parallel():
    program = parse("signal S;\n{pause} || {emit S; pause}")
    decl = program.root
    assert isinstance(decl, SignalDecl)
    assert isinstance(decl.body, Parallel)


def test_semicolon_binds_tighter_than_parallel():
    program = parse("signal S;\npause || pause; emit S")
    par = program.root.body
    assert isinstance(par, Parallel)
    assert isinstance(par.branches[1], Seq)


def test_label_parses_and_is_transparent():
    program = parse("signal S;\nloop A: pause")
    loop = program.root.body
    assert isinstance(loop, Loop)
    assert isinstance(loop.body, Label)
    assert loop.body.name == "A"


def test_empty_then_branch_sugar():
    program = parse("signal S;\nif (S) else emit S;\npause")
    branch = program.root.body.stmts[0]
    assert isinstance(branch.then, Nothing)


def test_omitted_else_sugar():
    program = parse("signal S;\nif (S) emit S;\npause")
    branch = program.root.body.stmts[0]
    assert isinstance(branch.orelse, Nothing)


def test_guard_or_is_boolean_or():
    program = parse("signal S2; signal S3;\nabort (S2 || S3) pause")
    guard = program.root.body.body.guard
    assert isinstance(guard, Binary) and guard.op == "||"


def test_rational_literals():
    program = parse("cont a = 1/2;\na = 0.25;\na = 3")
    decl = program.root
    assert decl.init == NumLit(Fraction(1, 2))
    assert decl.body.stmts[0].expr == NumLit(Fraction(1, 4))


def test_negative_rate():
    program = parse("cont y;\ndo {y' = -1} until (y >= 0)")
    (ode,) = program.root.body.odes
    assert ode[1] == NumLit(Fraction(-1))


def test_undefined_name():
    with pytest.raises(ResolveError):
        parse("emit S")


def test_duplicate_declaration_in_scope():
    with pytest.raises(ResolveError):
        parse("signal S; signal S;\npause")


def test_shadowing_in_nested_scope_is_fine():
    parse("signal S;\nloop { signal S; emit S; pause }")


def test_type_errors():
    with pytest.raises(TypeError_):
        parse("cont a;\nif (a) pause else pause")  # numeric used as condition
    with pytest.raises(TypeError_):
        parse("signal S;\n?S = 1")  # value write on a pure signal
    with pytest.raises(TypeError_):
        parse("signal S; cont a;\na = S")  # status into a continuous variable


def test_non_constant_rate_rejected():
    from tickflow.errors import NonConstantRateError

    with pytest.raises(NonConstantRateError):
        parse("cont a; cont b;\ndo {a' = b} until (a <= 2)")


def test_lex_error_position():
    with pytest.raises(LexError) as err:
        parse("signal S;\nemit @")
    assert err.value.line == 2


def test_parse_error_expected_found():
    with pytest.raises(ParseError):
        parse("do {a' = 1}")


def test_parse_determinism():
    source = corpus_sources()[0].read_text()
    assert parse(source).root == parse(source).root


# --- simultaneous-writer gate -------------------------------------------------


def test_double_rate_with_plus_accepted():
    program = parse("cont a op+ = 0;\ndo {a' = 1 || a' = 1} until (a <= 4)")
    reject_nonlinear_combine(program)


def test_double_rate_with_times_rejected():
    program = parse("cont a op* = 0;\ndo {a' = 1 || a' = 1} until (a <= 4)")
    with pytest.raises(CombineError):
        reject_nonlinear_combine(program)


def test_double_rate_without_operator_rejected():
    program = parse("cont a = 0;\ndo {a' = 1 || a' = 1} until (a <= 4)")
    with pytest.raises(CombineError):
        reject_nonlinear_combine(program)


def test_single_writer_without_operator_accepted():
    program = parse("cont a = 0;\ndo {a' = 1} until (a <= 2)")
    reject_nonlinear_combine(program)


def test_parallel_assignment_plus_flow_needs_operator():
    source = "cont a = 0;\ndo {a' = 1} until (a <= 4) || {a = 1; pause}"
    program = parse(source)
    with pytest.raises(CombineError):
        reject_nonlinear_combine(program)
    reject_nonlinear_combine(parse(source.replace("cont a =", "cont a op+ =")))


def test_every_corpus_program_parses():
    for path in corpus_sources():
        parse(path.read_text())
