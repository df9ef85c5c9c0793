from __future__ import annotations

from fractions import Fraction as F

import pytest

from tickflow.errors import SearchLimitError
from tickflow.kernel import InputAssignment, init, run
from tickflow.params import bind_params
from tickflow.rewrite import RewriteConfig, rewrite_flows
from tickflow.syntax import parse
from tickflow.verify import (
    InputAlphabet,
    Unreachable,
    Witness,
    alphabet_for,
    check_reachable,
    fingerprint,
    replay,
)

CFG1 = RewriteConfig(F(1))


def _program(source: str, wcrt=F(1), params=None):
    program = parse(source)
    if params:
        program = bind_params(program, params)
    return rewrite_flows(program, RewriteConfig(wcrt))


def test_trivial_emission_witness():
    program = _program("signal ERROR;\nemit ERROR")
    verdict = check_reachable(program, CFG1, None, bound=3, target="ERROR")
    assert isinstance(verdict, Witness)
    assert verdict.tick == 1
    assert verdict.schedule == (InputAssignment.make(),)
    assert replay(program, CFG1, verdict)


def test_closed_system_matches_plain_run():
    source = "signal TICKED;\npause; pause;\nemit TICKED;\npause"
    program = _program(source)
    trace = run(program, CFG1, max_ticks=10)
    verdict = check_reachable(program, CFG1, None, bound=10, target="TICKED")
    assert isinstance(verdict, Witness)
    assert trace.emission_ticks("TICKED") == [verdict.tick]
    missing = check_reachable(program, CFG1, None, bound=2, target="TICKED")
    assert isinstance(missing, Unreachable)


def test_input_driven_search_finds_shortest():
    source = """
    input signal GO; signal FIRED;
    loop { if (GO) emit FIRED; pause }
    """
    program = _program(source)
    verdict = check_reachable(
        program, CFG1, alphabet_for(parse(source)), bound=6, target="FIRED"
    )
    assert isinstance(verdict, Witness)
    # GO at tick 1 is read at tick 2: shortest witness settles FIRED at 2
    assert verdict.tick == 2
    assert verdict.schedule[0].present == frozenset({"GO"})
    assert replay(program, CFG1, verdict)


def test_unreachable_when_inputs_cannot_help():
    source = """
    input signal GO; signal FIRED;
    loop { if (GO) nothing else nothing; pause }
    """
    program = _program(source)
    verdict = check_reachable(
        program, CFG1, alphabet_for(parse(source)), bound=5, target="FIRED"
    )
    assert isinstance(verdict, Unreachable)
    assert verdict.bound == 5


def test_monotonicity_in_the_bound():
    source = "signal LATE;\npause; pause; pause;\nemit LATE;\npause"
    program = _program(source)
    reachable_at = [
        isinstance(check_reachable(program, CFG1, None, bound=b, target="LATE"), Witness)
        for b in range(1, 8)
    ]
    assert reachable_at == [False, False, False, True, True, True, True]


def test_dfs_agrees_on_verdict():
    source = """
    input signal GO; signal FIRED;
    loop { if (GO) emit FIRED; pause }
    """
    program = _program(source)
    alphabet = alphabet_for(parse(source))
    bfs = check_reachable(program, CFG1, alphabet, bound=5, target="FIRED")
    dfs = check_reachable(
        program, CFG1, alphabet, bound=5, target="FIRED", strategy="dfs"
    )
    assert isinstance(bfs, Witness) and isinstance(dfs, Witness)
    assert replay(program, CFG1, dfs)


def test_visited_pruning_collapses_input_explosion():
    # eight input choices per tick but only nine reachable settled states
    # (the start state plus one per last-tick input pattern): the
    # fingerprint set caps the search at 9 * 8 expansions instead of 8^50
    source = """
    input signal A1; input signal A2; input signal A3;
    signal NEVER;
    loop { pause }
    """
    program = _program(source)
    alphabet = alphabet_for(parse(source))
    choices = len(alphabet.choices())
    verdict = check_reachable(
        program, CFG1, alphabet, bound=50, target="NEVER", node_limit=500
    )
    assert isinstance(verdict, Unreachable)
    assert verdict.states_explored == (1 + choices) * choices


def test_node_limit_guard():
    source = """
    input signal A1; input signal A2; input signal A3;
    int signal N = 0;
    signal NEVER;
    loop { ?N = ?N + 1; pause }
    """
    program = _program(source)
    alphabet = alphabet_for(parse(source))
    with pytest.raises(SearchLimitError):
        check_reachable(
            program, CFG1, alphabet, bound=50, target="NEVER", node_limit=100
        )


def test_valued_alphabet_choices():
    alphabet = InputAlphabet.make(
        {"P": ("absent", "present")}, {"P": (F(1), F(2))}
    )
    choices = alphabet.choices()
    assert InputAssignment.make() in choices
    assert InputAssignment.make(present=["P"], values={"P": F(1)}) in choices
    assert InputAssignment.make(present=["P"], values={"P": F(2)}) in choices
    assert len(choices) == 3


# --- fingerprints ---------------------------------------------------------------


def test_fingerprint_equal_for_fresh_states():
    program = _program("signal S;\nloop { emit S; pause }")
    assert fingerprint(init(program, CFG1)) == fingerprint(init(program, CFG1))


def test_fingerprint_differs_on_one_value():
    source = "input int signal LEVEL = 0;\nloop { pause }"
    program = _program(source)
    a = init(program, CFG1)
    b = init(program, CFG1)
    a.advance(InputAssignment.make(present=["LEVEL"], values={"LEVEL": F(1)}))
    b.advance(InputAssignment.make(present=["LEVEL"], values={"LEVEL": F(2)}))
    assert fingerprint(a) != fingerprint(b)


def test_fingerprint_ignores_write_order():
    left = _program("cont a op+ = 0;\n{a = 1; pause} || {a = 2; pause};\npause")
    right = _program("cont a op+ = 0;\n{a = 2; pause} || {a = 1; pause};\npause")
    sl, sr = init(left, CFG1), init(right, CFG1)
    sl.advance()
    sr.advance()
    assert fingerprint(sl) == fingerprint(sr)


def test_fingerprint_tracks_control_position():
    program = _program("signal S;\npause; pause; pause")
    state = init(program, CFG1)
    prints = [fingerprint(state)]
    state.advance()
    prints.append(fingerprint(state))
    state.advance()
    prints.append(fingerprint(state))
    assert len(set(prints)) == 3
