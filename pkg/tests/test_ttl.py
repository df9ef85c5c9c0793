from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from tickflow.errors import KernelError
from tickflow.syntax.parser import parse_raw
from tickflow.ttl import (
    delta_combined,
    delta_single,
    holds_at_delta,
    ttl_combined,
    ttl_single,
)


def _expr(text: str):
    return parse_raw(f"cont Z;\nif ({text}) pause else pause").root.body.cond


def test_lookahead_breaks_small_bound():
    # from 0 at rate 1 with a 2-unit step, two ticks ahead is 4
    odes = (("a", F(1)),)
    assert delta_single(odes, ("a",), {"a": F(0)}, F(2)) == {"a": F(4)}
    assert ttl_single(odes, _expr("a <= 2"), ("a",), {"a": F(0)}, F(2)) is False


def test_zero_rate_never_violates():
    odes = (("a", F(0)),)
    assert ttl_single(odes, _expr("a <= 2"), ("a",), {"a": F(0)}, F(2)) is True


def test_pair_prediction():
    odes = (("a", F(2)), ("b", F(2)))
    vals = {"a": F(4), "b": F(4)}
    assert delta_single(odes, ("a", "b"), vals, F(2)) == {"a": F(12), "b": F(12)}
    inv = _expr("a <= 16 && b <= 10")
    assert ttl_single(odes, inv, ("a", "b"), vals, F(2)) is False
    early = {"a": F(0), "b": F(0)}
    assert delta_single(odes, ("a", "b"), early, F(2)) == {"a": F(8), "b": F(8)}
    assert ttl_single(odes, inv, ("a", "b"), early, F(2)) is True


def test_combined_prediction_folds_twice():
    odes = (("a", F(1)), ("a", F(1)))
    combine = {"a": "plus"}
    delta = delta_combined(odes, ("a",), combine, {"a": F(0)}, F(2))
    assert delta == {"a": F(12)}
    assert ttl_combined(odes, _expr("a <= 4"), ("a",), combine, {"a": F(0)}, F(2)) is False
    assert ttl_combined(odes, _expr("a <= 100"), ("a",), combine, {"a": F(0)}, F(2)) is True


def test_combined_final_reduce_compatibility_flag():
    # the literal trailing fold doubles the prediction; off by default
    odes = (("a", F(1)), ("a", F(1)))
    delta = delta_combined(odes, ("a",), {"a": "plus"}, {"a": F(0)}, F(2), final_reduce=True)
    assert delta == {"a": F(24)}


def test_combined_missing_operator():
    odes = (("a", F(1)), ("a", F(1)))
    with pytest.raises(KernelError):
        delta_combined(odes, ("a",), {}, {"a": F(0)}, F(2))


def test_single_writer_degeneration_randomized():
    rng = random.Random(20240917)
    for _ in range(100):
        rate = F(rng.randint(-50, 50), rng.randint(1, 9))
        value = F(rng.randint(-100, 100), rng.randint(1, 7))
        wcrt = rng.choice([F(1), F(1, 2), F(2), F(3)])
        odes = (("a", rate),)
        one = delta_single(odes, ("a",), {"a": value}, wcrt)["a"]
        two = delta_combined(odes, ("a",), {}, {"a": value}, wcrt)["a"]
        assert one == two == value + 2 * rate * wcrt


def test_holds_at_delta_values():
    assert holds_at_delta(_expr("a <= 2"), {"a": F(4)}) is False
    assert holds_at_delta(_expr("true"), {}) is True
    assert holds_at_delta(_expr("a <= 16 && b <= 10"), {"a": F(8), "b": F(8)}) is True


def test_holds_at_delta_unbound_name():
    with pytest.raises(KernelError):
        holds_at_delta(_expr("a <= q"), {"a": F(1)})


def test_holds_at_delta_signal_lookup():
    seen = []

    def lookup(name, kind):
        seen.append((name, kind))
        return True

    assert holds_at_delta(_expr("a <= 2 && OK"), {"a": F(0)}, lookup) is True
    assert seen == [("OK", "status")]
