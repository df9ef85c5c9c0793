"""Shared generators for the randomized suites."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction as F

from tickflow.kernel import InputAssignment
from tickflow.rational import format_rational

WCRT_CHOICES = (F(1), F(1, 2), F(2), F(3))


@dataclass
class FlowCase:
    rate: F
    start: F
    wcrt: F
    op: str  # <=, <, >=, >
    bound: F
    holds_at_start: bool
    one_step_safe: bool  # invariant also holds one step from the start

    @property
    def source(self) -> str:
        return (
            f"cont a = {format_rational(self.start)};\n"
            f"do {{a' = {format_rational(self.rate)}}} "
            f"until (a {self.op} {format_rational(self.bound)})\n"
        )

    def holds(self, value: F) -> bool:
        if self.op == "<=":
            return value <= self.bound
        if self.op == "<":
            return value < self.bound
        if self.op == ">=":
            return value >= self.bound
        return value > self.bound


def random_rational(rng: random.Random, lo: int, hi: int, den: int = 6) -> F:
    return F(rng.randint(lo * den, hi * den), den) + F(rng.randint(0, den - 1), den * 7)


def random_flow(rng: random.Random, degenerate_start: bool = False) -> FlowCase:
    den = rng.choice((1, 2, 3, 4))
    rate = F(rng.randint(-5 * den, 5 * den), den)  # rate within [-5, 5]
    if rate == 0:
        rate = F(1)
    start = random_rational(rng, -10, 10)
    wcrt = rng.choice(WCRT_CHOICES)
    op = rng.choice(("<=", "<", ">=", ">"))
    upper = op in ("<=", "<")
    step = rate * wcrt
    if degenerate_start:
        # invariant already violated (or broken within one step) at entry
        slack = random_rational(rng, 0, 3)
        bound = start - slack if upper else start + slack
        case = FlowCase(rate, start, wcrt, op, bound, False, False)
        if case.holds(start):  # slack of zero with a non-strict operator
            bound = bound - F(1) if upper else bound + F(1)
            case = FlowCase(rate, start, wcrt, op, bound, False, False)
        return case
    # leave room for at least the first mandatory step
    room = abs(step) * rng.randint(1, 6) + random_rational(rng, 1, 3)
    bound = start + room if upper else start - room
    case = FlowCase(rate, start, wcrt, op, bound, True, True)
    assert case.holds(start) and case.holds(start + step)
    return case


# --- random programs with flows, for the rewrite-equivalence suite -------------


def random_program(rng: random.Random) -> tuple:
    """(source, schedule) pairs mixing flows with preemption, resets,
    parallel composition and an external input."""
    shape = rng.randrange(5)
    wcrt = rng.choice(WCRT_CHOICES)
    r1 = format_rational(F(rng.randint(1, 8), rng.choice((1, 2))))
    r2 = format_rational(F(rng.randint(-8, -1), rng.choice((1, 2))))
    b1 = format_rational(F(rng.randint(4, 30)))
    b2 = format_rational(F(rng.randint(-30, -4)))
    schedule = {}
    if shape == 0:
        source = f"cont a = 0;\ndo {{a' = {r1}}} until (a <= {b1})"
    elif shape == 1:
        source = (
            "cont a = 0, b = 0;\n"
            f"do {{a' = {r1} || b' = {r2}}} until (a <= {b1} && b >= {b2})"
        )
    elif shape == 2:
        source = (
            "cont a = 0, b = 1;\n"
            f"{{ do {{a' = {r1}}} until (a <= {b1}) || do {{b' = {r2}}} until (b >= {b2}) }};\n"
            f"do {{a' = {r2}}} until (a >= {b2})"
        )
    elif shape == 3:
        source = (
            "input signal STOP;\ncont a = 0;\n"
            f"abort (STOP) do {{a' = {r1}}} until (true)"
        )
        schedule = {rng.randint(1, 6): InputAssignment.make(present=["STOP"])}
    else:
        source = (
            "input signal FAULT;\ncont a op+ = 1;\n"
            "loop {\n"
            f"  abort (FAULT) {{ do {{a' = {r1}}} until (a <= {b1}) }};\n"
            "  a = 1"
            + (";\n  pause\n}" if rng.random() < 0.5 else "\n}")
        )
        if rng.random() < 0.7:
            schedule = {rng.randint(1, 4): InputAssignment.make(present=["FAULT"])}
    return source, wcrt, schedule
