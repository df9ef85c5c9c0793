"""Bounded reachability on the closed-loop conveyor.

Three parameterizations of the same program: a detector the clock never
samples (fault witnessed), a diverter that finishes too late (fault at
tick 7), and a unit placement with a unit tick (no fault within the
bound).
"""

from fractions import Fraction
from pathlib import Path

from tickflow import (
    RewriteConfig,
    Unreachable,
    Witness,
    bind_params,
    check_reachable,
    parse,
    rewrite_flows,
    run,
)

CAROUSEL = Path(__file__).parent.parent / "corpus" / "programs" / "carousel.hsj"


def build(alpha: int, wcrt: int):
    program = parse(CAROUSEL.read_text())
    bound = bind_params(program, {
        "alpha": Fraction(alpha), "beta": Fraction(10),
        "theta": Fraction(6), "TAG": Fraction(1),
    })
    cfg = RewriteConfig(Fraction(wcrt))
    return rewrite_flows(bound, cfg), cfg


def main() -> None:
    for alpha, wcrt, bound in [(3, 2, 12), (2, 2, 12), (1, 1, 30)]:
        program, cfg = build(alpha, wcrt)
        verdict = check_reachable(program, cfg, None, bound=bound, target="ERROR")
        print(f"alpha={alpha} wcrt={wcrt}: ", end="")
        if isinstance(verdict, Witness):
            print(f"ERROR reachable, settles at tick {verdict.tick}")
        else:
            assert isinstance(verdict, Unreachable)
            print(f"ERROR unreachable within {verdict.bound} ticks")

    # the correct configuration still delivers: DONE fires
    program, cfg = build(1, 1)
    trace = run(program, cfg, max_ticks=30)
    print(f"alpha=1 wcrt=1 delivers at ticks {trace.emission_ticks('DONE')}")


if __name__ == "__main__":
    main()
