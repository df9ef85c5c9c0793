"""Quantify the gap between the idealized automaton and the clocked run.

The automaton switches modes instantly, so the item is diverted at
position 9. A controller with a 2-unit reaction time sees the item late
and commands the diverter late: the delayed switch log shows the item at
11, past the end of the belt.
"""

from fractions import Fraction
from pathlib import Path

from tickflow import RewriteConfig, bind_params, compare, parse, parse_automaton

ROOT = Path(__file__).parent.parent / "corpus"


def main() -> None:
    params = {"alpha": 3, "theta": 6, "beta": 10}
    automaton = parse_automaton((ROOT / "automata" / "carousel.ha").read_text(), params)
    program = bind_params(
        parse((ROOT / "programs" / "carousel.hsj").read_text()),
        {"alpha": Fraction(3), "beta": Fraction(10), "theta": Fraction(6), "TAG": Fraction(1)},
    )
    report = compare(automaton, program, RewriteConfig(Fraction(2)), Fraction(12),
                     {"x": "x", "y": "y"})
    print(report.to_text())


if __name__ == "__main__":
    main()
