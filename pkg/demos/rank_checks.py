"""Exact-rational observability and controllability verdicts.

Rank is computed by fraction-free elimination over Fractions, so a rank
deficit is a fact about the system, not about floating-point noise.
"""

from fractions import Fraction

from tickflow import (
    LtiSystem,
    RationalMatrix,
    controllability_matrix,
    is_controllable,
    is_observable,
    observability_matrix,
    rank,
)


def mat(rows):
    return RationalMatrix.from_rows([[Fraction(v) for v in row] for row in rows])


def main() -> None:
    shift = LtiSystem(a=mat([[1, 1], [0, 1]]), c=mat([[1, 0]]))
    print("shift register, measuring the first state:")
    print(f"  observability rank {rank(observability_matrix(shift))} -> "
          f"{'observable' if is_observable(shift) else 'not observable'}")

    frozen = LtiSystem(a=mat([[1, 0], [0, 1]]), c=mat([[1, 0]]))
    print("identity dynamics, same sensor:")
    print(f"  observability rank {rank(observability_matrix(frozen))} -> "
          f"{'observable' if is_observable(frozen) else 'not observable'}")

    chain = LtiSystem(a=mat([[0, 1], [0, 0]]), b=mat([[0], [1]]))
    print("integrator chain, forcing the last state:")
    print(f"  controllability rank {rank(controllability_matrix(chain))} -> "
          f"{'controllable' if is_controllable(chain) else 'not controllable'}")


if __name__ == "__main__":
    main()
