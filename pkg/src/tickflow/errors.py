"""Exception hierarchy shared by every stage of the toolchain.

Compile-time problems (lexing, parsing, resolution, typing, structural
checks) derive from CompileError and carry a source position when one is
known. Runtime problems raised while a program executes derive from
KernelError and carry the tick index at which they occurred.
"""

from __future__ import annotations


class TickflowError(Exception):
    """Base class for every error raised by this package."""


class CompileError(TickflowError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(self.render())

    def render(self) -> str:
        if self.line is not None:
            return f"{self.line}:{self.col}: {self.message}"
        return self.message


class LexError(CompileError):
    pass


class ParseError(CompileError):
    pass


class ResolveError(CompileError):
    """A name does not resolve to any declaration in lexical scope."""


class TypeError_(CompileError):
    """An expression or statement is ill-typed."""


class InstantaneousLoopError(CompileError):
    """A loop body has a static path that consumes no tick."""


class NonConstantRateError(CompileError):
    """A rate expression does not fold to a rational constant."""


class CombineError(CompileError):
    """A multi-writer continuous variable has a missing or non-linear
    combine operator."""


class ParamError(CompileError):
    """A named constant is unbound, bound twice, or not declared."""


class KernelError(TickflowError):
    def __init__(self, message: str, tick: int | None = None):
        self.message = message
        self.tick = tick
        if tick is not None:
            super().__init__(f"tick {tick}: {message}")
        else:
            super().__init__(message)


class ScheduleError(TickflowError):
    """An input-schedule file is malformed or inconsistent with the
    program's declared inputs."""


class MatrixError(TickflowError):
    """A matrix file is malformed or dimensions are incompatible."""


class AutomatonError(TickflowError):
    """A hybrid-automaton description is malformed."""


class DeadlockError(TickflowError):
    """The automaton's location invariant expired with no enabled edge."""

    def __init__(self, message: str, time):
        self.time = time
        super().__init__(message)


class NondeterminismError(TickflowError):
    """Two edges enable at the same instant and no priority orders them."""


class SearchLimitError(TickflowError):
    """The reachability search hit its configured node limit."""
