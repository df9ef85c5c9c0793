"""Bounded explicit-state reachability over the deterministic kernel.

Programs are deterministic once their inputs are fixed, so the search tree
branches only on the per-tick input choice. States are memoized by a
fingerprint of the settled machine state; breadth-first order makes the
first witness a shortest one (depth-first mode trades that guarantee for a
smaller frontier). Verdicts are always relative to the tick bound.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import KernelError, ScheduleError, SearchLimitError
from .kernel import (
    InputAssignment,
    TickState,
    _UNSTARTED,
    AbortRes,
    DeclRes,
    FlowRes,
    IfRes,
    LabelRes,
    LoopRes,
    ParRes,
    PauseRes,
    SeqRes,
    SignalInstance,
    SuspendRes,
    init,
)
from .rational import format_rational
from .rewrite import RewriteConfig
from .syntax.nodes import Program


# --- input alphabets -----------------------------------------------------------


@dataclass(frozen=True)
class InputAlphabet:
    """Finite per-signal choices: every declared input may be absent or
    present; valued inputs carry one of finitely many values when present."""

    statuses: tuple  # ((name, ("absent","present")), ...) sorted by name
    values: tuple  # ((name, (Fraction, ...)), ...) sorted by name

    @staticmethod
    def closed() -> "InputAlphabet":
        return InputAlphabet((), ())

    @staticmethod
    def make(statuses=None, values=None) -> "InputAlphabet":
        st = tuple(sorted((n, tuple(c)) for n, c in (statuses or {}).items()))
        vl = tuple(sorted((n, tuple(v)) for n, v in (values or {}).items()))
        return InputAlphabet(st, vl)

    def choices(self) -> list:
        """Every admissible InputAssignment for one tick, in a canonical
        order (all-absent first)."""
        options: list = [InputAssignment.make()]
        value_map = dict(self.values)
        for name, statuses in self.statuses:
            extended = []
            for base in options:
                for status in statuses:
                    if status == "absent":
                        extended.append(base)
                    else:
                        vals = value_map.get(name)
                        if vals is None:
                            extended.append(
                                InputAssignment.make(
                                    present=set(base.present) | {name},
                                    values=base.value_map(),
                                )
                            )
                        else:
                            for v in vals:
                                vm = base.value_map()
                                vm[name] = v
                                extended.append(
                                    InputAssignment.make(
                                        present=set(base.present) | {name}, values=vm
                                    )
                                )
            options = extended
        return options


def alphabet_for(program: Program, values_per_input: Optional[dict] = None) -> InputAlphabet:
    """Default alphabet: every declared input free to be present or absent;
    valued inputs need a finite value list."""
    statuses = {}
    values = {}
    for decl in program.inputs():
        statuses[decl.name] = ("absent", "present")
        if not decl.pure:
            supplied = (values_per_input or {}).get(decl.name)
            if not supplied:
                raise ScheduleError(
                    f"valued input {decl.name!r} needs a finite value set"
                )
            values[decl.name] = tuple(supplied)
    return InputAlphabet.make(statuses, values)


# --- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """An input schedule prefix that makes the target signal settle present
    at `tick`, plus the settled snapshot at that tick."""

    schedule: tuple  # InputAssignment per tick, 1-based
    tick: int
    snapshot: tuple  # sorted ((name, printed value), ...)


@dataclass(frozen=True)
class Unreachable:
    bound: int
    states_explored: int


# --- fingerprinting -------------------------------------------------------------


def fingerprint(state: TickState) -> str:
    """Digest of the settled state: control residue shape plus every live
    instance's settled status and value. Equal for structurally equal
    settled states regardless of how they were reached."""
    h = hashlib.sha256()
    h.update(b"T" if state.terminated else b"L")
    _hash_res(None if state.residue is _UNSTARTED else state.residue, state, h)
    return h.hexdigest()


def _hash_res(res, state: TickState, h) -> None:
    if res is None:
        h.update(b".")
        return
    h.update(type(res).__name__.encode())
    h.update(str(_node_index(state, res.node)).encode())
    if isinstance(res, SeqRes):
        h.update(str(res.index).encode())
        _hash_res(res.child, state, h)
    elif isinstance(res, IfRes):
        h.update(str(res.branch).encode())
        _hash_res(res.child, state, h)
    elif isinstance(res, (LoopRes, AbortRes, LabelRes)):
        _hash_res(res.child, state, h)
    elif isinstance(res, SuspendRes):
        _hash_res(res.child, state, h)
    elif isinstance(res, ParRes):
        for child in res.children:
            _hash_res(child, state, h)
    elif isinstance(res, DeclRes):
        inst = res.instance
        if isinstance(inst, SignalInstance):
            h.update(b"S1" if inst.status_prev else b"S0")
            if inst.value_prev is not None:
                h.update(_value_bytes(inst.value_prev))
        else:
            h.update(_value_bytes(inst.value_prev))
        _hash_res(res.child, state, h)
    elif isinstance(res, FlowRes):
        h.update(b"F1" if res.stop else b"F0")
    elif isinstance(res, PauseRes):
        pass
    else:
        raise AssertionError(f"unhandled residue {res!r}")


def _value_bytes(value) -> bytes:
    if isinstance(value, bool):
        return b"#t" if value else b"#f"
    return format_rational(Fraction(value)).encode()


def _node_index(state: TickState, node) -> int:
    index = getattr(state, "_node_ids", None)
    if index is None:
        index = {}
        counter = 0
        for stmt in state.program.walk():
            index[id(stmt)] = counter
            counter += 1
        state._node_ids = index
    return index[id(node)]


# --- the search -----------------------------------------------------------------


def check_reachable(
    program: Program,
    cfg: RewriteConfig,
    alphabet: Optional[InputAlphabet],
    bound: int,
    target: str,
    strategy: str = "bfs",
    node_limit: int = 200_000,
    native_flows: bool = False,
):
    """Can any admissible input schedule make `target` settle present
    within `bound` ticks? Returns a Witness or an Unreachable verdict.

    With an empty alphabet the program is closed and the search degenerates
    to a single run. Raises SearchLimitError past `node_limit` states.
    """
    if target not in _declared_signals(program):
        raise KernelError(f"target signal {target!r} is not declared")
    if alphabet is None:
        alphabet = InputAlphabet.closed()
    choices = alphabet.choices()
    start = init(program, cfg, native_flows=native_flows)
    visited = {fingerprint(start)}
    frontier = deque([(start, ())])
    explored = 0
    while frontier:
        if strategy == "bfs":
            state, prefix = frontier.popleft()
        else:
            state, prefix = frontier.pop()
        if state.terminated or state.tick >= bound:
            continue
        for assignment in choices:
            explored += 1
            if explored > node_limit:
                raise SearchLimitError(
                    f"reachability search exceeded {node_limit} states"
                )
            successor = state.clone()
            record = successor.advance(assignment)
            schedule = prefix + (assignment,)
            if record.statuses.get(target, False):
                return Witness(
                    schedule=schedule,
                    tick=record.tick,
                    snapshot=_snapshot_rows(record),
                )
            key = fingerprint(successor)
            if key in visited:
                continue
            visited.add(key)
            frontier.append((successor, schedule))
    return Unreachable(bound=bound, states_explored=explored)


def _declared_signals(program: Program) -> set:
    from .syntax.nodes import SignalDecl

    return {d.name for d in program.declarations() if isinstance(d, SignalDecl)}


def _snapshot_rows(record) -> tuple:
    rows = []
    for name, status in record.statuses.items():
        rows.append((name, "status", "true" if status else "false"))
    for name, value in record.values.items():
        rows.append((name, "value", _print_value(value)))
    for name, value in record.conts.items():
        rows.append((name, "cont", format_rational(value)))
    return tuple(sorted(rows))


def _print_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return format_rational(value)


def replay(program: Program, cfg: RewriteConfig, witness: Witness,
           native_flows: bool = False) -> bool:
    """Re-run a witness schedule; True iff the target tick's record is
    reproduced. Soundness check used by the tests and the CLI."""
    state = init(program, cfg, native_flows=native_flows)
    last = None
    for assignment in witness.schedule:
        last = state.advance(assignment)
    return last is not None and _snapshot_rows(last) == witness.snapshot and last.tick == witness.tick
