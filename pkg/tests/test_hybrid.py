from __future__ import annotations

from fractions import Fraction as F
from pathlib import Path

import pytest

from tickflow.errors import AutomatonError, DeadlockError, NondeterminismError
from tickflow.hybrid import (
    _with_wcrt_delays,
    compare,
    ha_simulate,
    parse_automaton,
)
from tickflow.params import bind_params
from tickflow.rewrite import RewriteConfig
from tickflow.syntax import parse

CORPUS = Path(__file__).parent.parent / "corpus"

CAROUSEL_PARAMS = {"alpha": 3, "theta": 6, "beta": 10}


def _carousel(params=None):
    text = (CORPUS / "automata" / "carousel.ha").read_text()
    return parse_automaton(text, params or CAROUSEL_PARAMS)


def test_ideal_trajectory_switch_points():
    trace = ha_simulate(_carousel(), F(12))
    steps = [(s.source, s.target, s.time, s.valuation_before["x"]) for s in trace.steps]
    assert steps[0] == ("A", "B", F(3), F(3))
    assert steps[1] == ("B", "D", F(9), F(9))  # diverter done, item at 9 < 10
    assert steps[2] == ("D", "A", F(10), F(10))


def test_single_location_dwell():
    ha = parse_automaton("var x\nlocation L\n  rate x 1\ninit L x = 0\n")
    trace = ha_simulate(ha, F(5))
    assert trace.value_at(F(5), "x") == F(5)
    assert trace.steps == []


def test_delayed_switching_overrun():
    trace = ha_simulate(_with_wcrt_delays(_carousel(), F(2)), F(14), use_delays=True)
    steps = [(s.source, s.target, s.time, s.valuation_before["x"]) for s in trace.steps]
    assert steps[0] == ("A", "B", F(5), F(5))  # reaction time added
    assert steps[1] == ("B", "D", F(11), F(11))  # item already past the belt end
    assert steps[2][0:2] == ("D", "A")
    assert steps[2][2] == F(11)  # bounce back immediately: invariant broken


def test_time_step_soundness_ideal():
    trace = ha_simulate(_carousel(), F(12))
    ha = _carousel()
    for seg in trace.segments:
        loc = ha.locations[seg.location]
        start = seg.valuation_start
        end = {
            v: start[v] + seg.rates.get(v, F(0)) * seg.duration for v in start
        }
        for comparison in loc.invariant:
            assert comparison.holds(start)
            assert comparison.holds(end)


def test_zero_duration_discrete_steps():
    trace = ha_simulate(_carousel(), F(12))
    times = [seg.start for seg in trace.segments]
    assert times == sorted(times)
    for step, seg in zip(trace.steps, trace.segments[1:]):
        assert step.time == seg.start  # switches take no time


def test_urgent_determinism():
    a = ha_simulate(_carousel(), F(12))
    b = ha_simulate(_carousel(), F(12))
    assert a.segments == b.segments and a.steps == b.steps


def test_deadlock_when_invariant_expires():
    ha = parse_automaton(
        "var x\nlocation L\n  rate x 1\n  inv x <= 1\ninit L x = 0\n"
    )
    with pytest.raises(DeadlockError) as err:
        ha_simulate(ha, F(5))
    assert err.value.time == F(1)


def test_simultaneous_edges_need_priorities():
    text = (
        "var x\n"
        "location L\n  rate x 1\nlocation M\n  rate x 0\nlocation N\n  rate x 0\n"
        "init L x = 0\n"
        "edge L -> M when x >= 1 label m\n"
        "edge L -> N when x >= 1 label n\n"
    )
    with pytest.raises(NondeterminismError):
        ha_simulate(parse_automaton(text), F(5))
    trace = ha_simulate(parse_automaton(text + "edge L -> M when x >= 2\n"), F(1, 2))
    assert trace.steps == []
    prioritized = text.replace("label m", "label m priority 1").replace(
        "label n", "label n priority 2"
    )
    trace = ha_simulate(parse_automaton(prioritized), F(5))
    assert trace.steps[0].target == "M"


def test_left_limit_at_switch_instants():
    trace = ha_simulate(_carousel(), F(12))
    # x resets to 0 at t=10; the left limit at the switch instant is 10
    assert trace.value_at(F(10), "x") == F(10)
    assert trace.value_at(F(11), "x") == F(1)


def test_bad_files():
    with pytest.raises(AutomatonError):
        parse_automaton("location L\n  rate x 1\n")  # no init
    with pytest.raises(AutomatonError):
        parse_automaton("var x\ninit L x = 0\n")  # unknown location
    with pytest.raises(AutomatonError):
        parse_automaton("var x\nlocation L\n  inv x <= beta\ninit L x = 0\n")


# --- comparison against the program ------------------------------------------------


def _carousel_program(alpha, wcrt):
    program = parse((CORPUS / "programs" / "carousel.hsj").read_text())
    return bind_params(
        program,
        {"alpha": F(alpha), "beta": F(10), "theta": F(6), "TAG": F(1)},
    )


def test_compare_diverges_after_first_mode_switch():
    report = compare(
        _carousel(),
        _carousel_program(3, 2),
        RewriteConfig(F(2)),
        horizon=F(12),
        mapping={"x": "x", "y": "y"},
    )
    # grid agrees at t=0 and t=2; the first switch happens at t=3 and the
    # very next grid point diverges
    assert report.first_divergence_tick == 2
    switch = report.mode_switches[0]
    assert switch.time == F(3)
    assert (report.first_divergence_tick - 1) * F(2) <= switch.time <= report.first_divergence_tick * F(2)
    assert report.max_deviation > 0


def test_compare_reports_both_switch_logs():
    report = compare(
        _carousel(),
        _carousel_program(3, 2),
        RewriteConfig(F(2)),
        horizon=F(12),
        mapping={"x": "x", "y": "y"},
    )
    ideal_divert = next(s for s in report.mode_switches if s.source == "B")
    assert ideal_divert.valuation_before["x"] == F(9)
    delayed_divert = next(s for s in report.delayed_mode_switches if s.source == "B")
    assert delayed_divert.valuation_before["x"] == F(11)


def test_compare_identical_constant_systems():
    ha = parse_automaton("var x\nlocation L\n  rate x 1\ninit L x = 0\n")
    program = parse("cont x = 0;\ndo {x' = 1} until (true)")
    report = compare(ha, program, RewriteConfig(F(2)), F(10), {"x": "x"})
    assert report.first_divergence_tick is None
    assert report.max_deviation == 0


def test_compare_agreement_until_reset_lag():
    # at unit step the item position tracks the automaton through the
    # whole first delivery; the one-tick write delay of the reset is the
    # first gap (the diverter is not compared: the automaton starts it at
    # the switch instant, the program one reaction chain later)
    report = compare(
        _carousel({"alpha": 1, "theta": 6, "beta": 10}),
        _carousel_program(1, 1),
        RewriteConfig(F(1)),
        horizon=F(14),
        mapping={"x": "x"},
    )
    assert report.first_divergence_tick == 11
    deliver = next(s for s in report.mode_switches if s.source == "D")
    assert deliver.time == F(10)


def test_compare_unmapped_variable():
    ha = parse_automaton("var x\nlocation L\n  rate x 1\ninit L x = 0\n")
    program = parse("cont x = 0;\ndo {x' = 1} until (true)")
    with pytest.raises(AutomatonError):
        compare(ha, program, RewriteConfig(F(2)), F(4), {"z": "x"})
