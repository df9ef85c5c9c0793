"""Reference simulator for linear hybrid automata with constant slopes.

The classical semantics alternates time steps (dwell in a location while
its invariant holds) with instantaneous edges. With constant rates and
linear guards every enabling instant is an exact rational, so simulation is
closed-form: advance to the earliest instant an outgoing guard is
satisfiable, take that edge, apply its resets, repeat.

Switching is urgent (earliest enabled wins); two edges enabling at the same
instant need explicit priorities. Edges may carry a delay: the switch then
happens that long after enabling while the source location's activities
keep driving the variables and the invariant is not enforced during the
overrun. That mode exists to simulate what a clocked controller actually
does to the plant, and `compare` uses it to quantify the gap between the
idealized automaton and the tick-discretized program.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import AutomatonError, DeadlockError, NondeterminismError
from .kernel import run as kernel_run
from .rational import format_rational, parse_rational
from .rewrite import RewriteConfig, rewrite_flows
from .syntax.nodes import Program

_INF = None  # open upper bound


# --- linear expressions over automaton variables --------------------------------


@dataclass(frozen=True)
class LinExpr:
    """constant + sum(coeff * var)."""

    const: Fraction
    coeffs: tuple  # ((var, Fraction), ...) sorted, zero coeffs dropped

    @staticmethod
    def make(const=0, coeffs=None) -> "LinExpr":
        pairs = tuple(
            sorted((v, Fraction(c)) for v, c in (coeffs or {}).items() if c != 0)
        )
        return LinExpr(Fraction(const), pairs)

    def value(self, valuation: dict) -> Fraction:
        total = self.const
        for var, coeff in self.coeffs:
            total += coeff * valuation[var]
        return total

    def slope(self, rates: dict) -> Fraction:
        total = Fraction(0)
        for var, coeff in self.coeffs:
            total += coeff * rates.get(var, Fraction(0))
        return total


@dataclass(frozen=True)
class Comparison:
    """lhs OP 0 with OP in <=, <, >=, >, ==."""

    lhs: LinExpr
    op: str

    def holds(self, valuation: dict) -> bool:
        v = self.lhs.value(valuation)
        if self.op == "<=":
            return v <= 0
        if self.op == "<":
            return v < 0
        if self.op == ">=":
            return v >= 0
        if self.op == ">":
            return v > 0
        return v == 0

    def satisfaction_window(self, valuation: dict, rates: dict):
        """Interval of t >= 0 where the comparison holds along the flow;
        returns (lo, hi, lo_strict, hi_strict) with hi None for unbounded,
        or None when empty."""
        v0 = self.lhs.value(valuation)
        slope = self.lhs.slope(rates)
        if self.op == "==":
            if slope == 0:
                return (Fraction(0), _INF, False, False) if v0 == 0 else None
            t = -v0 / slope
            if t < 0:
                return None
            return (t, t, False, False)
        # normalize to "value <= 0" / "value < 0" direction
        flip = self.op in (">=", ">")
        v = -v0 if flip else v0
        s = -slope if flip else slope
        strict = self.op in ("<", ">")
        # window where v + s t (<|<=) 0
        if s == 0:
            ok = v < 0 if strict else v <= 0
            return (Fraction(0), _INF, False, False) if ok else None
        t_cross = -v / s
        if s < 0:
            # becomes satisfied from t_cross onward
            lo = max(t_cross, Fraction(0))
            return (lo, _INF, strict and lo == t_cross, False)
        # satisfied up to t_cross
        if t_cross < 0 or (strict and t_cross == 0):
            return None
        return (Fraction(0), t_cross, False, strict)


def window_intersect(a, b):
    if a is None or b is None:
        return None
    lo_a, hi_a, slo_a, shi_a = a
    lo_b, hi_b, slo_b, shi_b = b
    if lo_a > lo_b:
        lo, slo = lo_a, slo_a
    elif lo_b > lo_a:
        lo, slo = lo_b, slo_b
    else:
        lo, slo = lo_a, slo_a or slo_b
    if hi_a is _INF:
        hi, shi = hi_b, shi_b
    elif hi_b is _INF:
        hi, shi = hi_a, shi_a
    elif hi_a < hi_b:
        hi, shi = hi_a, shi_a
    elif hi_b < hi_a:
        hi, shi = hi_b, shi_b
    else:
        hi, shi = hi_a, shi_a or shi_b
    if hi is not _INF:
        if lo > hi or (lo == hi and (slo or shi)):
            return None
    return (lo, hi, slo, shi)


# --- automaton structure ----------------------------------------------------------


@dataclass(frozen=True)
class Location:
    name: str
    rates: dict  # var -> Fraction
    invariant: tuple  # conjunction of Comparisons


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: tuple  # conjunction of Comparisons
    resets: tuple  # ((var, LinExpr), ...) applied at the switch
    label: str = ""
    delay: Fraction = Fraction(0)
    priority: int = 0


@dataclass(frozen=True)
class HybridAutomaton:
    variables: tuple
    locations: dict  # name -> Location
    edges: tuple
    initial_location: str
    initial_valuation: dict  # var -> Fraction

    def __post_init__(self):
        if self.initial_location not in self.locations:
            raise AutomatonError(f"unknown initial location {self.initial_location!r}")
        init_loc = self.locations[self.initial_location]
        valuation = dict(self.initial_valuation)
        for comparison in init_loc.invariant:
            if not comparison.holds(valuation):
                raise AutomatonError("initial valuation violates the invariant")


@dataclass(frozen=True)
class TimeSegment:
    start: Fraction
    duration: Fraction
    location: str
    valuation_start: dict  # var -> Fraction at segment start
    rates: dict


@dataclass(frozen=True)
class DiscreteStep:
    time: Fraction
    label: str
    source: str
    target: str
    valuation_before: dict
    valuation_after: dict


@dataclass
class HaTrace:
    segments: list  # TimeSegment
    steps: list  # DiscreteStep
    horizon: Fraction

    def value_at(self, t: Fraction, var: str) -> Fraction:
        """Valuation at time t; at a switch instant this is the left limit
        (the pre-switch value)."""
        for seg in self.segments:
            end = seg.start + seg.duration
            if seg.start <= t <= end:
                dt = t - seg.start
                return seg.valuation_start[var] + seg.rates.get(var, Fraction(0)) * dt
        raise AutomatonError(f"time {t} beyond the simulated horizon")


def ha_simulate(
    ha: HybridAutomaton,
    horizon: Fraction,
    use_delays: bool = False,
    max_switches: int = 10_000,
) -> HaTrace:
    """Simulate with urgent switching up to the horizon.

    `use_delays` turns on the per-edge delays (the clocked-controller
    overrun mode); without it every switch is instantaneous at its
    enabling instant and location invariants are enforced throughout.
    """
    loc = ha.locations[ha.initial_location]
    valuation = dict(ha.initial_valuation)
    now = Fraction(0)
    trace = HaTrace([], [], horizon)
    switches = 0
    zero_dwell = 0
    while now < horizon:
        result = _next_switch(ha, loc, valuation, now, horizon, use_delays)
        if result is None:
            # dwell to the horizon
            trace.segments.append(
                TimeSegment(now, horizon - now, loc.name, dict(valuation), loc.rates)
            )
            return trace
        edge, switch_time = result
        dwell = switch_time - now
        trace.segments.append(
            TimeSegment(now, dwell, loc.name, dict(valuation), loc.rates)
        )
        before = {
            v: valuation[v] + loc.rates.get(v, Fraction(0)) * dwell
            for v in ha.variables
        }
        after = dict(before)
        for var, expr in edge.resets:
            after[var] = expr.value(before)
        trace.steps.append(
            DiscreteStep(switch_time, edge.label, edge.source, edge.target, before, after)
        )
        zero_dwell = zero_dwell + 1 if dwell == 0 else 0
        switches += 1
        if switches > max_switches or zero_dwell > len(ha.locations) + len(ha.edges):
            raise AutomatonError("switch livelock: no time passes")
        loc = ha.locations[edge.target]
        valuation = after
        now = switch_time
        if not use_delays:
            for comparison in loc.invariant:
                if not comparison.holds(valuation):
                    raise DeadlockError(
                        f"invariant of {loc.name!r} violated on entry", now
                    )
    return trace


def _next_switch(ha, loc, valuation, now, horizon, use_delays):
    """Earliest enabled outgoing edge from the current state, or None if
    the automaton dwells past the horizon. Enforces the invariant (ideal
    mode) and urgent determinism."""
    inv_window = (Fraction(0), _INF, False, False)
    for comparison in loc.invariant:
        inv_window = window_intersect(
            inv_window, comparison.satisfaction_window(valuation, loc.rates)
        )
    candidates = []
    for edge in ha.edges:
        if edge.source != loc.name:
            continue
        window = (Fraction(0), _INF, False, False)
        for comparison in edge.guard:
            window = window_intersect(
                window, comparison.satisfaction_window(valuation, loc.rates)
            )
        if window is None:
            continue
        lo, _, lo_strict, _ = window
        if lo_strict:
            continue  # an open enabling instant has no earliest point
        enable = lo
        if not use_delays and inv_window is not None:
            inv_hi = inv_window[1]
            if inv_hi is not _INF and enable > inv_hi:
                continue  # invariant expires before the guard enables
        candidates.append((enable, edge))
    if not candidates:
        if not use_delays and inv_window is not None and inv_window[1] is not _INF:
            expiry = now + inv_window[1]
            if expiry < horizon:
                raise DeadlockError(
                    f"invariant of {loc.name!r} expires with no enabled edge", expiry
                )
        return None
    # urgency ranks by enabling instant; an edge delay postpones only the
    # switch itself while the plant keeps flowing
    best_enable = min(enable for enable, _ in candidates)
    if now + best_enable >= horizon:
        return None
    best = [edge for enable, edge in candidates if enable == best_enable]
    if len(best) > 1:
        best.sort(key=lambda e: e.priority)
        if best[0].priority == best[1].priority:
            raise NondeterminismError(
                f"edges {best[0].label!r} and {best[1].label!r} enable "
                f"simultaneously at t={format_rational(now + best_enable)}"
            )
    edge = best[0]
    switch_time = now + best_enable + (edge.delay if use_delays else Fraction(0))
    if switch_time >= horizon:
        return None
    return edge, switch_time


# --- comparison against the tick-discretized program ------------------------------


@dataclass(frozen=True)
class GridPoint:
    tick: int
    time: Fraction
    ha_values: dict
    program_values: dict
    diverged: bool


@dataclass
class DivergenceReport:
    mapping: dict  # automaton var -> program cont var
    grid: list  # GridPoint per tick
    first_divergence_tick: Optional[int]
    max_deviation: Fraction
    mode_switches: list  # DiscreteStep of the ideal automaton
    delayed_mode_switches: list  # DiscreteStep with edge delays applied

    def to_text(self) -> str:
        pairs = sorted(self.mapping.items())
        lines = [
            "tick,time,"
            + ",".join(f"ha:{var},prog:{pvar}" for var, pvar in pairs)
        ]
        for point in self.grid:
            cells = [str(point.tick), format_rational(point.time)]
            for var, pvar in pairs:
                cells.append(format_rational(point.ha_values[var]))
                cells.append(format_rational(point.program_values[pvar]))
            lines.append(",".join(cells))
        if self.first_divergence_tick is None:
            lines.append("no divergence on the grid")
        else:
            lines.append(f"first divergence at tick {self.first_divergence_tick}")
        lines.append(f"max deviation {format_rational(self.max_deviation)}")
        for step in self.mode_switches:
            lines.append(
                f"ideal switch {step.source}->{step.target} at "
                f"t={format_rational(step.time)} "
                + _valuation_text(step.valuation_before)
            )
        for step in self.delayed_mode_switches:
            lines.append(
                f"delayed switch {step.source}->{step.target} at "
                f"t={format_rational(step.time)} "
                + _valuation_text(step.valuation_before)
            )
        return "\n".join(lines) + "\n"


def _valuation_text(valuation: dict) -> str:
    return " ".join(
        f"{name}={format_rational(value)}" for name, value in sorted(valuation.items())
    )


def compare(
    ha: HybridAutomaton,
    program: Program,
    cfg: RewriteConfig,
    horizon: Fraction,
    mapping: dict,
) -> DivergenceReport:
    """Tabulate the ideal automaton and the tick-discretized program on the
    tick grid; report the first diverging tick, the maximum deviation, and
    both switch logs (ideal and WCRT-delayed).

    `mapping` sends automaton variables to program continuous variables.
    """
    for var in mapping:
        if var not in ha.variables:
            raise AutomatonError(f"unmapped automaton variable {var!r}")
    ideal = ha_simulate(ha, horizon)
    delayed = ha_simulate(_with_wcrt_delays(ha, cfg.wcrt), horizon, use_delays=True)
    rewritten = rewrite_flows(program, cfg)
    n_ticks = int(horizon / cfg.wcrt)
    trace = kernel_run(rewritten, cfg, max_ticks=n_ticks)
    by_tick = {rec.tick: rec for rec in trace.records}
    grid = []
    first = None
    max_dev = Fraction(0)
    for k in range(n_ticks + 1):
        t = k * cfg.wcrt
        ha_values = {v: ideal.value_at(t, v) for v in mapping}
        prog_values = {}
        diverged = False
        for var, pvar in mapping.items():
            prog_values[pvar] = _program_value(trace, by_tick, pvar, k)
            dev = abs(ha_values[var] - prog_values[pvar])
            max_dev = max(max_dev, dev)
            if dev != 0:
                diverged = True
        grid.append(GridPoint(k, t, ha_values, prog_values, diverged))
        if diverged and first is None:
            first = k
    return DivergenceReport(
        mapping=dict(mapping),
        grid=grid,
        first_divergence_tick=first,
        max_deviation=max_dev,
        mode_switches=list(ideal.steps),
        delayed_mode_switches=list(delayed.steps),
    )


def _program_value(trace, by_tick: dict, pvar: str, k: int) -> Fraction:
    if k == 0:
        return trace.initial_conts[pvar]
    rec = by_tick.get(k)
    if rec is not None and pvar in rec.conts:
        return rec.conts[pvar]
    return trace.final_cont(pvar)  # program ended; the value froze


def _with_wcrt_delays(ha: HybridAutomaton, wcrt: Fraction) -> HybridAutomaton:
    """Resolve symbolic per-edge delays: edges authored with `delay wcrt`
    carry Fraction(-1) as a placeholder replaced here."""
    edges = tuple(
        Edge(
            e.source,
            e.target,
            e.guard,
            e.resets,
            e.label,
            wcrt if e.delay == Fraction(-1) else e.delay,
            e.priority,
        )
        for e in ha.edges
    )
    return HybridAutomaton(
        ha.variables, ha.locations, edges, ha.initial_location, ha.initial_valuation
    )


# --- automaton description files ---------------------------------------------------
#
#     var x y
#     location A
#       rate x 1
#       rate y 0
#       inv x <= alpha
#     location B ...
#     init A x = 0 y = 0
#     edge A -> B when x >= alpha label detect delay wcrt
#     edge B -> D when y >= theta label divert reset y = 0
#
# Comparisons are `expr OP expr` over variables, rationals and bound
# parameter names; `delay wcrt` marks a controller-delayed edge, `delay Q`
# a fixed one. '#' starts a comment.


def parse_automaton(text: str, params: Optional[dict] = None) -> HybridAutomaton:
    params = {k: Fraction(v) for k, v in (params or {}).items()}
    variables: list = []
    locations: dict = {}
    edges: list = []
    initial_location = None
    initial_valuation: dict = {}
    current: Optional[dict] = None

    def close_location():
        nonlocal current
        if current is not None:
            locations[current["name"]] = Location(
                current["name"], current["rates"], tuple(current["inv"])
            )
            current = None

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "var":
            variables.extend(parts[1:])
        elif head == "location":
            close_location()
            if len(parts) != 2:
                raise AutomatonError(f"bad location line: {line!r}")
            current = {"name": parts[1], "rates": {}, "inv": []}
        elif head == "rate":
            if current is None or len(parts) != 3:
                raise AutomatonError(f"bad rate line: {line!r}")
            current["rates"][parts[1]] = _rate_value(parts[2], params)
        elif head == "inv":
            if current is None:
                raise AutomatonError(f"invariant outside a location: {line!r}")
            current["inv"].append(_parse_comparison(" ".join(parts[1:]), variables, params))
        elif head == "init":
            close_location()
            if len(parts) < 2:
                raise AutomatonError(f"bad init line: {line!r}")
            initial_location = parts[1]
            rest = " ".join(parts[2:])
            for assign in rest.split(","):
                assign = assign.strip()
                if not assign:
                    continue
                var, _, value = assign.partition("=")
                initial_valuation[var.strip()] = _rate_value(value.strip(), params)
        elif head == "edge":
            close_location()
            edges.append(_parse_edge(line, variables, params))
        else:
            raise AutomatonError(f"unrecognized line: {line!r}")
    close_location()
    if initial_location is None:
        raise AutomatonError("no init line")
    for var in variables:
        initial_valuation.setdefault(var, Fraction(0))
    return HybridAutomaton(
        tuple(variables), locations, tuple(edges), initial_location, initial_valuation
    )


def _rate_value(token: str, params: dict) -> Fraction:
    if token in params:
        return params[token]
    try:
        return parse_rational(token)
    except ValueError as exc:
        raise AutomatonError(f"unknown constant {token!r}") from exc


def _parse_edge(line: str, variables, params) -> Edge:
    parts = line.split()
    # edge SRC -> DST [when CMP [&& CMP ...]] [label L] [reset v = expr[, ...]]
    #      [delay Q|wcrt] [priority N]
    if len(parts) < 4 or parts[2] != "->":
        raise AutomatonError(f"bad edge line: {line!r}")
    source, target = parts[1], parts[3]
    rest = " ".join(parts[4:])
    guard: list = []
    resets: list = []
    label = ""
    delay = Fraction(0)
    priority = 0
    fields = _split_fields(rest, ("when", "label", "reset", "delay", "priority"))
    for key, value in fields:
        if key == "when":
            for clause in value.split("&&"):
                guard.append(_parse_comparison(clause.strip(), variables, params))
        elif key == "label":
            label = value.strip()
        elif key == "reset":
            for assign in value.split(","):
                var, _, expr = assign.partition("=")
                resets.append(
                    (var.strip(), _parse_linexpr(expr.strip(), variables, params))
                )
        elif key == "delay":
            token = value.strip()
            delay = Fraction(-1) if token == "wcrt" else _rate_value(token, params)
        elif key == "priority":
            priority = int(value.strip())
    return Edge(source, target, tuple(guard), tuple(resets), label, delay, priority)


def _split_fields(text: str, keys) -> list:
    tokens = text.split()
    fields = []
    current_key = None
    buf: list = []
    for token in tokens:
        if token in keys:
            if current_key is not None:
                fields.append((current_key, " ".join(buf)))
            current_key = token
            buf = []
        else:
            buf.append(token)
    if current_key is not None:
        fields.append((current_key, " ".join(buf)))
    elif buf:
        raise AutomatonError(f"stray tokens in edge: {' '.join(buf)!r}")
    return fields


def _parse_comparison(text: str, variables, params) -> Comparison:
    for op in ("<=", ">=", "==", "<", ">"):
        if op in text:
            left, right = text.split(op, 1)
            lhs = _parse_linexpr(left.strip(), variables, params)
            rhs = _parse_linexpr(right.strip(), variables, params)
            diff = LinExpr.make(
                lhs.const - rhs.const,
                _merge_coeffs(lhs.coeffs, rhs.coeffs),
            )
            return Comparison(diff, op)
    raise AutomatonError(f"no comparison operator in {text!r}")


def _merge_coeffs(left, right) -> dict:
    merged: dict = {}
    for var, coeff in left:
        merged[var] = merged.get(var, Fraction(0)) + coeff
    for var, coeff in right:
        merged[var] = merged.get(var, Fraction(0)) - coeff
    return merged


def _parse_linexpr(text: str, variables, params) -> LinExpr:
    """Sums of terms: `2*x + y - 3` with rational or parameter constants."""
    text = text.replace("-", "+-")
    const = Fraction(0)
    coeffs: dict = {}
    for term in text.split("+"):
        term = term.strip()
        if not term:
            continue
        negative = term.startswith("-")
        if negative:
            term = term[1:].strip()
        if "*" in term:
            factor, _, var = term.partition("*")
            coeff = _rate_value(factor.strip(), params)
            var = var.strip()
            if var not in variables:
                raise AutomatonError(f"unknown variable {var!r}")
            coeffs[var] = coeffs.get(var, Fraction(0)) + (-coeff if negative else coeff)
        elif term in variables:
            coeffs[term] = coeffs.get(term, Fraction(0)) + (
                Fraction(-1) if negative else Fraction(1)
            )
        else:
            value = _rate_value(term, params)
            const += -value if negative else value
    return LinExpr.make(const, coeffs)
