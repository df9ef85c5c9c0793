"""Trace data structure and its stable machine- and human-readable forms.

A trace is one record per executed tick with the settled status of every
live signal, the settled value of every valued signal and continuous
variable, and the names of labels holding a paused control point. Rationals
are never converted to floating point in any export; CSV, JSON and SVG
output is byte-deterministic for equal traces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import TickflowError
from .rational import format_rational, parse_rational


@dataclass(frozen=True)
class TickRecord:
    tick: int
    time: Fraction
    statuses: dict  # name -> bool
    values: dict  # name -> Fraction | bool (valued signals)
    conts: dict  # name -> Fraction
    labels: tuple  # sorted label names with a paused control point


@dataclass
class Trace:
    wcrt: Fraction
    records: list
    terminated: bool
    termination_tick: Optional[int]
    initial_conts: dict = field(default_factory=dict)
    read_log: Optional[list] = None

    # -- queries --

    def record(self, tick: int) -> TickRecord:
        for rec in self.records:
            if rec.tick == tick:
                return rec
        raise TickflowError(f"no record for tick {tick}")

    def cont(self, name: str, tick: int) -> Fraction:
        if tick == 0:
            return self.initial_conts[name]
        return self.record(tick).conts[name]

    def status(self, name: str, tick: int) -> bool:
        return self.record(tick).statuses.get(name, False)

    def value(self, name: str, tick: int):
        return self.record(tick).values[name]

    def series(self, name: str) -> list:
        """[(tick, settled value)] of a continuous variable, while live."""
        return [(r.tick, r.conts[name]) for r in self.records if name in r.conts]

    def final_cont(self, name: str) -> Fraction:
        for rec in reversed(self.records):
            if name in rec.conts:
                return rec.conts[name]
        return self.initial_conts[name]

    def emission_ticks(self, name: str) -> list:
        return [r.tick for r in self.records if r.statuses.get(name, False)]

    def entities(self) -> list:
        names = set(self.initial_conts)
        for rec in self.records:
            names.update(rec.statuses)
            names.update(rec.conts)
        return sorted(names)

    @property
    def effective_termination_tick(self) -> Optional[int]:
        """Termination tick with a trailing activity-free transition
        collapsed: if the last transition only drained finished control
        (no emission, no value change), termination is attributed to the
        tick before it."""
        if not self.terminated or self.termination_tick is None:
            return None
        if self._quiet(self.termination_tick):
            return self.termination_tick - 1
        return self.termination_tick

    def _quiet(self, tick: int) -> bool:
        rec = self.record(tick)
        if any(rec.statuses.values()):
            return False
        prev = None
        for r in self.records:
            if r.tick == tick - 1:
                prev = r
        if prev is None:
            return not rec.conts and not rec.values
        for name, value in rec.conts.items():
            if name in prev.conts and prev.conts[name] != value:
                return False
        for name, value in rec.values.items():
            if name in prev.values and prev.values[name] != value:
                return False
        return True

    def project(self, names) -> list:
        """Per-tick view restricted to the given entities, for comparing
        traces that differ only in generated internals."""
        keep = set(names)
        out = []
        for rec in self.records:
            out.append(
                (
                    rec.tick,
                    tuple(sorted((k, v) for k, v in rec.statuses.items() if k in keep)),
                    tuple(sorted((k, v) for k, v in rec.values.items() if k in keep)),
                    tuple(sorted((k, v) for k, v in rec.conts.items() if k in keep)),
                    rec.labels,
                )
            )
        return out


# --- CSV ----------------------------------------------------------------------


def _datum(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return format_rational(value)


def to_csv(trace: Trace) -> str:
    """One row per settled entity per tick: tick,time,entity,kind,value."""
    lines = ["tick,time,entity,kind,value"]
    for rec in trace.records:
        rows = []
        for name, status in rec.statuses.items():
            rows.append((name, "status", _datum(status)))
        for name, value in rec.values.items():
            rows.append((name, "value", _datum(value)))
        for name, value in rec.conts.items():
            rows.append((name, "cont", _datum(value)))
        for name in rec.labels:
            rows.append((name, "label", "true"))
        for name, kind, datum in sorted(rows):
            lines.append(
                f"{rec.tick},{format_rational(rec.time)},{name},{kind},{datum}"
            )
    return "\n".join(lines) + "\n"


# --- JSON ---------------------------------------------------------------------


def _value_to_json(value):
    if isinstance(value, bool):
        return value
    return format_rational(value)


def _value_from_json(value):
    if isinstance(value, bool):
        return value
    return parse_rational(value)


def to_json(trace: Trace) -> str:
    doc = {
        "wcrt": format_rational(trace.wcrt),
        "terminated": trace.terminated,
        "termination_tick": trace.termination_tick,
        "initial": {k: format_rational(v) for k, v in sorted(trace.initial_conts.items())},
        "ticks": [
            {
                "tick": rec.tick,
                "time": format_rational(rec.time),
                "statuses": {k: v for k, v in sorted(rec.statuses.items())},
                "values": {k: _value_to_json(v) for k, v in sorted(rec.values.items())},
                "conts": {k: format_rational(v) for k, v in sorted(rec.conts.items())},
                "labels": list(rec.labels),
            }
            for rec in trace.records
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> Trace:
    doc = json.loads(text)
    records = [
        TickRecord(
            tick=entry["tick"],
            time=parse_rational(entry["time"]),
            statuses=dict(entry["statuses"]),
            values={k: _value_from_json(v) for k, v in entry["values"].items()},
            conts={k: parse_rational(v) for k, v in entry["conts"].items()},
            labels=tuple(entry["labels"]),
        )
        for entry in doc["ticks"]
    ]
    return Trace(
        wcrt=parse_rational(doc["wcrt"]),
        records=records,
        terminated=doc["terminated"],
        termination_tick=doc["termination_tick"],
        initial_conts={k: parse_rational(v) for k, v in doc["initial"].items()},
    )


def trace_equal(a: Trace, b: Trace) -> bool:
    """Equality over everything an exporter would see (the read log is
    diagnostic and ignored)."""
    return (
        a.wcrt == b.wcrt
        and a.terminated == b.terminated
        and a.termination_tick == b.termination_tick
        and a.initial_conts == b.initial_conts
        and a.records == b.records
    )


# --- SVG timing diagram ---------------------------------------------------------

_LANE_H = 40
_LANE_GAP = 14
_TICK_W = 56
_LEFT = 90
_TOP = 24


def to_svg_timing(trace: Trace, vars: list) -> str:
    """Step-plot timing diagram, one lane per entity. Boolean entities draw
    as low/high pulses; numeric entities as a step line with value labels."""
    if not vars:
        raise TickflowError("no entities selected for the timing diagram")
    known = set(trace.entities())
    for name in vars:
        if name not in known:
            raise TickflowError(f"unknown entity {name!r}")
    ticks = [rec.tick for rec in trace.records]
    last = ticks[-1] if ticks else 0
    width = _LEFT + _TICK_W * (last + 1) + 20
    height = _TOP + len(vars) * (_LANE_H + _LANE_GAP) + 30
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="monospace" font-size="11">'
    ]
    for row, name in enumerate(vars):
        y0 = _TOP + row * (_LANE_H + _LANE_GAP)
        out.append(f'<g id="lane-{name}">')
        out.append(
            f'<text x="4" y="{y0 + _LANE_H // 2}" dominant-baseline="middle">'
            f"{name}</text>"
        )
        pts = _lane_points(trace, name)
        if pts and isinstance(pts[0][1], bool):
            out.append(_bool_lane(pts, y0, last))
        else:
            out.append(_num_lane(pts, y0, last))
        out.append("</g>")
    axis_y = _TOP + len(vars) * (_LANE_H + _LANE_GAP) + 4
    for t in range(0, last + 1):
        x = _LEFT + t * _TICK_W
        out.append(
            f'<line x1="{x}" y1="{_TOP - 8}" x2="{x}" y2="{axis_y}" '
            'stroke="#ccc" stroke-width="1"/>'
        )
        out.append(f'<text x="{x + 2}" y="{axis_y + 12}">{t}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _lane_points(trace: Trace, name: str) -> list:
    """[(tick, value)] starting at tick 0; value settled at that boundary."""
    pts = []
    if name in trace.initial_conts:
        pts.append((0, trace.initial_conts[name]))
    for rec in trace.records:
        if name in rec.conts:
            pts.append((rec.tick, rec.conts[name]))
        elif name in rec.statuses:
            pts.append((rec.tick, rec.statuses[name]))
    if not pts:
        pts = [(0, False)]
    return pts


def _x(tick: int) -> int:
    return _LEFT + tick * _TICK_W

def _bool_lane(pts: list, y0: int, last: int) -> str:
    low = y0 + _LANE_H
    high = y0 + 8
    segs = []
    prev_level = low  # statuses settle false before the first record
    x_prev = _x(0)
    for tick, value in pts:
        x = _x(tick)
        level = high if value else low
        if x > x_prev:
            segs.append(f"M {x_prev} {prev_level} H {x}")
        if level != prev_level:
            segs.append(f"M {x} {prev_level} V {level}")
        prev_level = level
        x_prev = x
    segs.append(f"M {x_prev} {prev_level} H {_x(last + 1)}")
    path = " ".join(segs)
    return f'<path d="{path}" fill="none" stroke="black" stroke-width="1.5"/>'


def _num_lane(pts: list, y0: int, last: int) -> str:
    mid = y0 + _LANE_H // 2
    parts = []
    x_prev = None
    for tick, value in pts:
        x = _x(tick)
        if x_prev is not None:
            parts.append(
                f'<line x1="{x_prev}" y1="{mid}" x2="{x}" y2="{mid}" '
                'stroke="black" stroke-width="1"/>'
            )
            parts.append(
                f'<line x1="{x}" y1="{y0 + 4}" x2="{x}" y2="{y0 + _LANE_H - 4}" '
                'stroke="black" stroke-width="1"/>'
            )
        parts.append(
            f'<text x="{x + 4}" y="{mid - 4}">{_datum(value)}</text>'
        )
        x_prev = x
    if x_prev is not None:
        parts.append(
            f'<line x1="{x_prev}" y1="{mid}" x2="{_x(last + 1)}" y2="{mid}" '
            'stroke="black" stroke-width="1"/>'
        )
    return "\n".join(parts)
