"""Grid-aware circuit IR: qubits on integer lattice sites, time-ordered
moments of gates, measurement records, and staged acceptance checks.

Two-qubit gates are only allowed between Manhattan-distance-1 sites.
A site is "live" between a Prep gate and the next measurement of that
site; idle noise applies to live sites that receive no physical gate in
a moment.  Classically controlled Paulis (CPX/CPZ records in text form)
are frame updates: they occupy their site for moment-disjointness but
are not physical gates and draw no noise.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

DATA = "data"
ANCILLA = "ancilla"
BOUNDARY = "boundary-ancilla"

ONE_QUBIT_GATES = {"PrepZ", "PrepX", "H", "X", "Y", "Z", "S", "Sdg", "A", "Adg",
                   "MeasZ", "MeasX"}
TWO_QUBIT_GATES = {"CNOT"}
PREPS = {"PrepZ", "PrepX"}
MEASUREMENTS = {"MeasZ", "MeasX"}
GATE_KINDS = ONE_QUBIT_GATES | TWO_QUBIT_GATES | {"CPauli"}


@dataclass(frozen=True, order=True)
class GridQubit:
    row: int
    col: int
    role: str = DATA

    def __post_init__(self):
        if self.row < 0 or self.col < 0:
            raise ValueError("lattice coordinates must be non-negative")

    @property
    def site(self) -> tuple[int, int]:
        return (self.row, self.col)

    def is_adjacent(self, other: "GridQubit") -> bool:
        return abs(self.row - other.row) + abs(self.col - other.col) == 1

    def __repr__(self):
        return f"q({self.row},{self.col})"


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[GridQubit, ...]
    condition: Optional[int] = None   # record slot controlling a CPauli
    record_slot: Optional[int] = None  # slot written by a measurement
    letter: str = ""                  # "X" or "Z" for CPauli

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n = 2 if self.kind in TWO_QUBIT_GATES else 1
        if len(self.targets) != n:
            raise ValueError(f"{self.kind} takes {n} target(s)")
        if self.kind == "CPauli":
            if self.letter not in ("X", "Z"):
                raise ValueError("CPauli needs letter 'X' or 'Z'")
            if self.condition is None:
                raise ValueError("CPauli needs a condition slot")
        if self.kind in MEASUREMENTS and self.record_slot is None:
            raise ValueError("measurements must write a record slot")

    @property
    def is_physical(self) -> bool:
        return self.kind != "CPauli"


@dataclass(frozen=True)
class Moment:
    gates: tuple[Gate, ...]

    def touched(self) -> set[GridQubit]:
        out: set[GridQubit] = set()
        for g in self.gates:
            out.update(g.targets)
        return out


@dataclass(frozen=True)
class AcceptanceCheck:
    """A staged pass/fail predicate over measurement record slots."""
    name: str
    slots: tuple[int, ...]
    predicate: str  # parity-even | parity-odd | all-equal
    stage: int

    def evaluate(self, record: Sequence[int]) -> bool:
        bits = [record[s] for s in self.slots]
        if self.predicate == "parity-even":
            return sum(bits) % 2 == 0
        if self.predicate == "parity-odd":
            return sum(bits) % 2 == 1
        if self.predicate == "all-equal":
            return len(set(bits)) <= 1
        raise ValueError(f"unknown predicate {self.predicate!r}")


@dataclass
class Circuit:
    layout: tuple[GridQubit, ...]
    moments: list[Moment] = field(default_factory=list)
    record_len: int = 0
    checks: list[AcceptanceCheck] = field(default_factory=list)

    def depth(self) -> int:
        return len(self.moments)

    def site_map(self) -> dict[tuple[int, int], GridQubit]:
        return {q.site: q for q in self.layout}

    def iter_gates(self):
        for m, moment in enumerate(self.moments):
            for g in moment.gates:
                yield m, g

    # -- liveness ----------------------------------------------------

    def live_spans(self) -> dict[GridQubit, list[tuple[int, int]]]:
        """Per qubit, inclusive [prep_moment, meas_moment] live intervals.

        A prep with no later measurement stays live through the final
        moment.
        """
        spans: dict[GridQubit, list[tuple[int, int]]] = {q: [] for q in self.layout}
        open_at: dict[GridQubit, int] = {}
        for m, g in self.iter_gates():
            if g.kind in PREPS:
                q = g.targets[0]
                if q in open_at:
                    raise ValueError(f"{q} re-prepared at moment {m} while live")
                open_at[q] = m
            elif g.kind in MEASUREMENTS:
                q = g.targets[0]
                if q not in open_at:
                    raise ValueError(f"{q} measured at moment {m} while not live")
                spans[q].append((open_at.pop(q), m))
        for q, start in open_at.items():
            spans[q].append((start, len(self.moments) - 1))
        return spans

    def live_now(self) -> list[set[GridQubit]]:
        """Set of live qubits per moment (live during prep and meas moments)."""
        live = [set() for _ in self.moments]
        for q, intervals in self.live_spans().items():
            for a, b in intervals:
                for m in range(a, b + 1):
                    live[m].add(q)
        return live

    def peak_live(self) -> int:
        return max((len(s) for s in self.live_now()), default=0)


def depth(circuit: Circuit) -> int:
    return circuit.depth()


def validate_circuit(circuit: Circuit) -> list[str]:
    """Return a list of violations; empty means valid."""
    problems: list[str] = []
    layout = set(circuit.layout)
    sites = [q.site for q in circuit.layout]
    if len(set(sites)) != len(sites):
        problems.append("duplicate (row,col) in layout")

    written: dict[int, int] = {}
    live: set[GridQubit] = set()
    for m, moment in enumerate(circuit.moments):
        seen: set[GridQubit] = set()
        for g in moment.gates:
            for q in g.targets:
                if q not in layout:
                    problems.append(f"moment {m}: {q} not in layout")
                if q in seen:
                    problems.append(f"moment {m}: {q} touched twice")
                seen.add(q)
            if g.kind in TWO_QUBIT_GATES and not g.targets[0].is_adjacent(g.targets[1]):
                problems.append(
                    f"moment {m}: {g.kind} between non-adjacent "
                    f"{g.targets[0]} and {g.targets[1]}")
            if g.kind in PREPS:
                if g.targets[0] in live:
                    problems.append(f"moment {m}: prep on live qubit {g.targets[0]}")
            elif g.targets[0] not in live or (
                    len(g.targets) > 1 and g.targets[1] not in live):
                dead = [q for q in g.targets if q not in live]
                problems.append(f"moment {m}: {g.kind} on dead qubit(s) {dead}")
            if g.kind in MEASUREMENTS:
                if g.record_slot in written:
                    problems.append(
                        f"moment {m}: record slot {g.record_slot} written twice")
                elif not (0 <= g.record_slot < circuit.record_len):
                    problems.append(
                        f"moment {m}: record slot {g.record_slot} out of range")
                else:
                    written[g.record_slot] = m
            if g.condition is not None:
                if g.condition not in written:
                    problems.append(
                        f"moment {m}: condition reads unwritten slot {g.condition}")
        # apply births/deaths after scanning the moment
        for g in moment.gates:
            if g.kind in PREPS:
                live.add(g.targets[0])
            elif g.kind in MEASUREMENTS:
                live.discard(g.targets[0])

    if len(written) != circuit.record_len:
        problems.append(
            f"{circuit.record_len} record slots declared, {len(written)} written")
    for check in circuit.checks:
        for s in check.slots:
            if s not in written:
                problems.append(f"check {check.name!r} reads unwritten slot {s}")
    stages = [c.stage for c in circuit.checks]
    if stages != sorted(stages):
        problems.append("checks not in stage order")
    return problems


# -- text format -------------------------------------------------------
#
# One moment per line, gates separated by " ; ".  Grammar per gate:
#   KIND q(r,c)[,q(r,c)] [?recK] [->recK]
# CPauli is written as CPX or CPZ with a ?recK condition.  Lines starting
# with '#' are comments and blank lines are ignored; depth equals the
# number of non-comment lines.

_GATE_RE = re.compile(
    r"^(?P<kind>\w+)\s+(?P<targets>q\(\d+,\d+\)(?:,q\(\d+,\d+\))?)"
    r"(?:\s+\?rec(?P<cond>\d+))?(?:\s+->rec(?P<slot>\d+))?$")
_QUBIT_RE = re.compile(r"q\((\d+),(\d+)\)")


def circuit_to_text(circuit: Circuit) -> str:
    lines = []
    for moment in circuit.moments:
        parts = []
        for g in sorted(moment.gates, key=lambda g: g.targets[0].site):
            kind = {"X": "CPX", "Z": "CPZ"}[g.letter] if g.kind == "CPauli" else g.kind
            text = kind + " " + ",".join(f"q({q.row},{q.col})" for q in g.targets)
            if g.condition is not None:
                text += f" ?rec{g.condition}"
            if g.record_slot is not None:
                text += f" ->rec{g.record_slot}"
            parts.append(text)
        lines.append(" ; ".join(parts))
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str, layout: Iterable[GridQubit]) -> Circuit:
    site_to_qubit = {q.site: q for q in layout}
    moments: list[Moment] = []
    record_len = 0
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            continue
        gates = []
        for part in filter(None, (p.strip() for p in line.split(";"))):
            m = _GATE_RE.match(part)
            if not m:
                raise ValueError(f"cannot parse gate {part!r}")
            kind = m.group("kind")
            letter = ""
            if kind in ("CPX", "CPZ"):
                letter, kind = kind[-1], "CPauli"
            targets = tuple(site_to_qubit[(int(r), int(c))]
                            for r, c in _QUBIT_RE.findall(m.group("targets")))
            cond = int(m.group("cond")) if m.group("cond") else None
            slot = int(m.group("slot")) if m.group("slot") else None
            if slot is not None:
                record_len = max(record_len, slot + 1)
            gates.append(Gate(kind, targets, condition=cond, record_slot=slot,
                              letter=letter))
        moments.append(Moment(tuple(gates)))
    return Circuit(tuple(sorted(site_to_qubit.values())), moments, record_len, [])
