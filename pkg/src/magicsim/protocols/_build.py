"""Circuit construction helpers shared by the protocol builders.

Gates are packed into moments as-soon-as-possible: each op lands in the
earliest moment after every involved site is free, subject to explicit
ordering barriers.  Published depth budgets are met by asserting the
packed depth and padding with idle moments when a build comes in short.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lattice import (ANCILLA, DATA, AcceptanceCheck, Circuit, Gate,
                       GridQubit, Moment)


class CircuitBuilder:
    def __init__(self):
        self._sites: dict[tuple[int, int], GridQubit] = {}
        self._gates: list[tuple[int, Gate]] = []
        self._next_free: dict[GridQubit, int] = {}
        self._live: set[GridQubit] = set()
        self._floor = 0
        self.record_len = 0
        self._slot_written: dict[int, int] = {}
        self.checks: list[AcceptanceCheck] = []
        self._stage = 0

    # -- sites ---------------------------------------------------------

    def q(self, row: int, col: int, role: str = DATA) -> GridQubit:
        site = (row, col)
        if site not in self._sites:
            self._sites[site] = GridQubit(row, col, role)
        return self._sites[site]

    def adopt(self, qubit: GridQubit) -> GridQubit:
        existing = self._sites.setdefault(qubit.site, qubit)
        if existing.role != qubit.role:
            raise ValueError(f"site {qubit.site} already used as {existing.role}")
        return existing

    # -- scheduling ------------------------------------------------------

    def _platform(self, qubits, after: int | None) -> int:
        t = self._floor if after is None else max(after, self._floor)
        for q in qubits:
            t = max(t, self._next_free.get(q, 0))
        return t

    def _emit(self, gate: Gate, after: int | None = None) -> int:
        t = self._platform(gate.targets, after)
        self._gates.append((t, gate))
        for q in gate.targets:
            self._next_free[q] = t + 1
        return t

    def barrier(self, qubits=None, at: int | None = None) -> int:
        """Force later ops on the given qubits (default: all) to start at
        or after the current frontier (or ``at``)."""
        qs = list(qubits) if qubits is not None else list(self._next_free)
        t = self.frontier(qs) if at is None else at
        for q in qs:
            self._next_free[q] = max(self._next_free.get(q, 0), t)
        return t

    def global_barrier(self) -> int:
        t = self.frontier()
        self._floor = max(self._floor, t)
        return t

    def frontier(self, qubits=None) -> int:
        pool = qubits if qubits is not None else self._next_free.keys()
        return max((self._next_free.get(q, 0) for q in pool), default=0)

    def hold(self, qubits, until: int) -> None:
        """Keep qubits idle through moment ``until``-1."""
        for q in qubits:
            self._next_free[q] = max(self._next_free.get(q, 0), until)

    # -- gates -----------------------------------------------------------

    def prep(self, qubit: GridQubit, basis: str = "Z", after=None) -> int:
        qubit = self.adopt(qubit)
        if qubit in self._live:
            raise ValueError(f"{qubit} prepared while live")
        self._live.add(qubit)
        return self._emit(Gate("PrepZ" if basis == "Z" else "PrepX", (qubit,)),
                          after)

    def gate1(self, kind: str, qubit: GridQubit, after=None) -> int:
        return self._emit(Gate(kind, (self.adopt(qubit),)), after)

    def cnot(self, control: GridQubit, target: GridQubit, after=None) -> int:
        control, target = self.adopt(control), self.adopt(target)
        if not control.is_adjacent(target):
            raise ValueError(f"CNOT between non-adjacent {control}, {target}")
        return self._emit(Gate("CNOT", (control, target)), after)

    def measure(self, qubit: GridQubit, basis: str = "Z", after=None
                ) -> tuple[int, int]:
        """Returns (record_slot, moment)."""
        qubit = self.adopt(qubit)
        slot = self.record_len
        self.record_len += 1
        kind = "MeasZ" if basis == "Z" else "MeasX"
        t = self._emit(Gate(kind, (qubit,), record_slot=slot), after)
        self._slot_written[slot] = t
        self._live.discard(qubit)
        return slot, t

    def cpauli(self, letter: str, qubit: GridQubit, condition: int,
               after=None) -> int:
        # a conditional Pauli must follow the measurement it reads
        floor = self._slot_written[condition] + 1
        after = floor if after is None else max(after, floor)
        return self._emit(
            Gate("CPauli", (self.adopt(qubit),), condition=condition,
                 letter=letter), after)

    def check(self, name: str, slots, predicate: str) -> None:
        self._stage += 1
        self.checks.append(
            AcceptanceCheck(name, tuple(slots), predicate, self._stage))

    # -- output ------------------------------------------------------------

    def build(self, pad_to: int | None = None) -> Circuit:
        depth = max((t for t, _ in self._gates), default=-1) + 1
        if pad_to is not None:
            if depth > pad_to:
                raise ValueError(f"packed depth {depth} exceeds budget {pad_to}")
            depth = pad_to
        moments = [[] for _ in range(depth)]
        for t, gate in self._gates:
            moments[t].append(gate)
        layout = tuple(sorted(self._sites.values()))
        circ = Circuit(
            layout,
            [Moment(tuple(sorted(ms, key=lambda g: (g.targets[0].site, g.kind))))
             for ms in moments],
            self.record_len,
            list(self.checks),
        )
        return circ


# -- one-bit teleportation move -------------------------------------------

def move(b: CircuitBuilder, src: GridQubit, dst: GridQubit,
         flavor: str = "Z") -> int:
    """Move a qubit state to an adjacent empty site; returns the record
    slot of the consumed measurement.  The conditional Pauli on the
    destination is a frame update.

    flavor "Z": prep |0>, CNOT src->dst, MeasX src, Z^m on dst.
    flavor "X": prep |+>, CNOT dst->src, MeasZ src, X^m on dst.
    """
    if flavor == "Z":
        b.prep(dst, "Z")
        b.cnot(src, dst)
        slot, _ = b.measure(src, "X")
        b.cpauli("Z", dst, slot)
    else:
        b.prep(dst, "X")
        b.cnot(dst, src)
        slot, _ = b.measure(src, "Z")
        b.cpauli("X", dst, slot)
    return slot


# -- GHZ growth --------------------------------------------------------------

def ghz_grow(b: CircuitBuilder, root: GridQubit,
             tree: list[tuple[GridQubit, GridQubit]],
             remove: list[GridQubit], anchor: GridQubit) -> None:
    """Grow a GHZ state along parent->child CNOT edges (listed in a valid
    growth order), then measure the ``remove`` members in the X basis with
    conditional-Z frame fixes on ``anchor``."""
    b.prep(root, "X")
    for parent, child in tree:
        b.prep(child, "Z")
        b.cnot(parent, child)
    for q in remove:
        slot, _ = b.measure(q, "X")
        b.cpauli("Z", anchor, slot)


def ghz_fuse(b: CircuitBuilder, u: GridQubit, v: GridQubit,
             fix_members) -> int:
    """Fuse the GHZ containing ``u`` with the GHZ containing ``v`` by
    CNOT u->v and a Z-basis readout of ``v`` (which is consumed).  On
    outcome 1 the second branch is flipped: conditional X on every
    remaining member of v's state."""
    b.cnot(u, v)
    slot, _ = b.measure(v, "Z")
    for q in fix_members:
        b.cpauli("X", q, slot)
    return slot


def directional(anc: GridQubit, members) -> list[GridQubit]:
    """Order face members N, W, E, S relative to the ancilla so that
    parallel faces capture without collisions."""
    def key(q: GridQubit):
        dr, dc = q.row - anc.row, q.col - anc.col
        return {(-1, 0): 0, (0, -1): 1, (0, 1): 2, (1, 0): 3}[(dr, dc)]
    return sorted(members, key=key)


# -- chained parity measurement ----------------------------------------------

@dataclass
class ChainOutcome:
    parity_slots: tuple[int, ...]  # XOR of these record bits = outcome
    head_moment: int
    kick_slots: tuple[int, ...] = ()  # deferred tail phase kicks


def chain_measure(b: CircuitBuilder, letter: str,
                  gathers: list[tuple[GridQubit, GridQubit]],
                  path: list[GridQubit], after=None,
                  defer_kicks: bool = False) -> ChainOutcome:
    """Measure a Z- or X-type parity over data qubits using an ancilla
    path (consecutive entries lattice-adjacent).  ``gathers`` pairs
    (ancilla_site, data_qubit).

    Z-type: |0> ancillas collect data parities by CNOT, tails fold into
    the head, the head is read out in Z, and the tail X-measurements are
    compensated by conditional-Z frame kicks on the data they carried.

    X-type: the path is grown into a small GHZ state, each ancilla fans
    CNOTs out onto its data, and every ancilla is read in X; the
    stabilizer value is the parity of all outcomes (Shor style).
    """
    ancs = [b.q(a.row, a.col, ANCILLA) for a in path]
    gathered: dict[GridQubit, list[GridQubit]] = {a: [] for a in ancs}
    for anc, data in gathers:
        gathered[b.q(anc.row, anc.col, ANCILLA)].append(data)
    if after is None and gathers and letter == "X":
        # prepare ancillas just in time for the first capture
        after = max(0, b.frontier([gathers[0][1]]) - 1)

    if letter == "Z":
        # process tail to head so each ancilla is prepared just in time,
        # folds toward the head as soon as it holds its parity, and
        # retires immediately after folding out
        carried: list[GridQubit] = []
        kicks = []
        for i in range(len(ancs) - 1, -1, -1):
            a = ancs[i]
            if i < len(ancs) - 1:
                # wait for the incoming fold; captures slot in afterwards
                ready = b.frontier([ancs[i + 1]])
            elif gathered[a]:
                ready = min(b.frontier([d]) for d in gathered[a])
            else:
                ready = 1
            t0 = max(0, ready - 1)
            if after is not None:
                t0 = max(t0, after)  # treat as a floor, keep JIT stagger
            b.prep(a, "Z", after=t0)
            for d in gathered[a]:
                b.cnot(d, a)
            if i < len(ancs) - 1:
                b.cnot(ancs[i + 1], a)
                carried = carried + gathered[ancs[i + 1]]
                mslot, _ = b.measure(ancs[i + 1], "X")
                kicks.append(mslot)
                if not defer_kicks:
                    for dq in carried:
                        b.cpauli("Z", dq, mslot)
        slot, t = b.measure(ancs[0], "Z")
        return ChainOutcome((slot,), t, tuple(kicks))

    # X-type, Shor style: GHZ ancilla, fan out, transversal X readout
    b.prep(ancs[0], "X", after=after)
    for prev, nxt in zip(ancs, ancs[1:]):
        b.prep(nxt, "Z", after=after)
        b.cnot(prev, nxt)
    for a in ancs:
        for d in gathered[a]:
            b.cnot(a, d)
    slots = []
    t = 0
    for a in ancs:
        slot, t = b.measure(a, "X")
        slots.append(slot)
    return ChainOutcome(tuple(slots), t)


def plus_measure(b: CircuitBuilder, letter: str, anc_site: tuple[int, int],
                 data: list[GridQubit], after=None) -> ChainOutcome:
    """Single-ancilla stabilizer measurement; data must all neighbor the
    ancilla site."""
    anc = b.q(anc_site[0], anc_site[1], ANCILLA)
    return chain_measure(b, letter, [(anc, d) for d in data], [anc],
                         after=after)
