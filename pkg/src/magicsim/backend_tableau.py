"""Stabilizer backend: CHP tableau simulation, fast Pauli-frame shot
propagation against a noiseless reference run, and a small-distance
matching decoder for code expansion.

Only Clifford circuits run here; the quarter-turn variant of the "A"
gate is the Clifford map X -> Z, Z -> -X (realized as H then Z) and the
identity variant drops the gate entirely.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .codes import CodeSpec
from .lattice import Circuit, GridQubit, MEASUREMENTS, PREPS
from .noise import FaultLocation, FaultSample
from .pauli import PauliString


def _slot_coin_bit(seed: int, slot: int) -> int:
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xC0DE, slot)))
    return int(rng.integers(2))


class Tableau:
    """Aaronson-Gottesman stabilizer tableau over n qubits."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1          # destabilizers X_i
            self.z[n + i, i] = 1      # stabilizers Z_i

    # -- gates ---------------------------------------------------------

    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def sdg(self, q: int) -> None:
        self.s(q)
        self.z_gate(q)

    def x_gate(self, q: int) -> None:
        self.r ^= self.z[:, q]

    def y_gate(self, q: int) -> None:
        self.r ^= self.x[:, q] ^ self.z[:, q]

    def z_gate(self, q: int) -> None:
        self.r ^= self.x[:, q]

    def a4(self, q: int) -> None:
        """Quarter turn about Y: X -> Z, Z -> -X (matrix Z.H)."""
        self.h(q)
        self.z_gate(q)

    def a4dg(self, q: int) -> None:
        self.z_gate(q)
        self.h(q)

    def cnot(self, c: int, t: int) -> None:
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    # -- measurement -----------------------------------------------------

    def _rowsum(self, h: int, i: int) -> None:
        # phase exponent arithmetic from the CHP paper, vectorized mod 4
        x1, z1 = self.x[i].astype(np.int8), self.z[i].astype(np.int8)
        x2, z2 = self.x[h].astype(np.int8), self.z[h].astype(np.int8)
        g = x1 * z1 * (z2 - x2) + x1 * (1 - z1) * z2 * (2 * x2 - 1) \
            + (1 - x1) * z1 * x2 * (1 - 2 * z2)
        phase = (2 * int(self.r[h]) + 2 * int(self.r[i]) + int(g.sum())) % 4
        self.r[h] = phase // 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def measure_z(self, q: int, coin_bit: int) -> int:
        n = self.n
        stab_hits = np.flatnonzero(self.x[n:, q])
        if len(stab_hits):
            p = n + int(stab_hits[0])
            for i in np.flatnonzero(self.x[:, q]):
                if i != p:
                    self._rowsum(int(i), p)
            self.x[p - n] = self.x[p].copy()
            self.z[p - n] = self.z[p].copy()
            self.r[p - n] = self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, q] = 1
            self.r[p] = coin_bit
            return coin_bit
        # deterministic: accumulate stabilizer rows flagged by destabilizers
        sx = np.zeros(n, dtype=np.uint8)
        sz = np.zeros(n, dtype=np.uint8)
        acc_x, acc_z, acc_r = self.x, self.z, self.r
        scratch = _Scratch(sx, sz, 0)
        for i in np.flatnonzero(self.x[:n, q]):
            scratch.rowsum(acc_x[n + i], acc_z[n + i], acc_r[n + i])
        return scratch.r

    def measure_x(self, q: int, coin_bit: int) -> int:
        self.h(q)
        out = self.measure_z(q, coin_bit)
        self.h(q)
        return out

    def reset_z(self, q: int) -> None:
        out = self.measure_z(q, 0)
        if out:
            self.x_gate(q)

    def expectation(self, pauli: PauliString, index: dict) -> Optional[int]:
        """+1/-1 if the Pauli is (anti)stabilized, else None."""
        n = self.n
        sx = np.zeros(n, dtype=np.uint8)
        sz = np.zeros(n, dtype=np.uint8)
        for q in pauli.support():
            i = index[q]
            letter = pauli.letter(q)
            sx[i] = 1 if letter in "XY" else 0
            sz[i] = 1 if letter in "ZY" else 0
        # must commute with all stabilizers
        comm = (self.x[n:] @ sz + self.z[n:] @ sx) % 2
        if comm.any():
            return None
        scratch = _Scratch(np.zeros(n, np.uint8), np.zeros(n, np.uint8), 0)
        for i in range(n):
            if (self.x[i] @ sz + self.z[i] @ sx) % 2:
                scratch.rowsum(self.x[n + i], self.z[n + i], self.r[n + i])
        if not (np.array_equal(scratch.x, sx) and np.array_equal(scratch.z, sz)):
            return None
        sign = (-1) ** int(scratch.r)
        return sign * pauli.sign


class _Scratch:
    """Row accumulator reusing the CHP phase arithmetic."""

    def __init__(self, x, z, r):
        self.x, self.z, self.r = x, z, int(r)
        self._phase = 2 * int(r)

    def rowsum(self, x2, z2, r2) -> None:
        # incoming row is (x1, z1), accumulator is (x2, z2) in the CHP
        # phase function
        x1, z1 = x2.astype(np.int8), z2.astype(np.int8)
        xa, za = self.x.astype(np.int8), self.z.astype(np.int8)
        g = x1 * z1 * (za - xa) + x1 * (1 - z1) * za * (2 * xa - 1) \
            + (1 - x1) * z1 * xa * (1 - 2 * za)
        self._phase = (self._phase + 2 * int(r2) + int(g.sum())) % 4
        self.x ^= x2
        self.z ^= z2
        self.r = self._phase // 2


# -- direct noisy tableau execution --------------------------------------

def run_circuit_tableau(circuit: Circuit, locations: Sequence[FaultLocation],
                        faults: FaultSample, seed: int, variant: str = "pi4"):
    """Gate-by-gate tableau run with explicit fault injection.  Returns
    (tableau, record, index, rejecting_check)."""
    from .noise import index_faults
    if variant not in ("pi4", "id"):
        raise ValueError("tableau backend runs Clifford variants only")
    order = sorted(circuit.layout)
    index = {q: i for i, q in enumerate(order)}
    tab = Tableau(len(order))
    by_gate, by_idle = index_faults(locations, faults)
    record = [-1] * circuit.record_len

    def inject(letters, qubits):
        for letter, q in zip(letters, qubits):
            i = index[q]
            if letter == "X":
                tab.x_gate(i)
            elif letter == "Y":
                tab.y_gate(i)
            elif letter == "Z":
                tab.z_gate(i)

    checks = sorted(circuit.checks, key=lambda c: c.stage)
    next_check = 0
    for m, moment in enumerate(circuit.moments):
        for gi, g in enumerate(moment.gates):
            key = (m, gi)
            i = index[g.targets[0]]
            if g.kind in PREPS:
                tab.reset_z(i)
                if g.kind == "PrepX":
                    tab.h(i)
            elif g.kind in MEASUREMENTS:
                for letters, qs in by_gate.get(key, ()):
                    inject(letters, qs)
                coin = _slot_coin_bit(seed, g.record_slot)
                if g.kind == "MeasZ":
                    record[g.record_slot] = tab.measure_z(i, coin)
                else:
                    record[g.record_slot] = tab.measure_x(i, coin)
                continue
            elif g.kind == "CPauli":
                if record[g.condition] == 1:
                    inject((g.letter,), g.targets)
            elif g.kind == "CNOT":
                tab.cnot(i, index[g.targets[1]])
            elif g.kind == "A":
                if variant == "pi4":
                    tab.a4(i)
            elif g.kind == "Adg":
                if variant == "pi4":
                    tab.a4dg(i)
            elif g.kind == "H":
                tab.h(i)
            elif g.kind == "S":
                tab.s(i)
            elif g.kind == "Sdg":
                tab.sdg(i)
            elif g.kind == "X":
                tab.x_gate(i)
            elif g.kind == "Y":
                tab.y_gate(i)
            elif g.kind == "Z":
                tab.z_gate(i)
            for letters, qs in by_gate.get(key, ()):
                inject(letters, qs)
        for (mm, q), flist in by_idle.items():
            if mm == m:
                for letters, qs in flist:
                    inject(letters, qs)
        while next_check < len(checks):
            check = checks[next_check]
            if any(record[s] < 0 for s in check.slots):
                break
            if not check.evaluate(record):
                return tab, record, index, check
            next_check += 1
    return tab, record, index, None


# -- reference frame + Pauli propagation ----------------------------------

@dataclass
class ReferenceFrame:
    """Baseline record of one seeded noiseless run; shots carry XOR flips."""
    circuit: Circuit
    baseline: tuple[int, ...]
    seed: int


def build_reference(circuit: Circuit, seed: int, variant: str = "pi4",
                    locations=None) -> ReferenceFrame:
    locs = locations if locations is not None else []
    tab, record, _, failed = run_circuit_tableau(
        circuit, locs, FaultSample(()), seed, variant)
    if failed is not None:
        raise RuntimeError(
            f"noiseless reference run rejected at {failed.name}")
    if any(b < 0 for b in record):
        raise RuntimeError("reference run left unwritten record slots")
    return ReferenceFrame(circuit, tuple(record), seed)


class FrameShot:
    """Propagates a Pauli fault frame through the Clifford skeleton.

    Signs are irrelevant for flip bookkeeping, so the frame is two
    bitmask arrays indexed by qubit.
    """

    def __init__(self, circuit: Circuit, variant: str = "pi4"):
        self.order = sorted(circuit.layout)
        self.index = {q: i for i, q in enumerate(self.order)}
        self.circuit = circuit
        self.variant = variant

    def run(self, reference: ReferenceFrame, locations, faults: FaultSample):
        """Returns (flips, record, rejecting_check, frame_x, frame_z)."""
        from .noise import index_faults
        n = len(self.order)
        fx = np.zeros(n, dtype=np.uint8)
        fz = np.zeros(n, dtype=np.uint8)
        by_gate, by_idle = index_faults(locations, faults)
        baseline = reference.baseline
        circuit = self.circuit
        flips = np.zeros(circuit.record_len, dtype=np.uint8)
        record = [-1] * circuit.record_len
        checks = sorted(circuit.checks, key=lambda c: c.stage)
        next_check = 0
        index = self.index

        def inject(letters, qubits):
            for letter, q in zip(letters, qubits):
                i = index[q]
                if letter in ("X", "Y"):
                    fx[i] ^= 1
                if letter in ("Z", "Y"):
                    fz[i] ^= 1

        for m, moment in enumerate(circuit.moments):
            for gi, g in enumerate(moment.gates):
                key = (m, gi)
                i = index[g.targets[0]]
                if g.kind in PREPS:
                    fx[i] = fz[i] = 0
                elif g.kind in MEASUREMENTS:
                    for letters, qs in by_gate.get(key, ()):
                        inject(letters, qs)
                    slot = g.record_slot
                    flip = fx[i] if g.kind == "MeasZ" else fz[i]
                    flips[slot] = flip
                    record[slot] = baseline[slot] ^ flip
                    fx[i] = fz[i] = 0
                    continue
                elif g.kind == "CPauli":
                    if flips[g.condition]:
                        inject((g.letter,), g.targets)
                elif g.kind == "CNOT":
                    t = index[g.targets[1]]
                    fx[t] ^= fx[i]
                    fz[i] ^= fz[t]
                elif g.kind in ("A", "Adg"):
                    if self.variant == "pi4":
                        fx[i], fz[i] = fz[i], fx[i]
                elif g.kind == "H":
                    fx[i], fz[i] = fz[i], fx[i]
                elif g.kind in ("S", "Sdg"):
                    fz[i] ^= fx[i]
                # Pauli gates commute with the frame
                for letters, qs in by_gate.get(key, ()):
                    inject(letters, qs)
            for (mm, q), flist in by_idle.items():
                if mm == m:
                    for letters, qs in flist:
                        inject(letters, qs)
            while next_check < len(checks):
                check = checks[next_check]
                if any(record[s] < 0 for s in check.slots):
                    break
                if not check.evaluate(record):
                    return flips, record, check, fx, fz
                next_check += 1
        return flips, record, None, fx, fz


# -- shot-level API ---------------------------------------------------------

@dataclass
class TableauShotResult:
    accepted: bool
    rejecting_stage: Optional[str]
    logical_error: bool
    residual_detected: bool = False
    record: Optional[tuple[int, ...]] = None


def residual_verdict(frame_x, frame_z, index: dict, code: CodeSpec,
                     ideal_invariant: str) -> tuple[bool, bool]:
    """(logical_error, residual_detected) for a final Pauli frame.

    ``ideal_invariant`` names the logical classes that act trivially on
    the ideal state: "none" (pi8), "Z" (pi4, ideal |0>_L), or "X"
    (identity variant, ideal |+>_L).
    """
    def anticommutes(pauli: PauliString) -> bool:
        total = 0
        for q in pauli.support():
            i = index[q]
            letter = pauli.letter(q)
            px = 1 if letter in "XY" else 0
            pz = 1 if letter in "ZY" else 0
            total ^= (int(frame_x[i]) & pz) ^ (int(frame_z[i]) & px)
        return bool(total)

    for stab in code.stabilizers:
        if anticommutes(stab):
            return False, True
    has_x = anticommutes(code.logical_z)   # X_L component
    has_z = anticommutes(code.logical_x)   # Z_L component
    if ideal_invariant == "Z":
        return has_x, False
    if ideal_invariant == "X":
        return has_z, False
    return (has_x or has_z), False


def run_shot_clifford(protocol, faults: FaultSample,
                      reference: ReferenceFrame | None = None) -> TableauShotResult:
    """Fault-frame shot for the Clifford variant of a protocol."""
    if protocol.variant not in ("pi4", "id"):
        raise ValueError("pi8 protocols need the state-vector backend")
    reference = reference or protocol.reference()
    shot = FrameShot(protocol.circuit, protocol.variant)
    flips, record, failed, fx, fz = shot.run(
        reference, protocol.locations, faults)
    if failed is not None:
        return TableauShotResult(False, failed.name, False)
    # offsets cancel in flip space: only record deltas matter
    for slots, op, _offset in protocol.frame_rules:
        if sum(flips[s] for s in slots) % 2 == 1:
            for q in op.support():
                i = shot.index[q]
                if op.letter(q) in ("X", "Y"):
                    fx[i] ^= 1
                if op.letter(q) in ("Z", "Y"):
                    fz[i] ^= 1
    invariant = {"pi4": "Z", "id": "X"}[protocol.variant]
    logical, residual = residual_verdict(
        fx, fz, shot.index, protocol.target, invariant)
    return TableauShotResult(True, None, logical, residual, tuple(record))


# -- matching decoder -------------------------------------------------------

class Decoder:
    """Minimum-weight matching over a code's face graph, exact by
    exhaustive pairing (defect sets are small at desk scale)."""

    def __init__(self, code: CodeSpec, sector: str):
        """sector "Z" decodes X errors via Z faces; "X" the dual."""
        self.code = code
        self.sector = sector
        faces = [(anc, members) for (t, anc, members) in code.faces if t == sector]
        self.face_ids = {anc: i for i, (anc, _) in enumerate(faces)}
        self.face_members = [members for (_, members) in faces]
        # data qubit -> faces of this sector containing it
        touch: dict[GridQubit, list[int]] = {}
        for fi, members in enumerate(self.face_members):
            for q in members:
                touch.setdefault(q, []).append(fi)
        self.edges: dict[tuple[int, int], GridQubit] = {}
        self.boundary_edges: dict[int, GridQubit] = {}
        for q, fs in sorted(touch.items()):
            if len(fs) == 2:
                key = (min(fs), max(fs))
                self.edges.setdefault(key, q)
            elif len(fs) == 1:
                self.boundary_edges.setdefault(fs[0], q)
        self._dist, self._path = self._all_pairs()

    def _all_pairs(self):
        n = len(self.face_members)
        adj: dict[int, list[tuple[int, GridQubit]]] = {i: [] for i in range(n)}
        for (a, b), q in self.edges.items():
            adj[a].append((b, q))
            adj[b].append((a, q))
        INF = 10 ** 9
        dist = [[INF] * (n + 1) for _ in range(n + 1)]  # node n = boundary
        path: dict[tuple[int, int], tuple[GridQubit, ...]] = {}
        for s in range(n):
            dist[s][s] = 0
            path[(s, s)] = ()
            frontier = [s]
            while frontier:
                nxt = []
                for u in frontier:
                    for v, q in adj[u]:
                        if dist[s][u] + 1 < dist[s][v]:
                            dist[s][v] = dist[s][u] + 1
                            path[(s, v)] = path[(s, u)] + (q,)
                            nxt.append(v)
                nxt.sort()
                frontier = nxt
            if s in self.boundary_edges:
                dist[s][n] = 1
                path[(s, n)] = (self.boundary_edges[s],)
            for v in range(n):
                cand = dist[s][v] + (1 if v in self.boundary_edges else INF)
                if cand < dist[s][n]:
                    dist[s][n] = cand
                    path[(s, n)] = path[(s, v)] + (self.boundary_edges[v],)
        dist[len(self.face_members)][len(self.face_members)] = 0
        return dist, path

    def syndrome_of(self, error_qubits: Sequence[GridQubit]) -> tuple[int, ...]:
        bits = [0] * len(self.face_members)
        for q in error_qubits:
            for fi, members in enumerate(self.face_members):
                if q in members:
                    bits[fi] ^= 1
        return tuple(bits)

    def decode(self, syndrome: Sequence[int]) -> tuple[GridQubit, ...]:
        """Data qubits to flip; deterministic, minimum total weight."""
        defects = tuple(i for i, b in enumerate(syndrome) if b)
        if not defects:
            return ()
        pairing = self._best_pairing(defects)
        flipped: set[GridQubit] = set()
        for a, b in pairing:
            for q in self._path[(a, b)] if (a, b) in self._path else self._path[(b, a)]:
                flipped.symmetric_difference_update({q})
        return tuple(sorted(flipped))

    def _best_pairing(self, defects: tuple[int, ...]):
        boundary = len(self.face_members)
        from functools import lru_cache

        @lru_cache(maxsize=None)
        def best(remaining: tuple[int, ...]):
            if not remaining:
                return 0, ()
            a, rest = remaining[0], remaining[1:]
            # option: a goes to the boundary (covers "pair via boundary")
            cost_b, pairs_b = best(rest)
            best_cost = self._dist[a][boundary] + cost_b
            best_pairs = ((a, boundary),) + pairs_b
            for j, b in enumerate(rest):
                if self._dist[a][b] >= 10 ** 9:
                    continue
                sub = rest[:j] + rest[j + 1:]
                cost, pairs = best(sub)
                cost += self._dist[a][b]
                if cost < best_cost:
                    best_cost, best_pairs = cost, ((a, b),) + pairs
            return best_cost, best_pairs

        return best(tuple(sorted(defects)))[1]


def decode(code: CodeSpec, syndrome_bits: dict, sector: str = "Z") -> PauliString:
    """Static decode: syndrome {face_ancilla: bit} -> correction Pauli."""
    dec = Decoder(code, sector)
    ordered = [syndrome_bits.get(anc, 0)
               for (t, anc, _m) in code.faces if t == sector]
    qubits = dec.decode(ordered)
    letter = "X" if sector == "Z" else "Z"
    return PauliString.from_map(code.layout, {q: letter for q in qubits})
