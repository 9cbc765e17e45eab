"""Circuit-level depolarizing noise: location census and fault sampling.

Every physical 1-qubit gate is followed by 1-qubit depolarizing noise,
every CNOT by 2-qubit depolarizing noise, and every live-but-idle qubit
in a moment is treated as an identity gate followed by noise.
Preparations are followed by noise and measurements preceded by noise,
so measurement outcomes are fallible.  Classically controlled Paulis are
frame updates and draw no noise.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import Circuit, GridQubit, MEASUREMENTS, PREPS

PAULIS_1Q = ("X", "Y", "Z")
PAULIS_2Q = tuple((a, b) for a in ("I", "X", "Y", "Z")
                  for b in ("I", "X", "Y", "Z") if (a, b) != ("I", "I"))


@dataclass(frozen=True)
class NoiseModel:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")


@dataclass(frozen=True)
class FaultLocation:
    moment: int
    kind: str        # "gate1" | "gate2" | "prep" | "meas" | "idle"
    qubits: tuple[GridQubit, ...]
    gate_index: int  # index within the moment's gate tuple; -1 for idle

    @property
    def n_paulis(self) -> int:
        return 15 if self.kind == "gate2" else 3


@dataclass(frozen=True)
class FaultSample:
    """Pauli faults for one shot: (location_index, letters per qubit)."""
    faults: tuple[tuple[int, tuple[str, ...]], ...]

    def __len__(self):
        return len(self.faults)


def enumerate_locations(circuit: Circuit, model: NoiseModel | None = None
                        ) -> list[FaultLocation]:
    """Deterministic, ordered census of every noisy location."""
    locations: list[FaultLocation] = []
    live: set[GridQubit] = set()
    for m, moment in enumerate(circuit.moments):
        acted: set[GridQubit] = set()
        for gi, g in enumerate(moment.gates):
            if not g.is_physical:
                continue
            acted.update(g.targets)
            if g.kind in PREPS:
                locations.append(FaultLocation(m, "prep", g.targets, gi))
            elif g.kind in MEASUREMENTS:
                locations.append(FaultLocation(m, "meas", g.targets, gi))
            elif len(g.targets) == 2:
                locations.append(FaultLocation(m, "gate2", g.targets, gi))
            else:
                locations.append(FaultLocation(m, "gate1", g.targets, gi))
        for q in sorted(live - acted):
            locations.append(FaultLocation(m, "idle", (q,), -1))
        for g in moment.gates:
            if g.kind in PREPS:
                live.add(g.targets[0])
            elif g.kind in MEASUREMENTS:
                live.discard(g.targets[0])
    return locations


def _pauli_for(loc: FaultLocation, which: int) -> tuple[str, ...]:
    if loc.kind == "gate2":
        return PAULIS_2Q[which]
    return (PAULIS_1Q[which],)


def sample_faults(locations: Sequence[FaultLocation], model: NoiseModel,
                  rng: np.random.Generator) -> FaultSample:
    """Each location fails independently with probability p; a failing
    location draws a uniform non-identity Pauli."""
    n = len(locations)
    hits = np.flatnonzero(rng.random(n) < model.p)
    faults = []
    for i in hits:
        loc = locations[i]
        which = int(rng.integers(loc.n_paulis))
        faults.append((int(i), _pauli_for(loc, which)))
    return FaultSample(tuple(faults))


def sample_k_faults(locations: Sequence[FaultLocation], k: int,
                    rng: np.random.Generator) -> FaultSample:
    """Uniformly random k distinct locations, uniform non-identity Paulis."""
    n = len(locations)
    if k > n:
        raise ValueError(f"k={k} exceeds location count {n}")
    chosen = sorted(rng.choice(n, size=k, replace=False).tolist())
    faults = []
    for i in chosen:
        loc = locations[i]
        which = int(rng.integers(loc.n_paulis))
        faults.append((int(i), _pauli_for(loc, which)))
    return FaultSample(tuple(faults))


def all_single_faults(locations: Sequence[FaultLocation]):
    """Exhaustive (location_index, letters) generator for FT sweeps."""
    for i, loc in enumerate(locations):
        for which in range(loc.n_paulis):
            yield FaultSample(((i, _pauli_for(loc, which)),))


def shot_rng(master_seed: int, shot_index: int) -> np.random.Generator:
    """Independent per-shot generator derived from (master, shot)."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, shot_index)))


def index_faults(locations: Sequence[FaultLocation], faults: FaultSample):
    """Group sampled faults by (moment, gate_index); idle faults by
    (moment, site).  Shared by both backends."""
    by_gate: dict[tuple[int, int], list] = {}
    by_idle: dict[tuple[int, GridQubit], list] = {}
    for loc_index, letters in faults.faults:
        loc = locations[loc_index]
        if loc.kind == "idle":
            by_idle.setdefault((loc.moment, loc.qubits[0]), []).append(
                (letters, loc.qubits))
        else:
            by_gate.setdefault((loc.moment, loc.gate_index), []).append(
                (letters, loc.qubits))
    return by_gate, by_idle


def census_json(circuit: Circuit) -> list[dict]:
    """Location census in a JSON-friendly shape for audits."""
    return [
        {
            "index": i,
            "moment": loc.moment,
            "kind": loc.kind,
            "qubits": [[q.row, q.col] for q in loc.qubits],
        }
        for i, loc in enumerate(enumerate_locations(circuit))
    ]
