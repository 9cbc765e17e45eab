"""Dense state-vector backend with ancilla slot reuse.

Qubits are attached to simulator axes when prepared and detached when
measured, so the live tensor only ever spans the currently-live sites.
Measurement outcomes are decided by per-record-slot coins derived from
the shot seed, which makes runs reproducible and invariant under slot
reuse and gate reordering.

Pauli faults from a FaultSample are injected at their census locations;
the backend itself never samples noise channels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .codes import CodeSpec
from .lattice import Circuit, GridQubit, MEASUREMENTS, PREPS
from .noise import FaultLocation, FaultSample
from .pauli import PauliString

NORM_TOL = 1e-10
FIDELITY_TOL = 1e-9
PROJ_EPS = 1e-12

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_SDG = _S.conj()


def rotation_a(theta: float) -> np.ndarray:
    """The distillation rotation: maps |+> to cos(t)|0> + sin(t)|1>."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


VARIANT_ANGLE = {"pi8": math.pi / 8, "pi4": math.pi / 4, "id": 0.0}

_FIXED_1Q = {"H": _H, "X": _X, "Y": _Y, "Z": _Z, "S": _S, "Sdg": _SDG}


def ideal_input_state(variant: str) -> np.ndarray:
    """1-qubit state the protocol is meant to distill, A|+>."""
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
    return rotation_a(VARIANT_ANGLE[variant]) @ plus


@dataclass
class ShotResult:
    accepted: bool
    rejecting_stage: Optional[str]
    fidelity: Optional[float]
    logical_error: bool
    residual_detected: bool = False
    peak_width: int = 0
    record: Optional[tuple[int, ...]] = None


class SlotExhausted(RuntimeError):
    pass


class StateVector:
    """Live-qubit tensor with site -> axis bookkeeping."""

    def __init__(self, cap: int = 23):
        self.cap = cap
        self.state = np.ones((), dtype=complex)
        self.axis: dict[GridQubit, int] = {}
        self.peak = 0

    @property
    def n(self) -> int:
        return self.state.ndim

    def alloc(self, q: GridQubit, basis: str) -> None:
        if q in self.axis:
            raise ValueError(f"{q} already live")
        if self.n + 1 > self.cap:
            raise SlotExhausted(
                f"allocating {q} would exceed simulator cap {self.cap}")
        out = np.empty(self.state.shape + (2,), dtype=complex)
        _kernels.grow(self.state.reshape(-1), self.state.size,
                      basis == "X", out.reshape(-1))
        self.state = out
        self.axis[q] = self.n - 1
        self.peak = max(self.peak, self.n)

    def _split(self, q: GridQubit) -> np.ndarray:
        """View of the state as (left, 2, right) around q's axis."""
        ax = self.axis[q]
        shape = self.state.shape
        left = int(np.prod(shape[:ax], dtype=np.int64)) if ax else 1
        right = int(np.prod(shape[ax + 1:], dtype=np.int64)) if ax < self.n - 1 else 1
        return self.state.reshape(left, 2, right)

    def _factor(self, ax: int) -> tuple[int, int]:
        shape = self.state.shape
        left = int(np.prod(shape[:ax], dtype=np.int64)) if ax else 1
        right = int(np.prod(shape[ax + 1:], dtype=np.int64)) \
            if ax < self.n - 1 else 1
        return left, right

    def apply_1q(self, matrix: np.ndarray, q: GridQubit) -> None:
        left, right = self._factor(self.axis[q])
        _kernels.apply_1q(self.state.reshape(-1), left, right,
                          complex(matrix[0, 0]), complex(matrix[0, 1]),
                          complex(matrix[1, 0]), complex(matrix[1, 1]))

    def apply_cnot(self, control: GridQubit, target: GridQubit) -> None:
        c, t = self.axis[control], self.axis[target]
        a1, a2 = (c, t) if c < t else (t, c)
        shape = self.state.shape
        left = int(np.prod(shape[:a1], dtype=np.int64)) if a1 else 1
        mid = int(np.prod(shape[a1 + 1:a2], dtype=np.int64)) if a2 > a1 + 1 else 1
        right = int(np.prod(shape[a2 + 1:], dtype=np.int64)) \
            if a2 < self.n - 1 else 1
        _kernels.apply_cnot(self.state.reshape(-1), left, mid, right, c < t)

    def apply_pauli(self, letters: Sequence[str], qubits: Sequence[GridQubit]) -> None:
        for letter, q in zip(letters, qubits):
            if letter == "X":
                self.apply_1q(_X, q)
            elif letter == "Y":
                self.apply_1q(_Y, q)
            elif letter == "Z":
                self.apply_1q(_Z, q)

    def prob_one(self, q: GridQubit) -> float:
        left, right = self._factor(self.axis[q])
        w0, w1 = _kernels.branch_weights(self.state.reshape(-1), left, right)
        return w1 / (w0 + w1)

    def collapse(self, q: GridQubit, outcome: int) -> None:
        """Project onto |outcome> and release the axis."""
        ax = self.axis.pop(q)
        left, right = self._factor(ax)
        w = _kernels.branch_weights(self.state.reshape(-1), left, right)[outcome]
        if w < 1e-24:
            raise RuntimeError("collapse onto zero-probability branch")
        shape = self.state.shape[:ax] + self.state.shape[ax + 1:]
        out = np.empty(shape, dtype=complex)
        _kernels.collapse(self.state.reshape(-1), left, right, outcome,
                          1.0 / math.sqrt(w), out.reshape(-1))
        self.state = out
        for other, a in self.axis.items():
            if a > ax:
                self.axis[other] = a - 1

    def measure(self, q: GridQubit, basis: str, coin: float) -> int:
        if basis == "X":
            self.apply_1q(_H, q)
        p1 = self.prob_one(q)
        outcome = 1 if coin < p1 else 0
        self.collapse(q, outcome)
        return outcome

    def norm(self) -> float:
        return float(np.linalg.norm(self.state))

    def check_norm(self) -> None:
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise RuntimeError(f"state norm drifted: {self.norm()}")


def _slot_coin(seed: int, slot: int) -> float:
    return float(np.random.default_rng(
        np.random.SeedSequence((seed, 0x5EED, slot))).random())


def _index_faults(locations: Sequence[FaultLocation], faults: FaultSample):
    from .noise import index_faults
    return index_faults(locations, faults)


def run_circuit(circuit: Circuit, locations: Sequence[FaultLocation],
                faults: FaultSample, seed: int, variant: str = "pi8",
                cap: int = 23, sv: StateVector | None = None,
                checks_enabled: bool = True,
                forced_outcomes: dict[int, int] | None = None):
    """Execute a circuit, returning (state, record, rejecting_check).

    Stops early when a staged acceptance check fails.  ``forced_outcomes``
    overrides the coin for chosen record slots (used by branch sweeps).
    """
    theta = VARIANT_ANGLE[variant]
    mat_a = rotation_a(theta)
    by_gate, by_idle = _index_faults(locations, faults)
    sv = sv or StateVector(cap)
    record: list[int] = [-1] * circuit.record_len
    checks = sorted(circuit.checks, key=lambda c: c.stage)
    next_check = 0

    for m, moment in enumerate(circuit.moments):
        for gi, g in enumerate(moment.gates):
            key = (m, gi)
            if g.kind in PREPS:
                sv.alloc(g.targets[0], "Z" if g.kind == "PrepZ" else "X")
            elif g.kind in MEASUREMENTS:
                for letters, qs in by_gate.get(key, ()):  # noise precedes readout
                    sv.apply_pauli(letters, qs)
                slot = g.record_slot
                if forced_outcomes and slot in forced_outcomes:
                    coin = 1.0 - forced_outcomes[slot]  # force via extreme coin
                else:
                    coin = _slot_coin(seed, slot)
                record[slot] = sv.measure(
                    g.targets[0], "Z" if g.kind == "MeasZ" else "X", coin)
                continue
            elif g.kind == "CPauli":
                if record[g.condition] == 1:
                    sv.apply_pauli((g.letter,), g.targets)
            elif g.kind == "CNOT":
                sv.apply_cnot(*g.targets)
            elif g.kind == "A":
                sv.apply_1q(mat_a, g.targets[0])
            elif g.kind == "Adg":
                sv.apply_1q(mat_a.conj().T, g.targets[0])
            else:
                sv.apply_1q(_FIXED_1Q[g.kind], g.targets[0])
            for letters, qs in by_gate.get(key, ()):
                sv.apply_pauli(letters, qs)
        for q in sorted(sv.axis, key=lambda q: q.site):
            for letters, qs in by_idle.get((m, q), ()):
                sv.apply_pauli(letters, qs)
        if checks_enabled:
            while next_check < len(checks):
                check = checks[next_check]
                if any(record[s] < 0 for s in check.slots):
                    break
                if not check.evaluate(record):
                    return sv, record, check
                next_check += 1
    sv.check_norm()
    return sv, record, None


def project_codespace(sv: StateVector, code: CodeSpec,
                      ideal: np.ndarray | None = None):
    """Apply the code-space projector and return (norm^2, fidelity).

    Fidelity is |<ideal|psi_proj>|^2 / ||psi_proj||^2 when an ideal state
    is given, else None.  The live qubits must be exactly the code's
    data qubits.
    """
    if set(sv.axis) != set(code.layout):
        raise ValueError("live qubits do not match the target code layout")
    psi = sv.state
    for stab in code.stabilizers:
        spsi = _apply_pauli_array(psi, stab, sv.axis)
        psi = (psi + spsi) / 2.0
    pnorm2 = float(np.vdot(psi, psi).real)
    if ideal is None or pnorm2 < PROJ_EPS:
        return pnorm2, None
    overlap = complex(np.vdot(ideal, psi))
    return pnorm2, float(abs(overlap) ** 2 / pnorm2)


def _apply_pauli_array(psi: np.ndarray, pauli: PauliString,
                       axis: dict[GridQubit, int]) -> np.ndarray:
    out = psi
    for q in pauli.support():
        letter = pauli.letter(q)
        mat = {"X": _X, "Y": _Y, "Z": _Z}[letter]
        ax = axis[q]
        out = np.moveaxis(np.tensordot(out, mat, axes=([ax], [1])), -1, ax)
    if pauli.sign < 0:
        out = -out
    return out


def logical_basis(code: CodeSpec, axis: dict[GridQubit, int]):
    """Return (|0>_L, |1>_L) arrays over the given axis assignment."""
    n = len(code.layout)
    shape = (2,) * n
    zero = np.zeros(shape, dtype=complex)
    zero[(0,) * n] = 1.0
    for stab in code.stabilizers:
        zero = (zero + _apply_pauli_array(zero, stab, axis)) / 2.0
    zero /= np.linalg.norm(zero)
    one = _apply_pauli_array(zero, code.logical_x, axis)
    one /= np.linalg.norm(one)
    return zero, one


def ideal_logical_state(code: CodeSpec, axis: dict[GridQubit, int],
                        amplitudes: np.ndarray) -> np.ndarray:
    zero, one = logical_basis(code, axis)
    psi = amplitudes[0] * zero + amplitudes[1] * one
    return psi / np.linalg.norm(psi)


def run_shot(protocol, faults: FaultSample, seed: int,
             forced_outcomes: dict[int, int] | None = None) -> ShotResult:
    """Full protocol shot: execute, check, frame-correct, project, grade."""
    sv, record, failed = run_circuit(
        protocol.circuit, protocol.locations, faults, seed,
        variant=protocol.variant, cap=protocol.cap,
        forced_outcomes=forced_outcomes)
    if failed is not None:
        return ShotResult(False, failed.name, None, False,
                          peak_width=sv.peak)
    # record-conditioned corrections: surgery byproducts and split-time
    # stabilizer sign repairs
    for slots, op, offset in protocol.frame_rules:
        if (sum(record[s] for s in slots) + offset) % 2 == 1:
            sv.state = _apply_pauli_array(sv.state, op, sv.axis)
    ideal = ideal_logical_state(
        protocol.target, sv.axis, ideal_input_state(protocol.variant))
    pnorm2, fidelity = project_codespace(sv, protocol.target, ideal)
    if pnorm2 < PROJ_EPS:
        # state entirely outside the code space: the error is detectable
        # downstream, so it is excluded from the logical error count
        return ShotResult(True, None, 0.0, False, residual_detected=True,
                          peak_width=sv.peak, record=tuple(record))
    logical_error = (1.0 - fidelity) > FIDELITY_TOL
    return ShotResult(True, None, fidelity, logical_error,
                      peak_width=sv.peak, record=tuple(record))
