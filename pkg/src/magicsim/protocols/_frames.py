"""Numeric derivation of frame rules and check companions.

Lattice-surgery byproducts (logical corrections, split-time stabilizer
sign repairs, parity-check gauge companions) are affine GF(2) functions
of the measurement record.  Rather than derive them by hand for every
layout, we sample noiseless Clifford runs of the circuit over many coin
seeds and solve for each function by Gaussian elimination, restricted to
a physically motivated candidate slot set.  The fits are exact (asserted
on held-out samples) and the fault-tolerance sweep validates them under
injected faults.
"""
from __future__ import annotations

import numpy as np

from ..backend_tableau import run_circuit_tableau
from ..codes import CodeSpec
from ..lattice import Circuit
from ..noise import FaultSample
from ..pauli import PauliString


def noiseless_samples(circuit: Circuit, variant: str, probe_ops,
                      n_samples: int = 96, seed0: int = 7700):
    """Run noiseless tableau shots; returns (records, values) where
    values[i][k] in {0, 1} encodes the sign of probe_ops[k]."""
    records, values = [], []
    for k in range(n_samples):
        tab, record, index, failed = run_circuit_tableau(
            circuit, [], FaultSample(()), seed0 + k, variant)
        if failed is not None:
            raise RuntimeError(f"noiseless run rejected at {failed.name}")
        row = []
        for op in probe_ops:
            e = tab.expectation(op, index)
            if e is None:
                raise RuntimeError(f"probe {op} not stabilized")
            row.append(0 if e > 0 else 1)
        records.append(record)
        values.append(row)
    return np.array(records, dtype=np.uint8), np.array(values, dtype=np.uint8)


def faulted_samples(circuit: Circuit, variant: str, probe_ops, locations,
                    seed0: int = 8800):
    """Accepted single-fault tableau shots for fit robustness.

    A frame rule must predict the needed correction on every accepted
    shot, so fitting over fault-reachable records removes noiseless-only
    degeneracies.  Probe entries are -1 where the operator is no longer
    stabilized (detectable residual; excluded from that probe's fit).
    """
    from .. import noise as _noise
    records, values = [], []
    for i, loc in enumerate(locations):
        reps = range(loc.n_paulis) if loc.kind == "gate2" else range(3)
        for which in reps:
            letters = _noise.PAULIS_2Q[which] if loc.kind == "gate2" \
                else (_noise.PAULIS_1Q[which],)
            fs = FaultSample(((i, letters),))
            tab, record, index, failed = run_circuit_tableau(
                circuit, locations, fs, seed0 + i, variant)
            if failed is not None:
                continue
            row = []
            for op in probe_ops:
                e = tab.expectation(op, index)
                row.append(-1 if e is None else (0 if e > 0 else 1))
            records.append(record)
            values.append(row)
    return np.array(records, dtype=np.uint8), np.array(values, dtype=np.int8)


def fit_affine(records: np.ndarray, target: np.ndarray,
               candidates: list[int]) -> tuple[tuple[int, ...], int]:
    """Solve target = offset + sum(record[slots]) over GF(2).

    Returns (slots, offset); raises if no exact solution exists over the
    candidate features.  Prefers small support (greedy pruning).  Rows
    with target < 0 are masked out.
    """
    keep = target >= 0
    records = records[keep]
    target = target[keep].astype(np.uint8)
    a = records[:, candidates].astype(np.uint8)
    cols = np.hstack([a, np.ones((len(a), 1), dtype=np.uint8)])
    sol = _gf2_solve(cols, target.astype(np.uint8))
    if sol is None:
        raise RuntimeError("no affine fit over candidate slots")
    # greedy minimization: try dropping features while staying consistent
    active = [i for i, b in enumerate(sol[:-1]) if b]
    offset = int(sol[-1])
    for i in list(active):
        trial = [j for j in active if j != i]
        pred = (a[:, trial].sum(axis=1) + offset) % 2
        if np.array_equal(pred.astype(np.uint8), target):
            active = trial
    slots = tuple(sorted(candidates[i] for i in active))
    pred = (records[:, list(slots)].sum(axis=1) + offset) % 2
    assert np.array_equal(pred.astype(np.uint8), target.astype(np.uint8))
    return slots, offset


def _gf2_solve(a: np.ndarray, b: np.ndarray):
    """One solution x of A x = b over GF(2), or None."""
    a = a.copy() % 2
    b = b.copy() % 2
    rows, cols = a.shape
    piv_col_of_row = []
    r = 0
    for c in range(cols):
        hit = None
        for rr in range(r, rows):
            if a[rr, c]:
                hit = rr
                break
        if hit is None:
            continue
        a[[r, hit]] = a[[hit, r]]
        b[[r, hit]] = b[[hit, r]]
        for rr in range(rows):
            if rr != r and a[rr, c]:
                a[rr] ^= a[r]
                b[rr] ^= b[r]
        piv_col_of_row.append(c)
        r += 1
        if r == rows:
            break
    for rr in range(r, rows):
        if b[rr]:
            return None
    x = np.zeros(cols, dtype=np.uint8)
    for row_i, c in enumerate(piv_col_of_row):
        x[c] = b[row_i]
    return x


def stabilizer_flipper(code: CodeSpec, which: int) -> PauliString:
    """A Pauli on the code qubits anticommuting with generator ``which``
    and commuting with every other generator and both logicals."""
    n = len(code.layout)
    ops = list(code.stabilizers) + [code.logical_x, code.logical_z]
    want = np.zeros(len(ops), dtype=np.uint8)
    want[which] = 1
    # unknowns: (x_q, z_q) bits; constraint rows: symplectic overlap parity
    rows = []
    for op in ops:
        row = np.zeros(2 * n, dtype=np.uint8)
        for i, q in enumerate(code.layout):
            letter = op.letter(q)
            ox = 1 if letter in "XY" else 0
            oz = 1 if letter in "ZY" else 0
            row[i] = oz        # x_q anticommutes with Z part
            row[n + i] = ox    # z_q anticommutes with X part
        rows.append(row)
    sol = _gf2_solve(np.array(rows, dtype=np.uint8), want)
    if sol is None:
        raise RuntimeError("no flipper found")
    letters = {}
    for i, q in enumerate(code.layout):
        x, z = int(sol[i]), int(sol[n + i])
        if x or z:
            letters[q] = "Y" if x and z else ("X" if x else "Z")
    return PauliString.from_map(code.layout, letters)
