"""Stabilizer code definitions used by the distillation protocols.

Each CodeSpec carries a lattice layout, stabilizer generators, and one
logical X/Z pair.  Rotated surface codes are generated for odd d; the
abstract (r, c) data grid maps to physical sites via
(r, c) -> (r + c + r0, r - c + (d - 1) + c0) so face ancillas sit on
lattice sites Manhattan-adjacent to their data qubits.
"""
from __future__ import annotations

from dataclasses import dataclass

from .lattice import ANCILLA, DATA, GridQubit
from .pauli import PauliString


@dataclass(frozen=True)
class CodeSpec:
    name: str
    layout: tuple[GridQubit, ...]
    stabilizers: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    # face ancilla bookkeeping for syndrome circuits: {ancilla: (type, data...)}
    faces: tuple = ()

    @property
    def qubits(self) -> tuple[GridQubit, ...]:
        return self.layout

    def validate(self) -> list[str]:
        problems = []
        for i, a in enumerate(self.stabilizers):
            for b in self.stabilizers[i + 1:]:
                if not a.commutes(b):
                    problems.append(f"stabilizers {a} and {b} anticommute")
            if not self.logical_x.commutes(a):
                problems.append(f"logical X anticommutes with {a}")
            if not self.logical_z.commutes(a):
                problems.append(f"logical Z anticommutes with {a}")
        if self.logical_x.commutes(self.logical_z):
            problems.append("logical X and Z commute")
        return problems


def _ps(qubits, mapping, sign=1) -> PauliString:
    return PauliString.from_map(qubits, mapping, sign)


# -- Steane code --------------------------------------------------------

STEANE_X_SUPPORTS = ((0, 2, 4, 6), (0, 1, 4, 5), (0, 2, 3, 5))


def steane_code(sites: dict[int, GridQubit] | None = None) -> CodeSpec:
    """The 7-qubit CSS code with generators XIXIXIX, XXIIXXI, XIXXIXI
    and their Z counterparts; logicals are the transversal X/Z strings.

    ``sites`` optionally places qubit index i at a lattice site; the
    default is a straight row, role "data".
    """
    if sites is None:
        sites = {i: GridQubit(0, i, DATA) for i in range(7)}
    qubits = tuple(sites[i] for i in range(7))
    stabs = []
    for letter in "XZ":
        for support in STEANE_X_SUPPORTS:
            stabs.append(_ps(qubits, {sites[i]: letter for i in support}))
    return CodeSpec(
        name="steane",
        layout=qubits,
        stabilizers=tuple(stabs),
        logical_x=_ps(qubits, {q: "X" for q in qubits}),
        logical_z=_ps(qubits, {q: "Z" for q in qubits}),
    )


# Fano lines: weight-3 logical representatives (complements of generators).
STEANE_LINES = ((1, 3, 5), (2, 3, 6), (1, 4, 6), (0, 3, 4), (0, 1, 2),
                (0, 5, 6), (2, 4, 5))


# -- rotated surface codes ----------------------------------------------

def rotated_surface_face_table(d: int):
    """Abstract face table for the rotated code: list of
    (face_type, anchor (r, c), [data coords]) with Z faces where
    (r + c) is even.  Faces are the 2x2 windows anchored at
    (r, c) for r, c in [-1, d-1], trimmed to the grid; weight-2
    boundary faces are kept when their type matches the bulk pattern.
    """
    faces = []
    for r in range(-1, d):
        for c in range(-1, d):
            cells = [(r + dr, c + dc) for dr in (0, 1) for dc in (0, 1)
                     if 0 <= r + dr < d and 0 <= c + dc < d]
            ftype = "Z" if (r + c) % 2 == 0 else "X"
            if len(cells) == 4:
                faces.append((ftype, (r, c), cells))
            elif len(cells) == 2:
                # top/bottom edges host Z faces, left/right edges host X
                horiz = r in (-1, d - 1)
                if (horiz and ftype == "Z") or (not horiz and ftype == "X"):
                    faces.append((ftype, (r, c), cells))
    return faces


def rotated_embed(d: int, r0: int = 0, c0: int = 0):
    """Map abstract (r, c) to a physical lattice site."""
    def embed(r: float, c: float) -> tuple[int, int]:
        return (int(r + c) + 1 + r0, int(r - c) + (d - 1) + c0)
    return embed


def rotated_surface_code(d: int = 3, r0: int = 0, c0: int = 0) -> CodeSpec:
    if d % 2 == 0 or d < 3:
        raise ValueError("rotated code needs odd d >= 3")
    embed = rotated_embed(d, r0, c0)
    data = {(r, c): GridQubit(*embed(r, c), DATA)
            for r in range(d) for c in range(d)}
    qubits = tuple(data[(r, c)] for r in range(d) for c in range(d))
    stabs = []
    faces = []
    for ftype, (r, c), cells in rotated_surface_face_table(d):
        anc = GridQubit(*embed(r + 0.5, c + 0.5), ANCILLA)
        members = tuple(data[cell] for cell in cells)
        for q in members:
            assert anc.is_adjacent(q), (anc, q)
        stabs.append(_ps(qubits, {q: ftype for q in members}))
        faces.append((ftype, anc, members))
    logical_z = _ps(qubits, {data[(r, 0)]: "Z" for r in range(d)})
    logical_x = _ps(qubits, {data[(0, c)]: "X" for c in range(d)})
    return CodeSpec(
        name=f"rotated-d{d}",
        layout=qubits,
        stabilizers=tuple(stabs),
        logical_x=logical_x,
        logical_z=logical_z,
        faces=tuple(faces),
    )


# -- planar (unrotated) surface code, distance 3 -------------------------

def planar_surface_code(r0: int = 0, c0: int = 0) -> CodeSpec:
    """13-qubit planar d=3 patch: data on (i, j) with i + j even inside a
    5x5 window, X checks at even rows / odd cols, Z checks at odd rows /
    even cols.  Logical Z runs along the top row, logical X down the
    left column.
    """
    data = {(i, j): GridQubit(i + r0, j + c0, DATA)
            for i in range(5) for j in range(5) if (i + j) % 2 == 0}
    qubits = tuple(data[k] for k in sorted(data))
    stabs = []
    faces = []
    for i in range(5):
        for j in range(5):
            if (i + j) % 2 == 0:
                continue
            ftype = "X" if i % 2 == 0 else "Z"
            members = tuple(data[(a, b)]
                            for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1))
                            if (a, b) in data)
            anc = GridQubit(i + r0, j + c0, ANCILLA)
            stabs.append(_ps(qubits, {q: ftype for q in members}))
            faces.append((ftype, anc, members))
    logical_z = _ps(qubits, {data[(0, j)]: "Z" for j in (0, 2, 4)})
    logical_x = _ps(qubits, {data[(i, 0)]: "X" for i in (0, 2, 4)})
    return CodeSpec(
        name="planar-d3",
        layout=qubits,
        stabilizers=tuple(stabs),
        logical_x=logical_x,
        logical_z=logical_z,
        faces=tuple(faces),
    )


# -- six-qubit intermediate code (distance 2) -----------------------------

def six_qubit_code(sites: dict[int, GridQubit] | None = None) -> CodeSpec:
    """The distance-2 code reached from the Steane code by measuring
    qubit 6 in the X basis: two weight-4 X and Z stabilizers, one
    weight-3 X stabilizer, logical Z = Z1 Z3 Z5, logical X = X1 X4.
    """
    if sites is None:
        sites = {i: GridQubit(0, i, DATA) for i in range(6)}
    qubits = tuple(sites[i] for i in range(6))
    x_supports = ((0, 1, 4, 5), (0, 2, 3, 5), (0, 2, 4))
    z_supports = ((0, 1, 4, 5), (0, 2, 3, 5))
    stabs = [
        *(_ps(qubits, {sites[i]: "X" for i in s}) for s in x_supports),
        *(_ps(qubits, {sites[i]: "Z" for i in s}) for s in z_supports),
    ]
    return CodeSpec(
        name="six-qubit",
        layout=qubits,
        stabilizers=tuple(stabs),
        logical_x=_ps(qubits, {sites[1]: "X", sites[4]: "X"}),
        logical_z=_ps(qubits, {sites[i]: "Z" for i in (1, 3, 5)}),
    )


# -- 7-qubit cat state ----------------------------------------------------

def cat7_code(sites: list[GridQubit]) -> CodeSpec:
    """Stabilizers of (|0...0> + |1...1>)/sqrt(2) on seven sites:
    pairwise ZZ on consecutive members plus the global X string.
    The 'logical' operators complete the stabilizer set formally.
    """
    qubits = tuple(sites)
    if len(qubits) != 7:
        raise ValueError("cat state spans exactly 7 qubits")
    stabs = [_ps(qubits, {qubits[i]: "Z", qubits[i + 1]: "Z"}) for i in range(6)]
    stabs.append(_ps(qubits, {q: "X" for q in qubits}))
    return CodeSpec(
        name="cat7",
        layout=qubits,
        stabilizers=tuple(stabs[:-1]),
        logical_x=stabs[-1],
        logical_z=_ps(qubits, {qubits[0]: "Z"}),
    )
