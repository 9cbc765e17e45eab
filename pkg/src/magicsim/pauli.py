"""Pauli strings over a fixed qubit register, with sign tracking.

Signs are restricted to {+1, -1}: when a product picks up a phase of
+-i (e.g. X*Z = -iY) we keep the letter and map the phase i^k to
+1 for k in {0, 1} and -1 for k in {2, 3}.  This is enough for
stabilizer bookkeeping because only commutation relations and +-1
eigenvalues are consumed downstream.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator with a +-1 sign.

    The register is an ordered tuple of hashable qubit labels; ``xs`` and
    ``zs`` are bitmasks indexed by register position (bit i = qubit i).
    """

    qubits: tuple
    xs: int
    zs: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    # -- construction ------------------------------------------------

    @classmethod
    def identity(cls, qubits: Sequence) -> "PauliString":
        return cls(tuple(qubits), 0, 0, 1)

    @classmethod
    def from_map(cls, qubits: Sequence, letters: Mapping, sign: int = 1) -> "PauliString":
        """Build from {qubit_label: letter}; unlisted qubits are I."""
        qubits = tuple(qubits)
        index = {q: i for i, q in enumerate(qubits)}
        xs = zs = 0
        for q, letter in letters.items():
            if q not in index:
                raise KeyError(f"qubit {q!r} not in register")
            x, z = _LETTER_TO_BITS[letter]
            xs |= x << index[q]
            zs |= z << index[q]
        return cls(qubits, xs, zs, sign)

    @classmethod
    def from_text(cls, qubits: Sequence, text: str, sign: int = 1) -> "PauliString":
        """Build from a letter string aligned with the register, e.g. 'XIXIXIX'."""
        qubits = tuple(qubits)
        if len(text) != len(qubits):
            raise ValueError("letter string length must match register size")
        xs = zs = 0
        for i, letter in enumerate(text):
            x, z = _LETTER_TO_BITS[letter]
            xs |= x << i
            zs |= z << i
        return cls(qubits, xs, zs, sign)

    # -- inspection --------------------------------------------------

    def letter(self, q) -> str:
        i = self.qubits.index(q)
        return _BITS_TO_LETTER[((self.xs >> i) & 1, (self.zs >> i) & 1)]

    def letters(self) -> str:
        return "".join(
            _BITS_TO_LETTER[((self.xs >> i) & 1, (self.zs >> i) & 1)]
            for i in range(len(self.qubits))
        )

    def support(self) -> tuple:
        mask = self.xs | self.zs
        return tuple(q for i, q in enumerate(self.qubits) if (mask >> i) & 1)

    def weight(self) -> int:
        return _popcount(self.xs | self.zs)

    def is_identity(self) -> bool:
        return self.xs == 0 and self.zs == 0

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.letters()

    # -- algebra -----------------------------------------------------

    def _check_register(self, other: "PauliString") -> None:
        if self.qubits != other.qubits:
            raise ValueError("PauliStrings defined over different registers")

    def mul(self, other: "PauliString") -> "PauliString":
        """Group product self*other with sign tracking.

        The i-phase exponent is computed per qubit from the X/Z
        decomposition (X^a Z^b convention, Y = iXZ) and then folded
        into a +-1 sign.
        """
        self._check_register(other)
        # Phase accounting in the (X^a Z^b, Y = i X Z) convention:
        #   normalizing both operands to X^a Z^b costs i^(a&b) each,
        #   commuting other's X past self's Z costs (-1)^(z1&x2),
        #   renormalizing the product costs i^-(a3&b3).
        x1, z1, x2, z2 = self.xs, self.zs, other.xs, other.zs
        x3, z3 = x1 ^ x2, z1 ^ z2
        k = _popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x3 & z3)
        k += 2 * _popcount(z1 & x2)
        k %= 4
        sign = self.sign * other.sign * (1 if k in (0, 1) else -1)
        return PauliString(self.qubits, x3, z3, sign)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return self.mul(other)

    def commutes(self, other: "PauliString") -> bool:
        """True iff the symplectic product is even."""
        self._check_register(other)
        overlap = _popcount(self.xs & other.zs) + _popcount(self.zs & other.xs)
        return overlap % 2 == 0

    def negate(self) -> "PauliString":
        return PauliString(self.qubits, self.xs, self.zs, -self.sign)

    def restricted(self, qubits: Sequence) -> "PauliString":
        """Restriction to a sub-register (other qubits must be I)."""
        qubits = tuple(qubits)
        keep = {q: i for i, q in enumerate(qubits)}
        xs = zs = 0
        for i, q in enumerate(self.qubits):
            x, z = (self.xs >> i) & 1, (self.zs >> i) & 1
            if q in keep:
                xs |= x << keep[q]
                zs |= z << keep[q]
            elif x or z:
                raise ValueError(f"non-identity letter on dropped qubit {q!r}")
        return PauliString(qubits, xs, zs, self.sign)


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    return a.mul(b)


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)


# -- Clifford conjugation (for stabilizer-flow audits) -----------------

def conjugate_via_gate(p: PauliString, kind: str, targets: Sequence) -> PauliString:
    """Return U p U^dagger for the named Clifford gate.

    The "A" gate family is only Clifford in its quarter-turn variant;
    callers audit those circuits with kind="A4"/"A4dg".
    """
    idx = {q: i for i, q in enumerate(p.qubits)}
    ts = [idx[t] for t in targets]
    xs, zs, sign = p.xs, p.zs, p.sign

    def get(i):
        return (xs >> i) & 1, (zs >> i) & 1

    if kind == "H":
        (i,) = ts
        x, z = get(i)
        if x and z:
            sign = -sign  # Y -> -Y
        xs ^= (x ^ z) << i
        zs ^= (x ^ z) << i
    elif kind == "S":
        (i,) = ts
        x, z = get(i)
        if x and z:
            sign = -sign  # Y -> -X ... combined with zs flip below gives X sign
        zs ^= x << i  # X -> Y, Y -> X (with sign), Z -> Z
    elif kind == "Sdg":
        (i,) = ts
        x, z = get(i)
        if x and not z:
            sign = -sign  # X -> -Y
        zs ^= x << i
    elif kind in ("X", "Y", "Z"):
        (i,) = ts
        x, z = get(i)
        gx, gz = _LETTER_TO_BITS[kind]
        # sign flips iff the gate Pauli anticommutes with the letter here
        if (x & gz) ^ (z & gx):
            sign = -sign
    elif kind == "A4":
        # Conjugation by the quarter-turn about Y: X -> Z, Z -> -X, Y -> Y.
        (i,) = ts
        x, z = get(i)
        if z and not x:
            sign = -sign
        if x ^ z:
            xs ^= 1 << i
            zs ^= 1 << i
    elif kind == "A4dg":
        (i,) = ts
        x, z = get(i)
        if x and not z:
            sign = -sign  # X -> -Z
        if x ^ z:
            xs ^= 1 << i
            zs ^= 1 << i
    elif kind == "CNOT":
        c, t = ts
        xc, zc = get(c)
        xt, zt = get(t)
        # X_c -> X_c X_t, Z_t -> Z_c Z_t; sign flip for the Y*Y-ish corner
        if xc and zt and (xt == zc):
            sign = -sign
        xs ^= xc << t
        zs ^= zt << c
    else:
        raise ValueError(f"cannot conjugate through gate kind {kind!r}")
    return PauliString(p.qubits, xs, zs, sign)


class PauliFrame:
    """Accumulated Pauli correction driven by measurement records."""

    def __init__(self, qubits: Sequence):
        self.qubits = tuple(qubits)
        self.correction = PauliString.identity(self.qubits)
        self.log: list[tuple[int, PauliString]] = []

    def update(self, record_index: int, bit: int, conditional: PauliString) -> None:
        if conditional.qubits != self.qubits:
            raise ValueError("conditional defined over a different register")
        self.log.append((record_index, conditional))
        if bit:
            self.correction = self.correction * conditional


def frame_update(frame: PauliFrame, record_index: int, bit: int,
                 conditional: PauliString) -> PauliFrame:
    """Functional wrapper: returns a new frame with the update applied."""
    out = PauliFrame(frame.qubits)
    out.correction = frame.correction
    out.log = list(frame.log)
    out.update(record_index, bit, conditional)
    return out
