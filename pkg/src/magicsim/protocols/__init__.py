"""Protocol builders: concrete distillation circuits with layouts,
acceptance checks, and Pauli-frame rules.

A Protocol bundles the circuit with everything a backend needs to grade
a shot: the target code patch, the variant of the non-Clifford rotation
("pi8" physical, "pi4" Clifford stand-in, "id" for calibration), the
fault-location census, and record-conditioned final corrections.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

from ..codes import CodeSpec
from ..lattice import Circuit
from ..noise import enumerate_locations
from ..pauli import PauliString


@dataclass(frozen=True)
class FrameRule:
    """Apply ``op`` to the final state iff parity(record[slots]) != offset."""
    slots: tuple[int, ...]
    op: PauliString
    offset: int = 0


@dataclass
class Protocol:
    name: str
    circuit: Circuit
    target: CodeSpec
    variant: str = "pi8"
    cap: int = 23
    frame_rules_full: tuple[FrameRule, ...] = ()
    slot_groups: dict = field(default_factory=dict)
    _locations: Optional[list] = None
    _reference: Optional[object] = None

    @property
    def locations(self):
        if self._locations is None:
            self._locations = enumerate_locations(self.circuit)
        return self._locations

    @property
    def frame_rules(self):
        """(slots, op, offset) triples consumed by the backends."""
        return [(r.slots, r.op, r.offset) for r in self.frame_rules_full]

    def with_variant(self, variant: str) -> "Protocol":
        out = replace(self, variant=variant, _locations=None, _reference=None)
        out.slot_groups = self.slot_groups
        return out

    def reference(self):
        from ..backend_tableau import build_reference
        if self._reference is None:
            self._reference = build_reference(
                self.circuit, seed=0xBA5E, variant=self.variant,
                locations=self.locations)
        return self._reference


def build(name: str, variant: str = "pi8") -> Protocol:
    """Build a protocol by name: rotated | planar | conversion."""
    if name == "rotated":
        from .rotated import build_rotated
        proto = _cached_rotated()
    elif name == "planar":
        from .planar import build_planar
        proto = _cached_planar()
    elif name == "conversion":
        from .conversion import build_conversion
        proto = _cached_conversion()
    else:
        raise ValueError(f"unknown protocol {name!r}")
    return proto if variant == proto.variant else proto.with_variant(variant)


@lru_cache(maxsize=1)
def _cached_rotated() -> Protocol:
    from .rotated import build_rotated
    return build_rotated()


@lru_cache(maxsize=1)
def _cached_planar() -> Protocol:
    from .planar import build_planar
    return build_planar()


@lru_cache(maxsize=1)
def _cached_conversion() -> Protocol:
    from .conversion import build_conversion
    return build_conversion()
