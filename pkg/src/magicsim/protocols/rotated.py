"""Distillation with teleportation into the rotated d=3 surface code.

Stages: non-fault-tolerant encoding of the rotated input into the
7-qubit code on a staircase chain, a 7-qubit cat state grown through
connector sites, the transversal controlled-Hadamard test, repositioning
of two chain qubits, a two-round lattice-surgery merge measuring the
joint logical ZZ through three weight-2 boundary faces (the first round
doubles as the patch gauge round), post-merge Z-syndrome checks, and a
transversal X readout completing the teleportation.  Physical depth: 25.
"""
from __future__ import annotations

import numpy as np

from ..codes import rotated_embed, rotated_surface_code
from ..lattice import DATA, GridQubit
from . import FrameRule, Protocol
from ._build import (CircuitBuilder, chain_measure, directional, move,
                     plus_measure)
from ._frames import (fit_affine, faulted_samples, noiseless_samples,
                      stabilizer_flipper)
from .encoder import CHAIN_LABELS_ROT

DEPTH_BUDGET = 25
CAP = 23

# frozen encoder for the rotated chain labeling (see encoder.synthesize)
ENC_INPUT_POS = 4
ENC_PIVOTS = (1, 5, 6)
ENC_CNOTS = ((5, 4), (4, 3), (1, 2), (1, 0), (6, 5), (2, 3), (4, 5), (3, 2),
             (5, 4), (6, 5), (4, 3), (2, 1), (3, 2), (5, 4), (4, 5), (6, 5))

# Steane X generator supports in qubit labels
GEN_SUPPORTS = ((0, 2, 4, 6), (0, 1, 4, 5), (0, 2, 3, 5))


def derive_rules(circuit, target, candidates, readout_slots, label_to_pos,
                 builder=None, check_prefix="steane-x", locations=None):
    """Fit X-readout check companions and all frame rules.

    Noiseless Clifford samples pin the functions; accepted single-fault
    samples are added so a degenerate noiseless-equivalent representation
    that misfires under faults cannot be selected.
    """
    stabs = list(target.stabilizers)
    rec4, val4 = noiseless_samples(circuit, "pi4", stabs + [target.logical_z])
    rec0, val0 = noiseless_samples(circuit, "id", stabs + [target.logical_x])
    if locations is not None:
        frec, fval = faulted_samples(circuit, "pi4",
                                     stabs + [target.logical_z], locations)
        rec4f = np.vstack([rec4, frec])
        val4f = np.vstack([val4.astype(np.int8), fval])
    else:
        rec4f, val4f = rec4, val4.astype(np.int8)

    checks = []
    for gi, support in enumerate(GEN_SUPPORTS):
        slots = [readout_slots[label_to_pos[lab]] for lab in support]
        tgt4 = (rec4[:, slots].sum(axis=1) % 2).astype(np.uint8)
        extra, offset = fit_affine(rec4, tgt4, candidates)
        tgt0 = (rec0[:, slots].sum(axis=1) % 2).astype(np.uint8)
        extra0, offset0 = fit_affine(rec0, tgt0, candidates)
        assert (extra, offset) == (extra0, offset0), "variant-dependent check"
        check_slots = tuple(sorted(set(slots) ^ set(extra)))
        pred = "parity-even" if offset == 0 else "parity-odd"
        checks.append((f"{check_prefix}-g{gi+1}", check_slots, pred))
        if builder is not None:
            builder.check(checks[-1][0], check_slots, pred)

    rules = []
    for i in range(len(stabs)):
        slots, offset = fit_affine(rec4f, val4f[:, i], candidates)
        if slots or offset:
            rules.append(FrameRule(slots, stabilizer_flipper(target, i), offset))
    zslots, zoff = fit_affine(rec4f, val4f[:, len(stabs)], candidates)
    if zslots or zoff:
        rules.append(FrameRule(zslots, target.logical_x, zoff))
    xslots, xoff = fit_affine(rec0, val0[:, len(stabs)], candidates)
    if xslots or xoff:
        rules.append(FrameRule(xslots, target.logical_z, xoff))
    return rules, checks


def gauge_fixers(target):
    """For each Z face, a data qubit belonging to that face only."""
    z_faces = [(anc, members) for (t, anc, members) in target.faces if t == "Z"]
    fixers = []
    for anc, members in z_faces:
        others = [set(m) for a2, m in z_faces if a2 != anc]
        pick = [q for q in members if not any(q in o for o in others)]
        fixers.append((anc, sorted(pick)[0]))
    return fixers


def build_rotated(col0: int = 4, pad_to: int | None = DEPTH_BUDGET,
                  rest_delay: int = 0, far_delay: int = 4,
                  small_face_delay: int = 2, fr2_delay: int = 0,
                  gauge_delay: int = 2, corridor_delay: int = 2,
                  g_delay: int = 0, pr2_delay: int = 0) -> Protocol:
    b = CircuitBuilder()
    target = rotated_surface_code(3, r0=0, c0=col0 - 4)
    embed = rotated_embed(3, 0, col0 - 4)
    sdata = {q.site: q for q in target.layout}
    adata = {(r, c): sdata[embed(r, c)] for r in range(3) for c in range(3)}
    for q in target.layout:
        b.adopt(q)

    def site(r, c, role=DATA):
        return b.q(r, c + col0, role)

    # Steane chain (encode + Hadamard-test positions), position 0..6
    chain = [site(*rc) for rc in
             [(1, 0), (1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (2, 3)]]
    # cat members paired with chain positions; only the sandwiched
    # position-2 partner occupies a purple ancilla site
    cat = [site(*rc) for rc in
           [(0, 0), (0, 1), (2, 0), (1, 2), (4, 2), (4, 3), (2, 4)]]
    conn = {name: site(*rc) for name, rc in {
        "c03": (0, -1), "c06": (0, 2), "c13": (1, -1), "c23": (2, -1),
        "c34": (3, 0), "c17": (1, 3), "c18": (1, 4),
        "c44": (4, 0), "c45": (4, 1),
    }.items()}

    # -- encode the rotated input into the chain --------------------------
    for pos, q in enumerate(chain):
        b.prep(q, "X" if pos == ENC_INPUT_POS or pos in ENC_PIVOTS else "Z")
    b.gate1("A", chain[ENC_INPUT_POS])
    for c, t in ENC_CNOTS:
        b.cnot(chain[c], chain[t])

    # -- grow the cat state -------------------------------------------------
    # two trees fused by one measurement: the northern tree reaches the
    # movers' partners early, the southern one covers the far members.
    # Connector removals leave only branch phases, so their X-measurement
    # bits are folded into the Hadamard-test parity check; the fusion
    # outcome needs a real conditional X on the southern members.
    connectors = set(conn.values())
    trims = []

    def grow(root, edges):
        b.prep(root, "X")
        last_use = {}
        for parent, child in edges:
            last_use[parent] = child
        for parent, child in edges:
            b.prep(child, "Z", after=b.frontier([parent]) - 1)
            b.cnot(parent, child)
            if parent in connectors and last_use.get(parent) is child:
                slot, _ = b.measure(parent, "X")
                trims.append(slot)

    grow(cat[1], [
        (cat[1], cat[0]), (cat[1], conn["c06"]),
        (conn["c06"], cat[3]), (cat[3], conn["c17"]),
        (conn["c17"], conn["c18"]), (conn["c18"], cat[6]),
        (cat[0], conn["c03"]), (conn["c03"], conn["c13"]),
        (conn["c13"], conn["c23"]), (conn["c23"], cat[2]),
    ])
    grow(conn["c45"], [
        (conn["c45"], cat[4]), (cat[4], cat[5]),
        (conn["c45"], conn["c44"]), (conn["c44"], conn["c34"]),
    ])
    b.cnot(cat[2], conn["c34"])
    fuse_slot, _ = b.measure(conn["c34"], "Z")
    for q in (cat[4], cat[5]):
        b.cpauli("X", q, fuse_slot)

    # -- Hadamard test --------------------------------------------------------
    cat_slots = []
    for pos, q in enumerate(chain):
        b.gate1("Adg", q)
        b.cnot(cat[pos], q)
        b.gate1("A", q)
    for pos in range(7):
        slot, _ = b.measure(cat[pos], "X")
        cat_slots.append(slot)

    # -- reposition two qubits; the merge edge stays in place ------------------
    formation = {0: chain[0], 2: chain[2], 4: chain[4], 5: chain[5],
                 6: chain[6]}
    move_slots = [move(b, chain[1], cat[1], "Z"),
                  move(b, chain[3], cat[3], "Z")]
    formation[1] = cat[1]
    formation[3] = cat[3]

    # -- surface |+>_L patch --------------------------------------------------
    # seam qubits join as their sites clear; the rest are held so the
    # simulator stays within its slot budget
    seam = [adata[(r, 0)] for r in range(3)]
    t_seam = max(b.frontier([q]) for q in seam)
    for q in seam:
        b.hold([q], t_seam)
        b.prep(q, "X")
    far = {adata[(0, 2)], adata[(1, 2)], adata[(2, 1)], adata[(2, 2)]}
    for q in target.layout:
        if q not in seam:
            b.hold([q], t_seam + (far_delay if q in far else rest_delay))
            b.prep(q, "X")

    # -- merge: purple rounds threaded through two surface face rounds ---------
    z_faces = [(anc, directional(anc, members_))
               for (t, anc, members_) in target.faces if t == "Z"]
    seam_set = set(seam)
    # classic sandwich: every patch qubit's first Z capture is its face
    # gauge round, purple pairs cover the merge windows, and the two
    # seam-touching faces get a confirming repeat round; the other faces
    # are gauge-only (errors before their only round are no-ops on |+>,
    # errors after leave excluded detectable residuals)
    repeat_faces = [i for i, (anc, ms) in enumerate(z_faces)
                    if seam_set & set(ms)]
    purple = [
        (site(1, -1), adata[(0, 0)], formation[0]),
        (site(2, 0), adata[(1, 0)], formation[2]),
        (site(3, 1), adata[(2, 0)], formation[4]),
    ]
    face_r = {1: [None] * len(z_faces), 2: [None] * len(z_faces)}
    purple_r = {1: [], 2: []}

    def purple_round(rnd, extra=0):
        for anc, sq, eq in purple:
            after = None
            if extra:
                after = max(0, b.frontier([sq]) - 1 + extra)
            out = plus_measure(b, "Z", anc.site, [sq, eq], after=after)
            purple_r[rnd].append(out.parity_slots[0])

    def face_round(rnd, faces, extra=0, lockstep=False):
        if lockstep:
            t0 = max(max(b.frontier([q]) for q in ms) for _a, ms
                     in z_faces) - 1 + extra
            ancs = {}
            for i in faces:
                anc, _ms = z_faces[i]
                a = b.q(anc.row, anc.col, anc.role)
                b.prep(a, "Z", after=max(0, t0))
                ancs[i] = a
            for step in range(4):
                for i in faces:
                    _anc, ms = z_faces[i]
                    if step < len(ms):
                        b.cnot(ms[step], ancs[i])
            for i in faces:
                slot, _ = b.measure(ancs[i], "Z")
                face_r[rnd][i] = slot
            return
        for i in faces:
            anc, members_ = z_faces[i]
            ms = sorted(members_, key=lambda q: (b.frontier([q]), q.site))
            after = None
            if extra:
                after = max(0, min(b.frontier([q]) for q in ms) - 1 + extra)
            out = plus_measure(b, "Z", anc.site, ms, after=after)
            face_r[rnd][i] = out.parity_slots[0]

    face_round(1, range(len(z_faces)))
    purple_round(1)
    purple_round(2, extra=pr2_delay)

    # -- post-merge Steane Z checks: three independent group elements ------
    # positions {0,1,2,3} and {2,3,4,6} as single-ancilla stars on the
    # vacated mover sites, and {1,3,5,6} through a north-east ancilla
    # corridor that drains as its fold passes
    tg = b.frontier([formation[1]]) - 1 + g_delay
    g1 = plus_measure(b, "Z", chain[1].site,
                      [formation[1], formation[3], formation[0], formation[2]],
                      after=tg)
    g2 = plus_measure(b, "Z", chain[3].site,
                      [formation[6], formation[3], formation[2], formation[4]],
                      after=tg)
    # the two adjacent tail qubits fold their Z parity together so a
    # single capture collects both; the fold is undone right after
    corridor = [site(0, 2), site(0, 3), site(1, 3)]
    b.cnot(formation[5], formation[6])
    t_corr = b.frontier([formation[6]]) - 1 + corridor_delay
    g3 = chain_measure(
        b, "Z",
        [(corridor[2], formation[6]),
         (corridor[0], formation[1]), (corridor[0], formation[3])],
        corridor, after=t_corr, defer_kicks=True)
    b.cnot(formation[5], formation[6])
    # confirming repeat round for the seam faces; the conditional gauge
    # fix is not a circuit operation -- the derived frame rules absorb it
    face_round(2, repeat_faces, extra=fr2_delay)

    # -- transversal X readout -----------------------------------------------------
    readout = {}
    for pos in range(7):
        slot, _ = b.measure(formation[pos], "X")
        readout[pos] = slot

    # -- staged checks ---------------------------------------------------------------
    b.check("hadamard-test", tuple(cat_slots) + tuple(trims), "parity-even")
    for k in range(3):
        b.check(f"merge-repeat-p{k+1}", (purple_r[1][k], purple_r[2][k]),
                "all-equal")

    for i in repeat_faces:
        b.check(f"surface-syndrome-f{i+1}", (face_r[1][i], face_r[2][i]),
                "all-equal")
    b.check("steane-z-g1", g1.parity_slots, "parity-even")
    b.check("steane-z-g2", g2.parity_slots, "parity-even")
    b.check("steane-z-g3", g3.parity_slots, "parity-even")

    label_to_pos = {lab: pos for pos, lab in enumerate(CHAIN_LABELS_ROT)}
    slot_groups = {
        "cat": tuple(cat_slots),
        "purple_r1": tuple(purple_r[1]),
        "purple_r2": tuple(purple_r[2]),
        "face_r1": tuple(s for s in face_r[1] if s is not None),
        "face_r2": tuple(s for s in face_r[2] if s is not None),
        "readout": tuple(readout[p] for p in range(7)),
        "moves": tuple(move_slots),
        "trims": tuple(trims),
        "kicks": tuple(g3.kick_slots),
    }
    candidates = sorted(set(slot_groups["purple_r1"])
                        | set(slot_groups["purple_r2"])
                        | set(slot_groups["face_r1"])
                        | set(slot_groups["face_r2"])
                        | set(slot_groups["readout"])
                        | set(slot_groups["kicks"]))

    circuit = b.build(pad_to=None)
    from ..noise import enumerate_locations
    rules, _ = derive_rules(circuit, target, candidates,
                            slot_groups["readout"], label_to_pos, builder=b,
                            locations=enumerate_locations(circuit))
    circuit = b.build(pad_to=pad_to)

    return Protocol(
        name="rotated",
        circuit=circuit,
        target=target,
        variant="pi8",
        cap=CAP,
        frame_rules_full=tuple(rules),
        slot_groups=slot_groups,
    )
