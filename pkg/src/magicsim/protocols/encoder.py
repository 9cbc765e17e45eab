"""Path-local synthesis of the non-fault-tolerant Steane encoder.

The seven code qubits sit on a lattice path (a chain or staircase).  In
the X-flip picture the encoder is a GF(2) linear map: the input qubit's
column must land in the logical-X coset and the three |+> pivot columns
must span the X-generator group, using only CNOTs between neighbours on
the path.  A deterministic beam search minimizes the ASAP-packed depth;
results for the two chain labelings in use are frozen below and
re-verified by tests.

Position-space data for a labeling L (position -> Steane index): a
generator with support S maps to positions {L^-1(s)}; the logical line
likewise.
"""
from __future__ import annotations

import itertools

# planar / conversion chain: position -> Steane qubit index
CHAIN_LABELS = (6, 2, 0, 4, 5, 1, 3)
GEN_POSITIONS = ((0, 1, 2, 3), (2, 3, 4, 5), (1, 2, 4, 6))
LINE_POSITIONS = (0, 2, 4)  # labels {6, 0, 5}

# rotated staircase chain: position -> Steane qubit index.  The three
# post-merge Z checks gather position sets {0,1,2,3}, {2,3,4,6} and
# {1,3,5,6}; all three generate the same group as GEN_POSITIONS_ROT.
CHAIN_LABELS_ROT = (6, 2, 4, 0, 1, 3, 5)
GEN_POSITIONS_ROT = ((0, 1, 2, 3), (2, 3, 4, 6), (1, 2, 4, 5))
LINE_POSITIONS_ROT = (0, 2, 4)  # labels {6, 4, 1}

# frozen synthesize() outputs, (input_pos, pivots, cnots); see tests
FROZEN: dict[str, tuple] = {}


def _bits(patt, n):
    v = 0
    for p in patt:
        v |= 1 << p
    return v


def _span(gens_bits):
    out = {0}
    for g in gens_bits:
        out |= {x ^ g for x in out}
    return out


def _popcount(x):
    return bin(x).count("1")


def makespan(cnots, ready=None, n: int = 7) -> int:
    """ASAP depth of a CNOT word on the path (both sites serialize)."""
    free = dict(ready or {})
    t_end = 0
    for c, t in cnots:
        t0 = max(free.get(c, 0), free.get(t, 0))
        free[c] = free[t] = t0 + 1
        t_end = max(t_end, t0 + 1)
    return t_end


def position_finish(cnots, n: int = 7) -> list[int]:
    """ASAP finish time of the last op touching each position."""
    free = [0] * n
    for c, t in cnots:
        t0 = max(free[c], free[t]) + 1
        free[c] = free[t] = t0
    return free


def synthesize(n: int = 7,
               gen_positions=GEN_POSITIONS,
               line=LINE_POSITIONS,
               max_len: int = 18,
               beam: int = 5000,
               depth_goal: int = 8) -> tuple[int, tuple[int, ...], tuple]:
    """Search for (input_position, pivots, cnot_sequence); deterministic.

    Acceptance: the input column lands in the logical-X coset and the
    pivot columns land on three independent group elements.  Among
    accepted words the lowest ASAP depth wins.
    """
    edges = [(i, i + 1) for i in range(n - 1)] + [(i + 1, i) for i in range(n - 1)]
    gens_bits = [_bits(g, n) for g in gen_positions]
    group = _span(gens_bits)
    coset = {x ^ _bits(line, n) for x in group}
    group_nz = sorted(group - {0})

    def accepted(cols):
        if cols[0] not in coset:
            return False
        if any(c not in group or c == 0 for c in cols[1:]):
            return False
        return len(_span(cols[1:])) == 8

    def heuristic(cols):
        h = min(_popcount(cols[0] ^ t) for t in coset)
        for c in cols[1:]:
            h += min(_popcount(c ^ t) for t in group_nz)
        return h

    best = None
    line_set = set(line)
    pivot_pool = [p for p in range(n) if p not in line_set]

    def consider(input_pos, pivots, word):
        nonlocal best
        d = makespan(word)
        if best is None or (d, len(word)) < (best[3], len(best[2])):
            best = (input_pos, pivots, word, d)

    for input_pos in line:
        for pivots in itertools.combinations(pivot_pool, 3):
            sources = (input_pos,) + pivots
            start = tuple(1 << s for s in sources)
            # state: cols -> (word, per-site free times tuple)
            frontier = {start: ((), (0,) * n)}
            for step in range(max_len + 1):
                for s, (w, _) in frontier.items():
                    if accepted(s):
                        consider(input_pos, pivots, w)
                if step == max_len:
                    break
                nxt: dict[tuple, tuple] = {}
                for state, (word, times) in frontier.items():
                    for (c, t) in edges:
                        cols = tuple(
                            v ^ (1 << t) if (v >> c) & 1 else v for v in state)
                        t0 = max(times[c], times[t]) + 1
                        ntimes = list(times)
                        ntimes[c] = ntimes[t] = t0
                        cand = (word + ((c, t),), tuple(ntimes))
                        old = nxt.get(cols)
                        if old is None or (max(cand[1]), len(cand[0])) < \
                                (max(old[1]), len(old[0])):
                            nxt[cols] = cand
                scored = sorted(
                    nxt.items(),
                    key=lambda kv: (heuristic(kv[0]), max(kv[1][1]),
                                    len(kv[1][0])))
                frontier = dict(scored[:beam])
            if best is not None and best[3] <= depth_goal:
                return best[:3]
    if best is None:
        raise RuntimeError("encoder synthesis failed")
    return best[:3]


def verify(input_pos: int, pivots, cnots, n: int = 7,
           gen_positions=GEN_POSITIONS, line=LINE_POSITIONS) -> bool:
    """Check a CNOT word: path-local, input column in the logical coset,
    pivot columns spanning the generator group."""
    gens_bits = [_bits(g, n) for g in gen_positions]
    group = _span(gens_bits)
    coset = {x ^ _bits(line, n) for x in group}
    cols = [1 << input_pos] + [1 << p for p in pivots]
    for c, t in cnots:
        if abs(c - t) != 1:
            return False
        for i, v in enumerate(cols):
            if (v >> c) & 1:
                cols[i] = v ^ (1 << t)
    if cols[0] not in coset:
        return False
    if any(v not in group or v == 0 for v in cols[1:]):
        return False
    return len(_span(cols[1:])) == 8


def final_patterns(input_pos: int, pivots, cnots, n: int = 7):
    """Where each source column lands (position sets), for audits."""
    cols = [1 << input_pos] + [1 << p for p in pivots]
    for c, t in cnots:
        for i, v in enumerate(cols):
            if (v >> c) & 1:
                cols[i] = v ^ (1 << t)
    return [tuple(i for i in range(n) if (v >> i) & 1) for v in cols]
