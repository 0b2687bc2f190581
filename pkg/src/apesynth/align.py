"""Word-level edit alignment and TER-style scoring.

The shift-free core is a Wagner-Fischer dynamic program with a deterministic
backtrace (tie preference match > sub > del > ins). ``ter_align`` optionally
prepends a greedy block-shift search in the style of the standard TER scorer:
hypothesis blocks that exactly match a reference n-gram and currently contain
an error may be moved, each move costing one edit; the move that most reduces
the remaining edit distance is applied, repeatedly, while the total strictly
improves. Tokens compare case-sensitively.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

MAX_SHIFT_DIST = 50   # farthest a block may move, in token positions
MAX_SHIFT_LEN = 10    # longest movable block


class OpKind(str, Enum):
    MATCH = "match"
    SUB = "sub"
    INS = "ins"
    DEL = "del"


@dataclass(frozen=True)
class EditOp:
    """One alignment step.

    Match/Sub carry both sides; Ins carries only the hypothesis token that has
    no reference counterpart; Del carries only the reference token missing
    from the hypothesis. Positions are 0-based; for shifted alignments,
    ``hyp_pos`` indexes the post-shift hypothesis.
    """

    kind: OpKind
    ref_token: str | None = None
    hyp_token: str | None = None
    ref_pos: int | None = None
    hyp_pos: int | None = None


@dataclass(frozen=True)
class Alignment:
    """Ordered edit-op trace between a hypothesis and a reference."""

    ops: tuple[EditOp, ...]
    distance: int
    shift_count: int = 0

    def count(self, kind: OpKind) -> int:
        return sum(1 for op in self.ops if op.kind is kind)

    def counts(self) -> dict[OpKind, int]:
        out = {kind: 0 for kind in OpKind}
        for op in self.ops:
            out[op.kind] += 1
        return out


@dataclass(frozen=True)
class TerResult:
    """Edit count normalized by reference length; the rate may exceed 1."""

    edits: int
    ref_len: int

    @property
    def rate(self) -> float:
        return self.edits / self.ref_len


def _require_nonempty(hyp: Sequence[str], ref: Sequence[str]) -> None:
    if len(hyp) == 0:
        raise ValueError("hypothesis sequence is empty")
    if len(ref) == 0:
        raise ValueError("reference sequence is empty")


def levenshtein_distance(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Minimum unit-cost edit distance (distance only, no trace)."""
    _require_nonempty(hyp, ref)
    h = len(hyp)
    prev = list(range(h + 1))
    for i, r in enumerate(ref, start=1):
        cur = [i] + [0] * h
        for j in range(1, h + 1):
            cost = 0 if hyp[j - 1] == r else 1
            a = prev[j - 1] + cost
            b = prev[j] + 1
            c = cur[j - 1] + 1
            cur[j] = a if a <= b and a <= c else (b if b <= c else c)
        prev = cur
    return prev[h]


def levenshtein_align(hyp: Sequence[str], ref: Sequence[str]) -> Alignment:
    """Minimum-cost edit trace under unit costs.

    Among cost-ties the backtrace prefers match > sub > del > ins, making the
    trace (and everything sampled from it downstream) deterministic.
    """
    _require_nonempty(hyp, ref)
    R, H = len(ref), len(hyp)
    dist = [[0] * (H + 1) for _ in range(R + 1)]
    for j in range(1, H + 1):
        dist[0][j] = j
    for i in range(1, R + 1):
        row = dist[i]
        above = dist[i - 1]
        row[0] = i
        r = ref[i - 1]
        for j in range(1, H + 1):
            cost = 0 if hyp[j - 1] == r else 1
            a = above[j - 1] + cost
            b = above[j] + 1
            c = row[j - 1] + 1
            row[j] = a if a <= b and a <= c else (b if b <= c else c)

    ops: list[EditOp] = []
    i, j = R, H
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i - 1][j - 1] == here:
            ops.append(EditOp(OpKind.MATCH, ref[i - 1], hyp[j - 1], i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and ref[i - 1] != hyp[j - 1] and dist[i - 1][j - 1] + 1 == here:
            ops.append(EditOp(OpKind.SUB, ref[i - 1], hyp[j - 1], i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i - 1][j] + 1 == here:
            ops.append(EditOp(OpKind.DEL, ref_token=ref[i - 1], ref_pos=i - 1))
            i -= 1
        else:
            ops.append(EditOp(OpKind.INS, hyp_token=hyp[j - 1], hyp_pos=j - 1))
            j -= 1
    ops.reverse()
    return Alignment(ops=tuple(ops), distance=dist[R][H], shift_count=0)


@dataclass(frozen=True)
class _Shift:
    start: int      # block start in the current hypothesis
    length: int
    dest: int       # insertion index after block removal
    new_dist: int


def _match_maps(alignment: Alignment, hyp_len: int, ref_len: int) -> tuple[list[int | None], list[int | None]]:
    """Per-position partners from a trace: hyp->ref (matches) and ref->hyp (matches and subs)."""
    hyp_to_ref: list[int | None] = [None] * hyp_len
    ref_to_hyp: list[int | None] = [None] * ref_len
    for op in alignment.ops:
        if op.kind in (OpKind.MATCH, OpKind.SUB):
            if op.kind is OpKind.MATCH:
                hyp_to_ref[op.hyp_pos] = op.ref_pos
            ref_to_hyp[op.ref_pos] = op.hyp_pos
    return hyp_to_ref, ref_to_hyp


def _best_shift(current: list[str], ref: Sequence[str], trace: Alignment) -> _Shift | None:
    """Most-distance-reducing single block move, standard-TER style.

    Candidate blocks are hypothesis spans that exactly match a reference
    n-gram but are not already matched in place; the block is moved next to
    the hypothesis position aligned with the reference occurrence. Returns
    the candidate with the lowest post-move distance (first found wins ties),
    or None when there is no candidate.
    """
    H, R = len(current), len(ref)
    hyp_to_ref, ref_to_hyp = _match_maps(trace, H, R)

    ref_starts: dict[str, list[int]] = {}
    for r, tok in enumerate(ref):
        ref_starts.setdefault(tok, []).append(r)

    best: _Shift | None = None
    for start in range(H):
        for r in ref_starts.get(current[start], ()):
            max_len = min(MAX_SHIFT_LEN, H - start, R - r)
            for length in range(1, max_len + 1):
                if current[start + length - 1] != ref[r + length - 1]:
                    break
                # A block already matched in place creates no new matches.
                if all(hyp_to_ref[start + k] == r + k for k in range(length)):
                    continue
                # Anchor: hypothesis token aligned with the reference token
                # just before the occurrence; the block lands right after it.
                anchor = None
                rr = r - 1
                while rr >= 0 and anchor is None:
                    anchor = ref_to_hyp[rr]
                    rr -= 1
                if anchor is None:
                    dest = 0
                elif start <= anchor < start + length:
                    continue    # anchor sits inside the moved block
                else:
                    dest = (anchor - length if anchor >= start + length else anchor) + 1
                if dest > H - length:
                    dest = H - length
                if dest == start or abs(dest - start) > MAX_SHIFT_DIST:
                    continue
                block = current[start:start + length]
                removed = current[:start] + current[start + length:]
                candidate = removed[:dest] + block + removed[dest:]
                if candidate == current:
                    continue
                d = levenshtein_distance(candidate, ref)
                if best is None or d < best.new_dist:
                    best = _Shift(start, length, dest, d)
    return best


def ter_align(hyp: Sequence[str], ref: Sequence[str], allow_shifts: bool = False) -> Alignment:
    """Edit trace with optional greedy block shifts (cost 1 per shift).

    With shifts disabled this is exactly :func:`levenshtein_align`. With
    shifts enabled, block moves are applied greedily while each move strictly
    reduces the total edit count; the final trace classifies the post-shift
    hypothesis, and ``distance`` includes one edit per applied shift. Enabling
    shifts never increases the distance.
    """
    _require_nonempty(hyp, ref)
    if not allow_shifts:
        return levenshtein_align(hyp, ref)

    current = list(hyp)
    shifts = 0
    trace = levenshtein_align(current, ref)
    while trace.distance > 0:
        best = _best_shift(current, ref, trace)
        # The move must pay for its own cost: require a strict total improvement.
        if best is None or best.new_dist + 1 >= trace.distance:
            break
        block = current[best.start:best.start + best.length]
        removed = current[:best.start] + current[best.start + best.length:]
        current = removed[:best.dest] + block + removed[best.dest:]
        shifts += 1
        trace = levenshtein_align(current, ref)
    return Alignment(ops=trace.ops, distance=trace.distance + shifts, shift_count=shifts)


def edit_rate(hyp: Sequence[str], ref: Sequence[str], allow_shifts: bool = False) -> TerResult:
    """Edit count from :func:`ter_align`, normalized by reference length."""
    alignment = ter_align(hyp, ref, allow_shifts)
    return TerResult(edits=alignment.distance, ref_len=len(ref))
