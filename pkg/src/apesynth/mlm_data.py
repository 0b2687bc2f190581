"""Builds masked-LM training records from translation triplets.

Each triplet's machine translation is aligned against its post-edit; error
positions (subs and insertions — deletions are left out, since a deleted
token has no output the filler could learn) become mask sites, with the
erroneous mt token as the training target. The number of mask sites is
capped so that the masked corpus reproduces the gold edit-rate distribution:
when a triplet is noisier than a rate drawn from the gold distribution, a
random subset of ceil(|pe| * drawn_rate) error sites is kept.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator

import numpy as np

from .align import OpKind, ter_align
from .corpus import MASK_TOKEN, MlmTrainRecord, Triplet
from .errors import RecordError
from .parallel import ordered_parallel_map
from .seeding import record_rng
from .stats import EditRateDist, sample_edit_rate


def build_mlm_record(
    t: Triplet,
    dist: EditRateDist,
    rng: np.random.Generator,
    allow_shifts: bool = False,
) -> MlmTrainRecord:
    """One triplet -> one (src, y_mask, y_noise) training record.

    Draw order is part of the contract (tests replay it): the target rate is
    the first draw from ``rng``; the cap subset, when needed, is the second.
    """
    target_rate = sample_edit_rate(dist, rng)
    alignment = ter_align(t.mt, t.pe, allow_shifts)
    actual_rate = alignment.distance / len(t.pe)

    error_idx = [i for i, op in enumerate(alignment.ops) if op.kind in (OpKind.SUB, OpKind.INS)]
    if actual_rate > target_rate:
        num_mask = math.ceil(len(t.pe) * target_rate)
        # More deletions than error sites can leave fewer candidates than the
        # cap allows; sampling is bounded by what exists.
        num_mask = min(num_mask, len(error_idx))
        chosen = set(rng.choice(len(error_idx), size=num_mask, replace=False).tolist()) if num_mask else set()
        chosen_ops = {error_idx[i] for i in chosen}
    else:
        chosen_ops = set(error_idx)

    y_mask: list[str] = []
    y_noise: list[str] = []
    for i, op in enumerate(alignment.ops):
        if op.kind is OpKind.SUB:
            if i in chosen_ops:
                y_mask.append(MASK_TOKEN)
                y_noise.append(op.hyp_token)
            else:
                y_mask.append(op.ref_token)
                y_noise.append(op.ref_token)
        elif op.kind is OpKind.INS:
            if i in chosen_ops:
                y_mask.append(MASK_TOKEN)
                y_noise.append(op.hyp_token)
            # An unchosen insertion injects nothing: its ref side is empty.
        else:  # MATCH and DEL both carry the ref token through unchanged.
            y_mask.append(op.ref_token)
            y_noise.append(op.ref_token)

    return MlmTrainRecord(id=t.id, src=t.src, y_mask=tuple(y_mask), y_noise=tuple(y_noise))


def _build_worker(t: Triplet, dist: EditRateDist, seed: int, allow_shifts: bool) -> MlmTrainRecord:
    try:
        return build_mlm_record(t, dist, record_rng(seed, t.id), allow_shifts)
    except Exception as exc:
        raise RecordError(t.id, str(exc)) from exc


def build_mlm_corpus(
    triplets: Iterable[Triplet],
    dist: EditRateDist,
    seed: int,
    allow_shifts: bool = False,
    threads: int = 1,
) -> Iterator[MlmTrainRecord]:
    """Streaming corpus variant; per-record generators keyed by (seed, id)
    keep the output identical under any worker count."""
    return ordered_parallel_map(
        _build_worker, triplets, threads=threads, dist=dist, seed=seed, allow_shifts=allow_shifts
    )
