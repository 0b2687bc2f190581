"""Stochastic reference masking and the random-noise baseline.

Masking walks a reference token by token, drawing an op from the gold
categorical {keep, sub, ins, del}: keep passes the token through, sub
replaces it with ``<MASK>``, ins appends a ``<MASK>`` after it, del drops it.
The random baseline draws the same ops but writes uniformly sampled corpus
tokens instead of masks, yielding finished (if crude) synthetic triplets.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Iterator

import numpy as np

from .corpus import MASK_TOKEN, Bitext, MaskedRecord, Triplet
from .errors import RecordError, StatsError
from .parallel import ordered_parallel_map
from .seeding import record_rng
from .stats import ErrorTypeDist

_KEEP, _SUB, _INS, _DEL = range(4)


def _draw_ops(n: int, mu: ErrorTypeDist, rng: np.random.Generator) -> np.ndarray:
    """n categorical draws; one uniform variate per reference token."""
    thresholds = np.cumsum(mu.as_tuple())
    # The cumulative sum may fall a few ulps short of 1; clip so a draw in
    # that sliver still maps to the last category.
    return np.minimum(np.searchsorted(thresholds, rng.random(n), side="right"), 3)


def mask_reference(b: Bitext, mu: ErrorTypeDist, rng: np.random.Generator) -> MaskedRecord:
    """Mask one reference according to the op categorical."""
    y_mask: list[str] = []
    for token, op in zip(b.ref, _draw_ops(len(b.ref), mu, rng)):
        if op == _KEEP:
            y_mask.append(token)
        elif op == _SUB:
            y_mask.append(MASK_TOKEN)
        elif op == _INS:
            y_mask.append(token)
            y_mask.append(MASK_TOKEN)
        # _DEL: token dropped
    return MaskedRecord(id=b.id, src=b.src, y_mask=tuple(y_mask))


def _mask_worker(b: Bitext, mu: ErrorTypeDist, seed: int) -> MaskedRecord:
    try:
        return mask_reference(b, mu, record_rng(seed, b.id))
    except Exception as exc:
        raise RecordError(b.id, str(exc)) from exc


def mask_corpus(
    bitexts: Iterable[Bitext], mu: ErrorTypeDist, seed: int, threads: int = 1
) -> Iterator[MaskedRecord]:
    """Streaming masking; order-preserving and worker-count invariant.

    Records whose every token drew a deletion come out with an empty
    ``y_mask`` (flagged via ``is_empty``); drop them before filling if the
    downstream filler needs non-empty input.
    """
    return ordered_parallel_map(_mask_worker, bitexts, threads=threads, mu=mu, seed=seed)


@dataclass(frozen=True)
class TokenVocab:
    """Frequency-weighted token pool for the random-noise baseline."""

    tokens: tuple[str, ...]
    cumulative: tuple[int, ...]  # running counts; total is cumulative[-1]

    def __post_init__(self):
        if not self.tokens:
            raise StatsError("empty vocabulary")

    @classmethod
    def from_counts(cls, counts: dict[str, int]) -> "TokenVocab":
        items = sorted(counts.items())
        return cls(
            tokens=tuple(t for t, _ in items),
            cumulative=tuple(accumulate(c for _, c in items)),
        )

    @classmethod
    def from_bitexts(cls, bitexts: Iterable[Bitext]) -> "TokenVocab":
        """Target-side token multiset of a bitext corpus."""
        counts: dict[str, int] = {}
        for b in bitexts:
            for t in b.ref:
                counts[t] = counts.get(t, 0) + 1
        if not counts:
            raise StatsError("no target-side tokens in corpus")
        return cls.from_counts(counts)

    def sample(self, rng: np.random.Generator) -> str:
        i = int(rng.integers(self.cumulative[-1]))
        return self.tokens[bisect.bisect_right(self.cumulative, i)]


def rand_noise(
    b: Bitext, mu: ErrorTypeDist, vocab: TokenVocab, rng: np.random.Generator
) -> Triplet:
    """Random-edit noising of one reference into a synthetic triplet.

    Same categorical walk as masking, but sub/ins write a frequency-weighted
    random vocabulary token instead of a mask. Output is (src, noised, ref).
    """
    noised: list[str] = []
    for token, op in zip(b.ref, _draw_ops(len(b.ref), mu, rng)):
        if op == _KEEP:
            noised.append(token)
        elif op == _SUB:
            noised.append(vocab.sample(rng))
        elif op == _INS:
            noised.append(token)
            noised.append(vocab.sample(rng))
        # _DEL: token dropped
    if not noised:
        # An all-deletion draw leaves no mt side; fall back to one random
        # token so the record stays a valid triplet.
        noised.append(vocab.sample(rng))
    return Triplet(id=b.id, src=b.src, mt=tuple(noised), pe=b.ref)


def _rand_worker(b: Bitext, mu: ErrorTypeDist, vocab: TokenVocab, seed: int) -> Triplet:
    try:
        return rand_noise(b, mu, vocab, record_rng(seed, b.id))
    except Exception as exc:
        raise RecordError(b.id, str(exc)) from exc


def rand_corpus(
    bitexts: Iterable[Bitext],
    mu: ErrorTypeDist,
    vocab: TokenVocab,
    seed: int,
    threads: int = 1,
) -> Iterator[Triplet]:
    return ordered_parallel_map(_rand_worker, bitexts, threads=threads, mu=mu, vocab=vocab, seed=seed)
