"""Seeded toy-corpus generators shared across the test suite."""

from __future__ import annotations

import numpy as np

from apesynth.corpus import Bitext, Triplet

SRC_VOCAB = [f"s{i}" for i in range(40)]
TGT_VOCAB = [f"t{i}" for i in range(40)]


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_sentence(rng: np.random.Generator, vocab, lo=3, hi=12) -> tuple[str, ...]:
    n = int(rng.integers(lo, hi + 1))
    return tuple(vocab[int(i)] for i in rng.integers(len(vocab), size=n))


def noised_copy(
    rng: np.random.Generator,
    ref: tuple[str, ...],
    vocab,
    p_sub=0.10,
    p_ins=0.05,
    p_del=0.05,
) -> tuple[str, ...]:
    """Apply random token edits to a reference; may coincide with it."""
    out: list[str] = []
    for tok in ref:
        u = rng.random()
        if u < p_sub:
            out.append(vocab[int(rng.integers(len(vocab)))])
        elif u < p_sub + p_ins:
            out.append(tok)
            out.append(vocab[int(rng.integers(len(vocab)))])
        elif u < p_sub + p_ins + p_del:
            continue
        else:
            out.append(tok)
    if not out:
        out.append(vocab[int(rng.integers(len(vocab)))])
    return tuple(out)


def make_bitexts(n: int, seed: int = 7) -> list[Bitext]:
    rng = rng_for(seed)
    return [
        Bitext(id=i, src=random_sentence(rng, SRC_VOCAB), ref=random_sentence(rng, TGT_VOCAB))
        for i in range(n)
    ]


def make_gold_triplets(
    n: int, seed: int = 11, p_sub=0.10, p_ins=0.05, p_del=0.05
) -> list[Triplet]:
    """Gold-style triplets: mt is a noised copy of pe."""
    rng = rng_for(seed)
    out = []
    for i in range(n):
        src = random_sentence(rng, SRC_VOCAB)
        pe = random_sentence(rng, TGT_VOCAB)
        mt = noised_copy(rng, pe, TGT_VOCAB, p_sub, p_ins, p_del)
        out.append(Triplet(id=i, src=src, mt=mt, pe=pe))
    return out


def random_pair(rng: np.random.Generator, vocab_size=6, lo=1, hi=10):
    """A (hyp, ref) token pair over a small shared vocabulary."""
    vocab = [f"w{i}" for i in range(vocab_size)]
    hyp = tuple(vocab[int(i)] for i in rng.integers(vocab_size, size=int(rng.integers(lo, hi + 1))))
    ref = tuple(vocab[int(i)] for i in rng.integers(vocab_size, size=int(rng.integers(lo, hi + 1))))
    return hyp, ref
