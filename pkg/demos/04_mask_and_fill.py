"""Masked synthesis end to end with the native statistical filler.

References are masked by the gold op categorical, a backoff filler trained
on masked-LM records replaces each mask with a plausible error token, and
the result is a synthetic (src, mt, pe) corpus.

Run: python demos/04_mask_and_fill.py
"""

import numpy as np

from apesynth import (
    Bitext,
    ErrorTypeDist,
    NativeFiller,
    Triplet,
    collect_statistics,
    edit_rate,
    synthesize_triplets,
    train_native_filler,
    build_mlm_corpus,
)
from apesynth.seeding import stage_seed

rng = np.random.default_rng(13)
vocab = [f"tok{i}" for i in range(25)]


def sentence(n):
    return tuple(vocab[i] for i in rng.integers(len(vocab), size=n))


def noisy(ref, p=0.2):
    return tuple(
        vocab[int(rng.integers(len(vocab)))] if rng.random() < p else t for t in ref
    )


# gold statistics
gold = []
for i in range(200):
    pe = sentence(int(rng.integers(5, 12)))
    gold.append(Triplet(id=i, src=sentence(5), mt=noisy(pe, 0.15), pe=pe))
rate_dist, mu = collect_statistics(gold)
print(f"gold mean rate {rate_dist.mean:.3f}; op profile keep={mu.p_keep:.2f}")

# filler trained on masked-LM records built from a translation-style corpus
trans = []
for i in range(300):
    pe = sentence(int(rng.integers(5, 12)))
    trans.append(Triplet(id=i, src=sentence(5), mt=noisy(pe, 0.3), pe=pe))
model = train_native_filler(build_mlm_corpus(trans, rate_dist, seed=21))
print(f"native filler knows {len(model.unigram)} error tokens")

# synthesize from fresh bitexts
bitexts = [Bitext(id=i, src=sentence(5), ref=sentence(int(rng.integers(5, 12)))) for i in range(200)]
native = NativeFiller(model, seed=stage_seed(42, "fill"))
synth = list(synthesize_triplets(bitexts, mu, native, seed=42))

rates = [edit_rate(t.mt, t.pe).rate for t in synth]
print(f"synthesized {len(synth)} triplets; mean mt-pe rate {sum(rates)/len(rates):.3f}")
print("\nexample:")
t = synth[0]
print("  src:", " ".join(t.src))
print("  mt :", " ".join(t.mt))
print("  pe :", " ".join(t.pe))
