"""Extracting the statistics that drive synthesis from a gold corpus.

A gold corpus pairs machine translations with their human post-edits. Two
statistics fall out of aligning each pair: the distribution of per-record
edit rates, and the categorical profile of edit ops (keep/sub/ins/del).

Run: python demos/02_gold_statistics.py
"""

import numpy as np

from apesynth import Triplet, collect_statistics, sample_edit_rate
from apesynth.seeding import record_rng

rng = np.random.default_rng(7)
vocab = [f"word{i}" for i in range(30)]


def sentence(n):
    return tuple(vocab[i] for i in rng.integers(len(vocab), size=n))


def light_noise(ref):
    out = []
    for tok in ref:
        u = rng.random()
        if u < 0.10:
            out.append(vocab[int(rng.integers(len(vocab)))])  # substitution
        elif u < 0.14:
            out.extend([tok, vocab[int(rng.integers(len(vocab)))]])  # insertion
        elif u < 0.18:
            continue  # deletion
        else:
            out.append(tok)
    return tuple(out) or (ref[0],)


gold = []
for i in range(300):
    pe = sentence(int(rng.integers(5, 15)))
    gold.append(Triplet(id=i, src=sentence(6), mt=light_noise(pe), pe=pe))

rate_dist, mu = collect_statistics(gold)

print(f"records:        {len(rate_dist.samples)}")
print(f"mean edit rate: {rate_dist.mean:.4f}")
print(f"stddev:         {rate_dist.stddev:.4f}")
print(f"op profile:     keep={mu.p_keep:.3f} sub={mu.p_sub:.3f} "
      f"ins={mu.p_ins:.3f} del={mu.p_del:.3f}")

print("\nhistogram (0.05-wide bins):")
for lo, hi, count in rate_dist.histogram():
    if count:
        bar = "#" * max(1, count // 3)
        hi_txt = "inf" if hi == float("inf") else f"{hi:.2f}"
        print(f"  [{lo:.2f}, {hi_txt:>4}) {count:4d} {bar}")

# The distribution is resampled empirically, record by record.
draws = [sample_edit_rate(rate_dist, record_rng(99, i)) for i in range(5)]
print(f"\nfive resampled rates: {[round(d, 3) for d in draws]}")
