"""Interleaving a translation-based corpus with a noised one.

Per bitext, the translation triplet is kept when its mt-pe edit rate is
within lambda * sigma of the gold mean; otherwise the noised triplet wins.
lambda = 0 and lambda = inf select one side outright.

Run: python demos/05_interleaving.py
"""

import math

import numpy as np

from apesynth import InterleaveConfig, Triplet, interleave

rng = np.random.default_rng(3)
vocab = [f"w{i}" for i in range(30)]


def sentence(n):
    return tuple(vocab[i] for i in rng.integers(len(vocab), size=n))


def noisy(ref, p):
    return tuple(vocab[int(rng.integers(len(vocab)))] if rng.random() < p else t for t in ref)


trans, noise = [], []
for i in range(400):
    src, pe = sentence(5), sentence(int(rng.integers(6, 14)))
    trans.append(Triplet(i, src, noisy(pe, 0.35), pe))   # translation-ish: heavy noise
    noise.append(Triplet(i, src, noisy(pe, 0.12), pe))   # masked synthesis: gold-like noise

mu_gold, sigma_gold = 0.15, 0.08
print(f"gold mean {mu_gold}, sigma {sigma_gold}\n")
print("lambda   kept_trans  kept_noise")
for lam in (0, 1.0, 2.0, 3.0, math.inf):
    cfg = InterleaveConfig(lam=lam, mu_gold=mu_gold, sigma_gold=sigma_gold)
    stream, report = interleave(trans, noise, cfg)
    for _ in stream:
        pass
    lam_txt = "inf" if math.isinf(lam) else f"{lam:g}"
    print(f"{lam_txt:>6}   {report.trans_ratio:9.1%}  {report.noise_ratio:9.1%}")
