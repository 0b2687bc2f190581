"""Stochastic masking and the random-noise baseline."""

from __future__ import annotations

import numpy as np

from apesynth.align import edit_rate
from apesynth.corpus import MASK_TOKEN, Bitext
from apesynth.masker import TokenVocab, mask_corpus, mask_reference, rand_corpus, rand_noise
from apesynth.stats import ErrorTypeDist, collect_error_type_dist

from helpers import make_bitexts, make_gold_triplets, rng_for


def _bitext(ref, i=0):
    return Bitext(id=i, src=("s",), ref=tuple(ref))


def _mu(keep, sub, ins, delete):
    return ErrorTypeDist(keep, sub, ins, delete)


def test_all_keep_is_identity():
    b = _bitext(["a", "b", "c"])
    rec = mask_reference(b, _mu(1, 0, 0, 0), rng_for(0))
    assert rec.y_mask == b.ref


def test_all_sub_masks_every_token():
    b = _bitext(["a", "b", "c"])
    rec = mask_reference(b, _mu(0, 1, 0, 0), rng_for(0))
    assert rec.y_mask == (MASK_TOKEN,) * 3


def test_all_ins_alternates_token_mask():
    b = _bitext(["a", "b"])
    rec = mask_reference(b, _mu(0, 0, 1, 0), rng_for(0))
    assert rec.y_mask == ("a", MASK_TOKEN, "b", MASK_TOKEN)


def test_all_del_yields_flagged_empty():
    b = _bitext(["a", "b"])
    rec = mask_reference(b, _mu(0, 0, 0, 1), rng_for(0))
    assert rec.y_mask == ()
    assert rec.is_empty


def test_output_token_count_law():
    mu = _mu(0.5, 0.2, 0.2, 0.1)
    rng = rng_for(42)
    for ref_len in (1, 4, 9, 30):
        b = _bitext([f"t{i}" for i in range(ref_len)])
        rec = mask_reference(b, mu, rng)
        kept = sum(1 for t in rec.y_mask if t != MASK_TOKEN)
        masks = rec.mask_count
        # each ins contributes one kept token + one mask; subs one mask; keeps one token
        assert len(rec.y_mask) == kept + masks


def test_mask_only_from_sub_or_ins_draws():
    # without ins or del the stripped sequence must be ref minus sub positions
    mu = _mu(0.7, 0.3, 0.0, 0.0)
    b = _bitext([f"t{i}" for i in range(50)])
    rec = mask_reference(b, mu, rng_for(3))
    assert len(rec.y_mask) == len(b.ref)
    restored = tuple(r if m == MASK_TOKEN else m for m, r in zip(rec.y_mask, b.ref))
    assert restored == b.ref


def test_frequency_convergence():
    """Empirical op frequencies within ±0.01 of the categorical at 10^6 draws."""
    mu = _mu(0.7, 0.15, 0.1, 0.05)
    from apesynth.masker import _draw_ops

    draws = _draw_ops(1_000_000, mu, rng_for(20240808))
    freqs = np.bincount(draws, minlength=4) / len(draws)
    for observed, expected in zip(freqs, mu.as_tuple()):
        assert abs(observed - expected) < 0.01


def test_output_aggregates_converge():
    """Black-box corroboration: measurable functionals of the output match
    their expectations under the categorical (length, masks, kept tokens)."""
    mu = _mu(0.7, 0.15, 0.1, 0.05)
    n_tokens = 1_000_000
    b = Bitext(id=0, src=("s",), ref=tuple(f"t{i % 97}" for i in range(n_tokens)))
    rec = mask_reference(b, mu, rng_for(99))
    kept = sum(1 for t in rec.y_mask if t != MASK_TOKEN)
    k, s, i, _ = mu.as_tuple()
    assert abs(len(rec.y_mask) / n_tokens - (k + s + 2 * i)) < 0.01
    assert abs(rec.mask_count / n_tokens - (s + i)) < 0.01
    assert abs(kept / n_tokens - (k + i)) < 0.01


def test_corpus_determinism_and_order():
    bitexts = make_bitexts(64, seed=2)
    mu = _mu(0.6, 0.2, 0.1, 0.1)
    one = list(mask_corpus(bitexts, mu, seed=7, threads=1))
    eight = list(mask_corpus(bitexts, mu, seed=7, threads=8))
    assert one == eight
    assert [r.id for r in one] == [b.id for b in bitexts]


def test_rand_identity_with_full_keep():
    b = _bitext(["a", "b", "c"])
    vocab = TokenVocab.from_counts({"z": 1})
    t = rand_noise(b, _mu(1, 0, 0, 0), vocab, rng_for(0))
    assert t.mt == b.ref
    assert t.pe == b.ref
    assert t.src == b.src


def test_rand_all_sub_single_vocab():
    b = _bitext(["a", "b", "c"])
    vocab = TokenVocab.from_counts({"z": 3})
    t = rand_noise(b, _mu(0, 1, 0, 0), vocab, rng_for(0))
    assert t.mt == ("z", "z", "z")


def test_rand_never_emits_mask_and_stays_valid():
    bitexts = make_bitexts(100, seed=8)
    vocab = TokenVocab.from_bitexts(bitexts)
    mu = _mu(0.6, 0.2, 0.1, 0.1)
    for t in rand_corpus(bitexts, mu, vocab, seed=3):
        assert MASK_TOKEN not in t.mt
        assert len(t.mt) >= 1


def test_rand_mean_edit_rate_tracks_error_mass():
    """Monte-Carlo: mean output edit rate ~= mu_sub + mu_ins + mu_del."""
    gold = make_gold_triplets(300, seed=14, p_sub=0.12, p_ins=0.05, p_del=0.05)
    mu = collect_error_type_dist(gold)
    error_mass = mu.p_sub + mu.p_ins + mu.p_del
    bitexts = make_bitexts(400, seed=15)
    vocab = TokenVocab.from_bitexts(bitexts)
    rates = [
        edit_rate(t.mt, t.pe).rate
        for t in rand_corpus(bitexts, mu, vocab, seed=1001)
    ]
    mean_rate = sum(rates) / len(rates)
    assert abs(mean_rate - error_mass) / error_mass < 0.15


def test_vocab_frequency_sampling():
    vocab = TokenVocab.from_counts({"common": 90, "rare": 10})
    rng = rng_for(123)
    draws = [vocab.sample(rng) for _ in range(20_000)]
    frac = draws.count("common") / len(draws)
    assert abs(frac - 0.9) < 0.01
