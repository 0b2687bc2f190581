"""Acceptance: protocol conformance under the toolkit CLI, and fine-tuning
that turns reconstruction into error injection.

The toolkit is exercised only through its external interfaces: corpus files,
the stats file, the masked-record JSONL, and the `apesynth fill` command with
``--filler-cmd`` pointing at this package's serve loop.
"""

from __future__ import annotations

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from mlmfiller.data import MASK, read_mlm_records
from mlmfiller.model import load_artifact
from mlmfiller.serve import Filler
from mlmfiller.training import train

from toylang import make_bitexts, make_triplets, ref_tokens, src_tokens, write_bitexts_tsv, write_triplets_tsv

BATCH_SIZE = 8
N_BATCHES = 100


def _run(cmd, **kw):
    res = subprocess.run(cmd, capture_output=True, text=True, **kw)
    assert res.returncode == 0, f"{cmd}\nstdout: {res.stdout}\nstderr: {res.stderr}"
    return res


def _apesynth(*args):
    return _run([sys.executable, "-m", "apesynth", *map(str, args)])


def _mlmfiller(*args):
    return _run([sys.executable, "-m", "mlmfiller", *map(str, args)])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("accept")
    gold = tmp / "gold.tsv"
    trans = tmp / "trans.tsv"
    pretrain_bitexts = tmp / "pretrain_bitexts.tsv"
    fill_bitexts = tmp / "fill_bitexts.tsv"
    write_triplets_tsv(str(gold), make_triplets(300, seed=10, p_err=0.15))
    write_triplets_tsv(str(trans), make_triplets(1000, seed=20, p_err=0.25))
    write_bitexts_tsv(str(pretrain_bitexts), make_bitexts(500, seed=30))
    write_bitexts_tsv(str(fill_bitexts), make_bitexts(BATCH_SIZE * N_BATCHES + 80, seed=40))

    stats = tmp / "stats.json"
    _apesynth("stats", "--gold", gold, "--out", stats)
    mlm = tmp / "mlm.jsonl"
    _apesynth("mlm-data", "--triplets", trans, "--stats", stats, "--seed", 5, "--out", mlm)
    masked = tmp / "masked.jsonl"
    _apesynth("mask", "--bitexts", fill_bitexts, "--stats", stats, "--seed", 6, "--out", masked)

    base = tmp / "base.pt"
    _mlmfiller("pretrain", "--bitexts", pretrain_bitexts, "--out", base,
               "--epochs", 10, "--seed", 1)
    tuned = tmp / "tuned.pt"
    _mlmfiller("finetune", "--model", base, "--mlm", mlm, "--out", tuned,
               "--epochs", 4, "--seed", 2)
    return {
        "tmp": tmp, "stats": stats, "mlm": mlm, "masked": masked,
        "fill_bitexts": fill_bitexts, "base": base, "tuned": tuned,
    }


def test_c10a_protocol_conformance_under_toolkit_cli(workspace):
    """100 batches through `apesynth fill`; its validator rejects nothing."""
    start = time.monotonic()
    out = workspace["tmp"] / "synthetic.tsv"
    filler_cmd = f"{sys.executable} -m mlmfiller serve --model {workspace['tuned']}"
    _apesynth(
        "fill", "--masked", workspace["masked"], "--bitexts", workspace["fill_bitexts"],
        "--filler-cmd", filler_cmd, "--out", out, "--drop-empty",
        "--batch-size", BATCH_SIZE, "--timeout", 300,
    )
    with open(workspace["masked"]) as fh:
        non_empty = sum(1 for line in fh if json.loads(line)["y_mask"])
    with open(out) as fh:
        produced = sum(1 for _ in fh)
    assert produced == non_empty
    assert produced >= BATCH_SIZE * N_BATCHES
    elapsed = time.monotonic() - start
    print(f"[acceptance] criterion 10a (protocol conformance): PASS "
          f"({produced} records across >= {N_BATCHES} batches, 0 rejections, {elapsed:.0f}s)")


def test_c10b_finetuning_loss_decreases(workspace):
    records = list(read_mlm_records(str(workspace["mlm"])))
    assert len(records) == 1000
    base, vocab = load_artifact(str(workspace["base"]))
    _, _, losses = train(records, base=base, vocab=vocab, epochs=4, seed=3)
    assert losses[-1] < losses[0]
    print(f"[acceptance] criterion 10b (fine-tuning loss): PASS "
          f"({losses[0]:.3f} -> {losses[-1]:.3f} over {len(losses)} epochs)")


def test_c10c_error_injection_rate_increases(workspace):
    """Masked fills diverge from the hidden reference more after fine-tuning."""
    base, base_vocab = load_artifact(str(workspace["base"]))
    tuned, tuned_vocab = load_artifact(str(workspace["tuned"]))

    def injection_rate(model, vocab) -> float:
        rng = np.random.default_rng(77)  # same evaluation set for both models
        filler = Filler(model, vocab)
        differs = total = 0
        for _ in range(150):
            start = int(rng.integers(20))
            n = int(rng.integers(6, 11))
            src, ref = src_tokens(start, n), ref_tokens(start, n)
            picks = sorted(rng.choice(n, size=max(1, n // 5), replace=False).tolist())
            masked = [MASK if i in picks else t for i, t in enumerate(ref)]
            filled = filler.fill(src, masked)
            for i in picks:
                total += 1
                differs += filled[i] != ref[i]
        return differs / total

    base_rate = injection_rate(base, base_vocab)
    tuned_rate = injection_rate(tuned, tuned_vocab)
    assert tuned_rate > base_rate
    print(f"[acceptance] criterion 10c (error-injection shift): PASS "
          f"(base {base_rate:.1%} -> fine-tuned {tuned_rate:.1%})")
