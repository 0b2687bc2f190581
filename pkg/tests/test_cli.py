"""CLI surface: pipelines, exit codes, config, determinism, provenance."""

from __future__ import annotations

import json
import sys

import pytest

from apesynth.cli import main
from apesynth.corpus import (
    MASK_TOKEN,
    read_masked_records,
    read_mlm_records,
    read_triplets,
    write_corpus,
)

from helpers import make_bitexts, make_gold_triplets


@pytest.fixture()
def toy(tmp_path):
    """Gold triplets, translation-style triplets, and bitexts on disk."""
    gold = make_gold_triplets(60, seed=101, p_sub=0.15, p_ins=0.05, p_del=0.05)
    trans = make_gold_triplets(80, seed=102, p_sub=0.3, p_ins=0.15, p_del=0.1)
    bitexts = make_bitexts(80, seed=103)
    paths = {
        "gold": tmp_path / "gold.tsv",
        "trans": tmp_path / "trans.tsv",
        "bitexts": tmp_path / "bitexts.tsv",
    }
    write_corpus(gold, str(paths["gold"]), "tsv")
    write_corpus(trans, str(paths["trans"]), "tsv")
    write_corpus(bitexts, str(paths["bitexts"]), "tsv")
    return tmp_path, paths


def run(*argv) -> int:
    return main([str(a) for a in argv])


def test_full_pipeline(toy):
    tmp, p = toy
    stats = tmp / "stats.json"
    assert run("stats", "--gold", p["gold"], "--out", stats) == 0
    doc = json.loads(stats.read_text())
    assert doc["format"] == "apesynth-stats"
    assert abs(sum(doc["error_types"].values()) - 1.0) < 1e-9

    mlm = tmp / "mlm.jsonl"
    assert run("mlm-data", "--triplets", p["trans"], "--stats", stats, "--seed", 5, "--out", mlm) == 0
    records = list(read_mlm_records(str(mlm)))
    assert records and any(r.mask_count for r in records)

    model = tmp / "filler.json"
    assert run("train-filler", "--mlm", mlm, "--out", model) == 0

    masked = tmp / "masked.jsonl"
    assert run("mask", "--bitexts", p["bitexts"], "--stats", stats, "--seed", 6, "--out", masked) == 0
    masked_records = list(read_masked_records(str(masked)))
    assert len(masked_records) == 80

    filled = tmp / "synth.tsv"
    assert (
        run(
            "fill", "--masked", masked, "--bitexts", p["bitexts"], "--model", model,
            "--seed", 7, "--out", filled, "--drop-empty",
        )
        == 0
    )
    synth = list(read_triplets(str(filled)))
    assert synth
    for t in synth:
        assert MASK_TOKEN not in t.mt

    # interleave needs id-aligned corpora: reuse the fill output as "noise"
    # and the trans corpus trimmed to the same bitexts as "trans".
    noise_full = tmp / "noise.tsv"
    assert (
        run(
            "fill", "--masked", masked, "--bitexts", p["bitexts"], "--model", model,
            "--seed", 8, "--out", noise_full,
        )
        == 0
    )
    trans_same = tmp / "trans_same.tsv"
    assert (
        run(
            "rand", "--bitexts", p["bitexts"], "--stats", stats, "--seed", 9,
            "--out", trans_same,
        )
        == 0
    )
    combined = tmp / "combined.tsv"
    assert (
        run(
            "interleave", "--trans", trans_same, "--noise", noise_full, "--stats", stats,
            "--lambda", "2", "--out", combined,
        )
        == 0
    )
    report = json.loads((tmp / "combined.tsv.report.json").read_text())
    assert report["kept_trans"] + report["kept_noise"] == report["total"] == 80

    hyp = tmp / "hyp.txt"
    ref = tmp / "ref.txt"
    hyp.write_text("\n".join(" ".join(t.mt) for t in synth) + "\n", encoding="utf-8")
    ref.write_text("\n".join(" ".join(t.pe) for t in synth) + "\n", encoding="utf-8")
    score_json = tmp / "score.json"
    assert run("score", "--hyp", hyp, "--ref", ref, "--json", score_json) == 0
    score = json.loads(score_json.read_text())
    assert 0.0 <= score["ter"]
    assert 0.0 <= score["bleu"] <= 100.0

    dist_json = tmp / "dist.json"
    dist_csv = tmp / "dist.csv"
    assert (
        run(
            "report-dist", "--corpus", p["gold"], "--corpus-b", combined,
            "--label", "gold", "--label-b", "synthetic",
            "--out", dist_json, "--csv", dist_csv,
        )
        == 0
    )
    doc = json.loads(dist_json.read_text())
    assert [s["label"] for s in doc["series"]] == ["gold", "synthetic"]
    assert dist_csv.read_text().startswith("label,bin_low,bin_high,count,fraction")


def test_invalid_lambda_is_usage_error(toy):
    tmp, p = toy
    stats = tmp / "stats.json"
    assert run("stats", "--gold", p["gold"], "--out", stats) == 0
    code = run(
        "interleave", "--trans", p["trans"], "--noise", p["trans"], "--stats", stats,
        "--lambda", "0.5", "--out", tmp / "x.tsv",
    )
    assert code == 1


def test_missing_stats_file_is_data_error(toy, capsys):
    tmp, p = toy
    code = run(
        "mask", "--bitexts", p["bitexts"], "--stats", tmp / "absent.json",
        "--seed", 1, "--out", tmp / "m.jsonl",
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "absent.json" in err and "apesynth stats" in err


def test_malformed_corpus_reports_line(toy, capsys):
    tmp, p = toy
    bad = tmp / "bad.tsv"
    bad.write_text("a b\tc d\tx\nonly one field\n", encoding="utf-8")
    code = run("stats", "--gold", bad, "--out", tmp / "s.json")
    assert code == 2
    assert "2" in capsys.readouterr().err


def test_fill_requires_exactly_one_filler(toy):
    tmp, p = toy
    stats = tmp / "stats.json"
    run("stats", "--gold", p["gold"], "--out", stats)
    masked = tmp / "m.jsonl"
    run("mask", "--bitexts", p["bitexts"], "--stats", stats, "--seed", 1, "--out", masked)
    code = run("fill", "--masked", masked, "--bitexts", p["bitexts"], "--out", tmp / "o.tsv")
    assert code == 1


def test_parallel_fill_join_mismatch_errors_not_hangs(toy):
    """A stream-validation failure must surface through the worker pool
    (exceptions cross process boundaries), not deadlock it."""
    tmp, p = toy
    stats = tmp / "stats.json"
    run("stats", "--gold", p["gold"], "--out", stats)
    masked = tmp / "m.jsonl"
    run("mask", "--bitexts", p["bitexts"], "--stats", stats, "--seed", 1, "--out", masked)
    mlm = tmp / "mlm.jsonl"
    run("mlm-data", "--triplets", p["trans"], "--stats", stats, "--seed", 2, "--out", mlm)
    model = tmp / "model.json"
    run("train-filler", "--mlm", mlm, "--out", model)
    other = tmp / "other.tsv"
    write_corpus(make_bitexts(80, seed=999), str(other), "tsv")
    code = run(
        "fill", "--masked", masked, "--bitexts", other, "--model", model,
        "--seed", 3, "--out", tmp / "o.tsv", "--threads", 4,
    )
    assert code == 2


def test_errors_survive_pickling():
    import pickle

    from apesynth.errors import CorpusFormatError, FillerProtocolError, RecordError

    for exc in (
        CorpusFormatError("bad", "f.tsv", 3),
        RecordError(7, "boom"),
        FillerProtocolError("oops", 9),
    ):
        back = pickle.loads(pickle.dumps(exc))
        assert type(back) is type(exc)
        assert str(back) == str(exc)


def test_external_protocol_failure_is_exit_3(toy):
    tmp, p = toy
    stats = tmp / "stats.json"
    run("stats", "--gold", p["gold"], "--out", stats)
    masked = tmp / "m.jsonl"
    run("mask", "--bitexts", p["bitexts"], "--stats", stats, "--seed", 1, "--out", masked)
    bad = tmp / "bad_filler.py"
    bad.write_text("import sys; sys.exit(0)\n", encoding="utf-8")
    code = run(
        "fill", "--masked", masked, "--bitexts", p["bitexts"],
        "--filler-cmd", f"{sys.executable} {bad}", "--out", tmp / "o.tsv",
        "--timeout", 20,
    )
    assert code == 3


def test_threads_do_not_change_bytes(toy):
    tmp, p = toy
    outs = {}
    for threads in (1, 8):
        d = tmp / f"t{threads}"
        d.mkdir()
        stats = d / "stats.json"
        run("stats", "--gold", p["gold"], "--out", stats, "--threads", threads)
        mlm = d / "mlm.jsonl"
        run(
            "mlm-data", "--triplets", p["trans"], "--stats", stats, "--seed", 5,
            "--out", mlm, "--threads", threads,
        )
        masked = d / "masked.jsonl"
        run(
            "mask", "--bitexts", p["bitexts"], "--stats", stats, "--seed", 6,
            "--out", masked, "--threads", threads,
        )
        rand = d / "rand.tsv"
        run(
            "rand", "--bitexts", p["bitexts"], "--stats", stats, "--seed", 7,
            "--out", rand, "--threads", threads,
        )
        outs[threads] = tuple(f.read_bytes() for f in (stats, mlm, masked, rand))
    assert outs[1] == outs[8]


def test_config_file_supplies_defaults(toy):
    tmp, p = toy
    stats = tmp / "stats.json"
    run("stats", "--gold", p["gold"], "--out", stats)
    cfg = tmp / "cfg.toml"
    cfg.write_text('seed = 11\nformat = "tsv"\n', encoding="utf-8")

    out_cfg = tmp / "m_cfg.jsonl"
    run("mask", "--bitexts", p["bitexts"], "--stats", stats, "--config", cfg, "--out", out_cfg)
    out_explicit = tmp / "m_explicit.jsonl"
    run("mask", "--bitexts", p["bitexts"], "--stats", stats, "--seed", 11, "--out", out_explicit)
    assert out_cfg.read_bytes() == out_explicit.read_bytes()

    # explicit flag wins over the config value
    out_override = tmp / "m_override.jsonl"
    run(
        "mask", "--bitexts", p["bitexts"], "--stats", stats, "--config", cfg,
        "--seed", 12, "--out", out_override,
    )
    assert out_override.read_bytes() != out_cfg.read_bytes()


def test_unknown_config_key_is_usage_error(toy):
    tmp, p = toy
    cfg = tmp / "cfg.toml"
    cfg.write_text("sedd = 11\n", encoding="utf-8")
    code = run("stats", "--gold", p["gold"], "--out", tmp / "s.json", "--config", cfg)
    assert code == 1


def test_provenance_sidecar_reproducible(toy):
    tmp, p = toy
    stats = tmp / "stats.json"
    run("stats", "--gold", p["gold"], "--out", stats)
    sidecar = tmp / "stats.json.prov.json"
    doc1 = json.loads(sidecar.read_text())
    assert doc1["tool"] == "apesynth"
    assert str(p["gold"]) in doc1["inputs"]
    assert doc1["artifact"][str(stats)]

    run("stats", "--gold", p["gold"], "--out", stats)
    assert json.loads(sidecar.read_text()) == doc1

    # worker count is execution-only: same provenance bytes
    run("stats", "--gold", p["gold"], "--out", stats, "--threads", "2")
    assert json.loads(sidecar.read_text()) == doc1
