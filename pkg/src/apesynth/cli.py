"""Command-line surface: one subcommand per pipeline operation.

Defaults may come from a TOML config file (``--config``); explicit flags win.
Exit codes: 0 success, 1 usage error, 2 data error, 3 external-filler
protocol error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Iterator

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import provenance
from .corpus import (
    MaskedRecord,
    Triplet,
    read_bitexts,
    read_masked_records,
    read_mlm_records,
    read_plain_text,
    read_triplets,
    write_corpus,
)
from .errors import ApeSynthError, FillerProtocolError, RecordError
from .filler import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_MAX_INFLIGHT,
    DEFAULT_TIMEOUT,
    ExternalFiller,
    FillerModel,
    NativeFiller,
    train_native_filler,
)
from .interleave import InterleaveConfig, interleave
from .masker import TokenVocab, mask_corpus, rand_corpus
from .metrics import DistributionReport, corpus_bleu, corpus_ter, distribution_report
from .mlm_data import build_mlm_corpus
from .parallel import default_threads
from .stats import collect_statistics, load_stats, save_stats

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROTOCOL = 3

_CONFIG_KEYS = (
    "seed",
    "threads",
    "allow_shifts",
    "format",
    "lambda",
    "drop_empty",
    "filler_cmd",
    "batch_size",
    "timeout",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's 2
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="apesynth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser, *, seed=False, threads=True, fmt=False, shifts=False):
        p.add_argument("--config", help="TOML file supplying flag defaults")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="64-bit master seed (default 0)")
        if threads:
            p.add_argument("--threads", type=int, default=None, help="worker count (default: cores)")
        if fmt:
            p.add_argument("--format", choices=["tsv", "jsonl"], default=None, help="corpus file format")
        if shifts:
            p.add_argument(
                "--allow-shifts",
                action=argparse.BooleanOptionalAction,
                default=None,
                help="enable block shifts in alignment",
            )

    p = sub.add_parser("stats", help="extract gold edit-rate and error-type statistics")
    p.add_argument("--gold", required=True, help="gold triplet corpus (src, mt, pe)")
    p.add_argument("--out", required=True, help="stats JSON output")
    common(p, fmt=True, shifts=True)

    p = sub.add_parser("mlm-data", help="build masked-LM training records from triplets")
    p.add_argument("--triplets", required=True, help="translation-style triplet corpus")
    p.add_argument("--stats", required=True, help="stats file from `apesynth stats`")
    p.add_argument("--out", required=True, help="output JSONL (src, y_mask, y_noise)")
    common(p, seed=True, fmt=True, shifts=True)

    p = sub.add_parser("mask", help="stochastically mask bitext references")
    p.add_argument("--bitexts", required=True, help="bitext corpus (src, ref)")
    p.add_argument("--stats", required=True, help="stats file supplying the op categorical")
    p.add_argument("--out", required=True, help="output JSONL (src, y_mask)")
    common(p, seed=True, fmt=True)

    p = sub.add_parser("fill", help="fill masked references into synthetic triplets")
    p.add_argument("--masked", required=True, help="masked JSONL from `apesynth mask`")
    p.add_argument("--bitexts", required=True, help="originating bitext corpus (supplies pe)")
    p.add_argument("--bitexts-format", choices=["tsv", "jsonl"], default=None)
    p.add_argument("--model", help="native filler model path (from `apesynth train-filler`)")
    p.add_argument("--filler-cmd", default=None, help="external filler command line")
    p.add_argument("--out", required=True, help="output triplet corpus")
    p.add_argument("--drop-empty", action=argparse.BooleanOptionalAction, default=None,
                   help="skip all-deletion (empty) masked records")
    p.add_argument("--batch-size", type=int, default=None, help="external filler batch size")
    p.add_argument("--timeout", type=float, default=None, help="external filler timeout per batch, seconds")
    common(p, seed=True, fmt=True)

    p = sub.add_parser("rand", help="random-edit noising baseline")
    p.add_argument("--bitexts", required=True, help="bitext corpus (src, ref)")
    p.add_argument("--stats", required=True, help="stats file supplying the op categorical")
    p.add_argument("--out", required=True, help="output triplet corpus")
    common(p, seed=True, fmt=True)

    p = sub.add_parser("interleave", help="merge translation and noised corpora by edit-rate typicality")
    p.add_argument("--trans", required=True, help="translation-based triplet corpus")
    p.add_argument("--noise", required=True, help="noised triplet corpus over the same bitexts")
    p.add_argument("--stats", required=True, help="stats file supplying gold mean/stddev")
    p.add_argument("--lambda", dest="lam", default=None,
                   help="selection width: 0, a value in [1,3], or inf")
    p.add_argument("--out", required=True, help="combined triplet corpus")
    p.add_argument("--report", default=None, help="report JSON path (default: <out>.report.json)")
    common(p, fmt=True, shifts=True)

    p = sub.add_parser("score", help="TER/BLEU between two tokenized text files")
    p.add_argument("--hyp", required=True, help="hypothesis text, one sentence per line")
    p.add_argument("--ref", required=True, help="reference text, one sentence per line")
    p.add_argument("--json", dest="json_out", default=None, help="also write a JSON report here")
    common(p, shifts=True)

    p = sub.add_parser("report-dist", help="edit-rate histograms of one or two triplet corpora")
    p.add_argument("--corpus", required=True, help="triplet corpus (rates from mt vs pe)")
    p.add_argument("--corpus-b", default=None, help="second corpus to overlay")
    p.add_argument("--label", default="corpus_a")
    p.add_argument("--label-b", default="corpus_b")
    p.add_argument("--out", required=True, help="report JSON output")
    p.add_argument("--csv", default=None, help="histogram CSV output")
    common(p, fmt=True, shifts=True)

    p = sub.add_parser("train-filler", help="train the native statistical filler")
    p.add_argument("--mlm", required=True, help="training JSONL from `apesynth mlm-data`")
    p.add_argument("--out", required=True, help="filler model JSON output")
    common(p, threads=False)

    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config file {path}: {exc}") from None
    unknown = set(cfg) - set(_CONFIG_KEYS)
    if unknown:
        raise UsageError(f"config file {path}: unknown keys {sorted(unknown)}")
    return cfg


def _resolve(args: argparse.Namespace, config: dict, key: str, default):
    attr = {"lambda": "lam"}.get(key, key)
    value = getattr(args, attr, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _parse_lambda(raw) -> float:
    if raw is None:
        raise UsageError("--lambda is required (0, a value in [1,3], or inf)")
    if isinstance(raw, str):
        try:
            value = math.inf if raw.strip().lower() in ("inf", "infinity") else float(raw)
        except ValueError:
            raise UsageError(f"invalid --lambda value {raw!r}") from None
    else:
        value = float(raw)
    if not (value == 0 or math.isinf(value) or 1.0 <= value <= 3.0):
        raise UsageError(f"--lambda must be 0, in [1,3], or inf; got {raw}")
    return value


# --- subcommands -----------------------------------------------------------

def _cmd_stats(args, config, argv) -> int:
    fmt = _resolve(args, config, "format", "tsv")
    threads = _resolve(args, config, "threads", default_threads())
    allow_shifts = _resolve(args, config, "allow_shifts", False)
    rate_dist, error_types = collect_statistics(
        read_triplets(args.gold, fmt), allow_shifts=allow_shifts, threads=threads
    )
    save_stats(
        args.out,
        rate_dist,
        error_types,
        allow_shifts=allow_shifts,
        corpus_digest=provenance.file_digest(args.gold),
    )
    provenance.write_sidecar(args.out, argv, seed=None, input_paths=[args.gold])
    n = len(rate_dist.samples)
    print(f"stats: {n} records, mean rate {rate_dist.mean:.4f}, stddev {rate_dist.stddev:.4f}")
    return EXIT_OK


def _cmd_mlm_data(args, config, argv) -> int:
    fmt = _resolve(args, config, "format", "tsv")
    threads = _resolve(args, config, "threads", default_threads())
    seed = _resolve(args, config, "seed", 0)
    rate_dist, _, stats_shifts = load_stats(args.stats)
    allow_shifts = _resolve(args, config, "allow_shifts", stats_shifts)
    records = build_mlm_corpus(
        read_triplets(args.triplets, fmt), rate_dist, seed=seed,
        allow_shifts=allow_shifts, threads=threads,
    )
    n = write_corpus(records, args.out, "jsonl")
    provenance.write_sidecar(args.out, argv, seed=seed, input_paths=[args.triplets, args.stats])
    print(f"mlm-data: {n} records -> {args.out}")
    return EXIT_OK


def _cmd_mask(args, config, argv) -> int:
    fmt = _resolve(args, config, "format", "tsv")
    threads = _resolve(args, config, "threads", default_threads())
    seed = _resolve(args, config, "seed", 0)
    _, mu, _ = load_stats(args.stats)
    records = mask_corpus(read_bitexts(args.bitexts, fmt), mu, seed=seed, threads=threads)
    n = write_corpus(records, args.out, "jsonl")
    provenance.write_sidecar(args.out, argv, seed=seed, input_paths=[args.bitexts, args.stats])
    print(f"mask: {n} records -> {args.out}")
    return EXIT_OK


def _fill_records(args, config, seed) -> Iterator[Triplet]:
    masked_fmt_bitexts = _resolve(args, config, "format", "tsv")
    bitexts_fmt = args.bitexts_format or masked_fmt_bitexts
    drop_empty = _resolve(args, config, "drop_empty", False)

    ref_by_id: dict[int, tuple] = {}

    def joined() -> Iterator[MaskedRecord]:
        bitexts = read_bitexts(args.bitexts, bitexts_fmt)
        for rec in read_masked_records(args.masked):
            b = next(bitexts, None)
            if b is None:
                raise ApeSynthError("masked corpus has more records than the bitext corpus")
            if b.id != rec.id:
                raise ApeSynthError(f"record {rec.id}: id mismatch against bitext {b.id}")
            if b.src != rec.src:
                raise RecordError(rec.id, "src differs between masked corpus and bitexts")
            if rec.is_empty:
                if drop_empty:
                    continue
                raise RecordError(
                    rec.id, "empty masked record (all-deletion draw); pass --drop-empty to skip"
                )
            ref_by_id[rec.id] = (b.src, b.ref)
            yield rec

    if args.filler_cmd and args.model:
        raise UsageError("--model and --filler-cmd are mutually exclusive")
    if args.filler_cmd:
        filler_cmd = args.filler_cmd
    else:
        filler_cmd = None if args.model else config.get("filler_cmd")
    if filler_cmd:
        external = ExternalFiller(
            filler_cmd,
            batch_size=_resolve(args, config, "batch_size", DEFAULT_BATCH_SIZE),
            max_inflight=DEFAULT_MAX_INFLIGHT,
            timeout=_resolve(args, config, "timeout", DEFAULT_TIMEOUT),
        )
        with external:
            for rec, filled in external.fill_stream(joined()):
                src, ref = ref_by_id.pop(rec.id)
                yield Triplet(id=rec.id, src=src, mt=filled, pe=ref)
    elif args.model:
        threads = _resolve(args, config, "threads", default_threads())
        native = NativeFiller(FillerModel.load(args.model), seed=seed, threads=threads)
        for rec, filled in native.fill_stream(joined()):
            src, ref = ref_by_id.pop(rec.id)
            yield Triplet(id=rec.id, src=src, mt=filled, pe=ref)
    else:
        raise UsageError("one of --model or --filler-cmd is required")


def _cmd_fill(args, config, argv) -> int:
    fmt = _resolve(args, config, "format", "tsv")
    seed = _resolve(args, config, "seed", 0)
    n = write_corpus(_fill_records(args, config, seed), args.out, fmt)
    inputs = [args.masked, args.bitexts] + ([args.model] if args.model else [])
    provenance.write_sidecar(args.out, argv, seed=seed, input_paths=inputs)
    print(f"fill: {n} triplets -> {args.out}")
    return EXIT_OK


def _cmd_rand(args, config, argv) -> int:
    fmt = _resolve(args, config, "format", "tsv")
    threads = _resolve(args, config, "threads", default_threads())
    seed = _resolve(args, config, "seed", 0)
    _, mu, _ = load_stats(args.stats)
    vocab = TokenVocab.from_bitexts(read_bitexts(args.bitexts, fmt))
    triplets = rand_corpus(read_bitexts(args.bitexts, fmt), mu, vocab, seed=seed, threads=threads)
    n = write_corpus(triplets, args.out, fmt)
    provenance.write_sidecar(args.out, argv, seed=seed, input_paths=[args.bitexts, args.stats])
    print(f"rand: {n} triplets -> {args.out}")
    return EXIT_OK


def _cmd_interleave(args, config, argv) -> int:
    fmt = _resolve(args, config, "format", "tsv")
    lam = _parse_lambda(args.lam if args.lam is not None else config.get("lambda"))
    rate_dist, _, stats_shifts = load_stats(args.stats)
    allow_shifts = _resolve(args, config, "allow_shifts", stats_shifts)
    cfg = InterleaveConfig(
        lam=lam, mu_gold=rate_dist.mean, sigma_gold=rate_dist.stddev, allow_shifts=allow_shifts
    )
    stream, report = interleave(
        read_triplets(args.trans, fmt), read_triplets(args.noise, fmt), cfg
    )
    n = write_corpus(stream, args.out, fmt)
    report_path = args.report or args.out + ".report.json"
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_json(cfg))
        fh.write("\n")
    for path in (args.out, report_path):
        provenance.write_sidecar(path, argv, seed=None, input_paths=[args.trans, args.noise, args.stats])
    print(
        f"interleave: {n} triplets -> {args.out} "
        f"(trans {report.trans_ratio:.1%}, noise {report.noise_ratio:.1%})"
    )
    return EXIT_OK


def _cmd_score(args, config, argv) -> int:
    threads = _resolve(args, config, "threads", default_threads())
    allow_shifts = _resolve(args, config, "allow_shifts", False)
    hyps = list(read_plain_text(args.hyp))
    refs = list(read_plain_text(args.ref))
    ter = corpus_ter(hyps, refs, allow_shifts=allow_shifts, threads=threads)
    bleu = corpus_bleu(hyps, refs)
    print(f"TER: {ter:.2f}")
    print(f"BLEU: {bleu:.2f}")
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(
                {"ter": ter, "bleu": bleu, "allow_shifts": allow_shifts, "pairs": len(refs)},
                fh,
                sort_keys=True,
                indent=1,
            )
            fh.write("\n")
        provenance.write_sidecar(args.json_out, argv, seed=None, input_paths=[args.hyp, args.ref])
    return EXIT_OK


def _cmd_report_dist(args, config, argv) -> int:
    fmt = _resolve(args, config, "format", "tsv")
    threads = _resolve(args, config, "threads", default_threads())
    allow_shifts = _resolve(args, config, "allow_shifts", False)

    def pairs(path):
        return ((t.mt, t.pe) for t in read_triplets(path, fmt))

    reports = [distribution_report(pairs(args.corpus), allow_shifts, args.label, threads)]
    inputs = [args.corpus]
    if args.corpus_b:
        reports.append(distribution_report(pairs(args.corpus_b), allow_shifts, args.label_b, threads))
        inputs.append(args.corpus_b)
    report = DistributionReport.combine(reports)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    provenance.write_sidecar(args.out, argv, seed=None, input_paths=inputs)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_csv())
        provenance.write_sidecar(args.csv, argv, seed=None, input_paths=inputs)
    for s in report.series:
        print(f"report-dist: {s.label}: {s.count} records, mean {s.mean:.4f}, stddev {s.stddev:.4f}")
    return EXIT_OK


def _cmd_train_filler(args, config, argv) -> int:
    model = train_native_filler(read_mlm_records(args.mlm))
    model.save(args.out)
    provenance.write_sidecar(args.out, argv, seed=None, input_paths=[args.mlm])
    print(f"train-filler: {len(model.unigram)} error tokens -> {args.out}")
    return EXIT_OK


_COMMANDS = {
    "stats": _cmd_stats,
    "mlm-data": _cmd_mlm_data,
    "mask": _cmd_mask,
    "fill": _cmd_fill,
    "rand": _cmd_rand,
    "interleave": _cmd_interleave,
    "score": _cmd_score,
    "report-dist": _cmd_report_dist,
    "train-filler": _cmd_train_filler,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config)
        return _COMMANDS[args.command](args, config, [parser.prog, *argv])
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FillerProtocolError as exc:
        print(f"filler protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (ApeSynthError, FileNotFoundError, PermissionError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
