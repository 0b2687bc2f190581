"""Corpus-level evaluation: TER, BLEU, and edit-rate distribution reports."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .align import ter_align
from .corpus import TokenSeq
from .errors import ApeSynthError
from .parallel import ordered_parallel_map
from .stats import histogram_bins

BLEU_MAX_ORDER = 4


def _zip_strict(hyps: Iterable[TokenSeq], refs: Iterable[TokenSeq]) -> Iterator[tuple[TokenSeq, TokenSeq]]:
    hyp_it, ref_it = iter(hyps), iter(refs)
    index = 0
    while True:
        h = next(hyp_it, None)
        r = next(ref_it, None)
        if h is None and r is None:
            return
        if h is None or r is None:
            raise ApeSynthError(
                f"hypothesis/reference length mismatch at record {index}: one stream ended early"
            )
        yield h, r
        index += 1


def _pair_edits(pair: tuple[TokenSeq, TokenSeq], allow_shifts: bool) -> tuple[int, int]:
    hyp, ref = pair
    return ter_align(hyp, ref, allow_shifts).distance, len(ref)


def corpus_ter(
    hyps: Iterable[TokenSeq],
    refs: Iterable[TokenSeq],
    allow_shifts: bool = False,
    threads: int = 1,
) -> float:
    """Corpus TER percentage: 100 * total edits / total reference length."""
    edits = 0
    ref_len = 0
    for e, r in ordered_parallel_map(
        _pair_edits, _zip_strict(hyps, refs), threads=threads, allow_shifts=allow_shifts
    ):
        edits += e
        ref_len += r
    if ref_len == 0:
        raise ApeSynthError("empty evaluation corpus")
    return 100.0 * edits / ref_len


def _ngrams(tokens: TokenSeq, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hyps: Iterable[TokenSeq], refs: Iterable[TokenSeq]) -> float:
    """Corpus BLEU-4 with brevity penalty and no smoothing.

    Modified n-gram precisions are pooled over the corpus; any empty n-gram
    order zeroes the score, as in the classic Moses scorer.
    """
    matched = [0] * BLEU_MAX_ORDER
    hyp_total = [0] * BLEU_MAX_ORDER
    hyp_len = 0
    ref_len = 0
    empty = True
    for hyp, ref in _zip_strict(hyps, refs):
        empty = False
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, BLEU_MAX_ORDER + 1):
            hyp_counts = _ngrams(hyp, n)
            ref_counts = _ngrams(ref, n)
            hyp_total[n - 1] += max(len(hyp) - n + 1, 0)
            matched[n - 1] += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    if empty:
        raise ApeSynthError("empty evaluation corpus")

    log_precision = 0.0
    for n in range(BLEU_MAX_ORDER):
        if matched[n] == 0 or hyp_total[n] == 0:
            return 0.0
        log_precision += math.log(matched[n] / hyp_total[n]) / BLEU_MAX_ORDER
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_precision)


@dataclass(frozen=True)
class RateSeries:
    """One corpus's edit-rate distribution, plot-ready."""

    label: str
    count: int
    mean: float
    stddev: float
    bins: tuple[tuple[float, float, int], ...]

    def fractions(self) -> list[float]:
        return [c / self.count for _, _, c in self.bins]


@dataclass(frozen=True)
class DistributionReport:
    series: tuple[RateSeries, ...]

    def to_json(self) -> str:
        doc = {
            "series": [
                {
                    "label": s.label,
                    "count": s.count,
                    "mean": s.mean,
                    "stddev": s.stddev,
                    "histogram": [
                        {
                            "low": lo,
                            "high": ("inf" if math.isinf(hi) else hi),
                            "count": c,
                            "fraction": c / s.count,
                        }
                        for lo, hi, c in s.bins
                    ],
                }
                for s in self.series
            ]
        }
        return json.dumps(doc, sort_keys=True, indent=1)

    def to_csv(self) -> str:
        lines = ["label,bin_low,bin_high,count,fraction"]
        for s in self.series:
            for lo, hi, c in s.bins:
                hi_txt = "inf" if math.isinf(hi) else f"{hi}"
                lines.append(f"{s.label},{lo},{hi_txt},{c},{c / s.count}")
        return "\n".join(lines) + "\n"

    @classmethod
    def combine(cls, reports: Iterable["DistributionReport"]) -> "DistributionReport":
        series: list[RateSeries] = []
        for r in reports:
            series.extend(r.series)
        return cls(series=tuple(series))


def distribution_report(
    pairs: Iterable[tuple[TokenSeq, TokenSeq]],
    allow_shifts: bool = False,
    label: str = "corpus",
    threads: int = 1,
) -> DistributionReport:
    """Edit-rate histogram and summary for a stream of (hyp, ref) pairs.

    Binning matches the gold statistics module, so gold and synthetic
    distributions can be overlaid directly.
    """
    rates = [
        e / r
        for e, r in ordered_parallel_map(_pair_edits, pairs, threads=threads, allow_shifts=allow_shifts)
    ]
    if not rates:
        raise ApeSynthError("empty pair stream")
    n = len(rates)
    mean = sum(rates) / n
    var = sum((x - mean) ** 2 for x in rates) / n
    return DistributionReport(
        series=(
            RateSeries(
                label=label,
                count=n,
                mean=mean,
                stddev=math.sqrt(var),
                bins=tuple(histogram_bins(rates)),
            ),
        )
    )
