"""Gold-corpus statistics driving synthesis: edit-rate distribution and edit-op profile.

Both statistics come from aligning each gold machine translation against its
post-edit. The edit-rate distribution is kept as the full empirical multiset
of per-record rates and resampled as-is (no parametric fit); the op profile
is a categorical over {keep, sub, ins, del} normalized over alignment ops
plus applied shifts, each shift counting as one sub-equivalent edit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .align import Alignment, OpKind, ter_align
from .corpus import Triplet
from .errors import StatsError
from .parallel import ordered_parallel_map

HIST_BIN_WIDTH = 0.05
HIST_MAX = 2.0
_SUMMARY_RTOL = 1e-9

STATS_FORMAT = "apesynth-stats"
STATS_VERSION = 1


def histogram_bins(samples: Iterable[float]) -> list[tuple[float, float, int]]:
    """Fixed-width rate histogram: 0.05 bins over [0, 2), then one open bin [2, inf)."""
    edges = [round(i * HIST_BIN_WIDTH, 10) for i in range(int(HIST_MAX / HIST_BIN_WIDTH) + 1)]
    counts = [0] * (len(edges))  # last slot is the open-ended bin
    for s in samples:
        if s < 0:
            raise StatsError(f"negative edit rate {s}")
        # Rates are ratios of small integers; the epsilon keeps exact bin-edge
        # values (e.g. 3/20) out of the bin below after float rounding.
        idx = int(s / HIST_BIN_WIDTH + 1e-9)
        counts[min(idx, len(edges) - 1)] += 1
    bins = [(edges[i], edges[i + 1], counts[i]) for i in range(len(edges) - 1)]
    bins.append((HIST_MAX, math.inf, counts[-1]))
    return bins


@dataclass(frozen=True)
class EditRateDist:
    """Empirical distribution of normalized edit rates from gold mt-pe pairs."""

    samples: tuple[float, ...]
    mean: float
    stddev: float

    def __post_init__(self):
        if not self.samples:
            raise StatsError("edit-rate distribution needs at least one sample")
        mean, stddev = _summary(self.samples)
        if not (_close(mean, self.mean) and _close(stddev, self.stddev)):
            raise StatsError("stored summary does not match samples")

    @classmethod
    def from_samples(cls, samples: Iterable[float]) -> "EditRateDist":
        s = tuple(float(x) for x in samples)
        if not s:
            raise StatsError("edit-rate distribution needs at least one sample")
        mean, stddev = _summary(s)
        return cls(samples=s, mean=mean, stddev=stddev)

    def histogram(self) -> list[tuple[float, float, int]]:
        return histogram_bins(self.samples)


def _summary(samples: tuple[float, ...]) -> tuple[float, float]:
    arr = np.asarray(samples, dtype=np.float64)
    # Population standard deviation: the values act as distribution descriptors.
    return float(arr.mean()), float(arr.std())


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=_SUMMARY_RTOL, abs_tol=1e-12)


@dataclass(frozen=True)
class ErrorTypeDist:
    """Categorical probabilities of a token position being kept, substituted,
    inserted against, or deleted, as observed in gold alignments."""

    p_keep: float
    p_sub: float
    p_ins: float
    p_del: float

    def __post_init__(self):
        probs = (self.p_keep, self.p_sub, self.p_ins, self.p_del)
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise StatsError(f"probability {p} outside [0, 1]")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise StatsError(f"probabilities sum to {sum(probs)!r}, not 1")

    @classmethod
    def from_counts(cls, keep: int, sub: int, ins: int, delete: int) -> "ErrorTypeDist":
        total = keep + sub + ins + delete
        if total <= 0:
            raise StatsError("no alignment ops to normalize")
        return cls(keep / total, sub / total, ins / total, delete / total)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_keep, self.p_sub, self.p_ins, self.p_del)


def sample_edit_rate(dist: EditRateDist, rng: np.random.Generator) -> float:
    """Uniform draw from the stored rate multiset (empirical resampling)."""
    return dist.samples[int(rng.integers(len(dist.samples)))]


def _align_triplet(t: Triplet, allow_shifts: bool) -> tuple[float, int, int, int, int, int]:
    a = ter_align(t.mt, t.pe, allow_shifts)
    c = a.counts()
    rate = a.distance / len(t.pe)
    return (rate, c[OpKind.MATCH], c[OpKind.SUB], c[OpKind.INS], c[OpKind.DEL], a.shift_count)


def collect_statistics(
    gold: Iterable[Triplet], allow_shifts: bool = False, threads: int = 1
) -> tuple[EditRateDist, ErrorTypeDist]:
    """Single pass over gold triplets producing both statistics.

    Shifted blocks are folded into the sub category (one sub-equivalent edit
    per shift) and into the normalizing op total, since the downstream
    categorical knows only the four op kinds.
    """
    rates: list[float] = []
    keep = sub = ins = delete = 0
    for rate, m, s, i, d, shifts in ordered_parallel_map(
        _align_triplet, gold, threads=threads, allow_shifts=allow_shifts
    ):
        rates.append(rate)
        keep += m
        sub += s + shifts
        ins += i
        delete += d
    if not rates:
        raise StatsError("empty gold stream")
    return EditRateDist.from_samples(rates), ErrorTypeDist.from_counts(keep, sub, ins, delete)


def collect_edit_rate_dist(
    gold: Iterable[Triplet], allow_shifts: bool = False, threads: int = 1
) -> EditRateDist:
    """Edit-rate distribution of a gold corpus (one mt-pe rate per triplet)."""
    return collect_statistics(gold, allow_shifts, threads)[0]


def collect_error_type_dist(
    gold: Iterable[Triplet], allow_shifts: bool = False, threads: int = 1
) -> ErrorTypeDist:
    """Op-type categorical of a gold corpus, normalized over ops plus shifts."""
    return collect_statistics(gold, allow_shifts, threads)[1]


def op_counts_from_alignment(alignment: Alignment) -> tuple[int, int, int, int]:
    """(keep, sub, ins, del) counts with shifts folded into sub."""
    c = alignment.counts()
    return (
        c[OpKind.MATCH],
        c[OpKind.SUB] + alignment.shift_count,
        c[OpKind.INS],
        c[OpKind.DEL],
    )


# --- stats file -----------------------------------------------------------

def stats_to_json(
    rate_dist: EditRateDist,
    error_types: ErrorTypeDist,
    allow_shifts: bool,
    corpus_digest: str | None = None,
    provenance: dict | None = None,
) -> str:
    """Serialize both statistics to the single stats-file JSON document."""
    doc = {
        "format": STATS_FORMAT,
        "version": STATS_VERSION,
        "allow_shifts": allow_shifts,
        "corpus_digest": corpus_digest,
        "edit_rate": {
            "mean": rate_dist.mean,
            "stddev": rate_dist.stddev,
            "samples": list(rate_dist.samples),
            "histogram": [
                {"low": lo, "high": ("inf" if math.isinf(hi) else hi), "count": n}
                for lo, hi, n in rate_dist.histogram()
            ],
        },
        "error_types": {
            "keep": error_types.p_keep,
            "sub": error_types.p_sub,
            "ins": error_types.p_ins,
            "del": error_types.p_del,
        },
    }
    if provenance is not None:
        doc["provenance"] = provenance
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=1)


def save_stats(
    path: str,
    rate_dist: EditRateDist,
    error_types: ErrorTypeDist,
    allow_shifts: bool,
    corpus_digest: str | None = None,
    provenance: dict | None = None,
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(stats_to_json(rate_dist, error_types, allow_shifts, corpus_digest, provenance))
        fh.write("\n")


def load_stats(path: str) -> tuple[EditRateDist, ErrorTypeDist, bool]:
    """Read a stats file; returns (rate distribution, op profile, allow_shifts)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise StatsError(
            f"stats file not found: {path} (produce it with `apesynth stats`)"
        ) from None
    except json.JSONDecodeError as exc:
        raise StatsError(f"stats file {path} is not valid JSON: {exc.msg}") from None
    if doc.get("format") != STATS_FORMAT:
        raise StatsError(f"{path} is not a stats file (format={doc.get('format')!r})")
    try:
        rate_dist = EditRateDist.from_samples(doc["edit_rate"]["samples"])
        et = doc["error_types"]
        error_types = ErrorTypeDist(et["keep"], et["sub"], et["ins"], et["del"])
        allow_shifts = bool(doc["allow_shifts"])
    except KeyError as exc:
        raise StatsError(f"stats file {path} is missing field {exc}") from None
    return rate_dist, error_types, allow_shifts
