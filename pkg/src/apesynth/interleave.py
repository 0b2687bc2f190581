"""Corpus interleaving: per record, pick the translation-based mt or the
noised reference by how typical the translation's edit rate is.

A translation triplet is kept when its mt-pe edit rate lies within
``lambda * sigma`` of the gold mean rate (the 3-sigma rule); otherwise the
noised triplet for the same bitext is taken. ``lambda = 0`` and
``lambda = inf`` are explicit sentinels selecting the noised corpus and the
translation corpus outright.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .align import edit_rate
from .corpus import Triplet
from .errors import ApeSynthError


@dataclass(frozen=True)
class InterleaveConfig:
    lam: float
    mu_gold: float
    sigma_gold: float
    allow_shifts: bool = False

    def __post_init__(self):
        if self.sigma_gold < 0:
            raise ApeSynthError(f"sigma_gold must be non-negative, got {self.sigma_gold}")
        if not (self.lam == 0 or math.isinf(self.lam) or 1.0 <= self.lam <= 3.0):
            raise ApeSynthError(
                f"lambda must be 0, in [1, 3], or inf; got {self.lam}"
            )


@dataclass
class InterleaveReport:
    total: int = 0
    kept_trans: int = 0
    kept_noise: int = 0

    @property
    def trans_ratio(self) -> float:
        return self.kept_trans / self.total if self.total else 0.0

    @property
    def noise_ratio(self) -> float:
        return self.kept_noise / self.total if self.total else 0.0

    def to_json(self, cfg: InterleaveConfig) -> str:
        doc = {
            "lambda": ("inf" if math.isinf(cfg.lam) else cfg.lam),
            "mu_gold": cfg.mu_gold,
            "sigma_gold": cfg.sigma_gold,
            "allow_shifts": cfg.allow_shifts,
            "total": self.total,
            "kept_trans": self.kept_trans,
            "kept_noise": self.kept_noise,
            "trans_ratio": self.trans_ratio,
            "noise_ratio": self.noise_ratio,
        }
        return json.dumps(doc, sort_keys=True, indent=1)


def select_trans(trans: Triplet, cfg: InterleaveConfig) -> bool:
    """The selection predicate, re-evaluable per record."""
    if cfg.lam == 0:
        return False
    if math.isinf(cfg.lam):
        return True
    rate = edit_rate(trans.mt, trans.pe, cfg.allow_shifts).rate
    return abs(rate - cfg.mu_gold) <= cfg.lam * cfg.sigma_gold


def interleave(
    trans: Iterable[Triplet], noise: Iterable[Triplet], cfg: InterleaveConfig
) -> tuple[Iterator[Triplet], InterleaveReport]:
    """Zip two id-aligned synthetic corpora into one, resolving each record.

    Both streams must cover the same bitexts: ids in lockstep, identical src
    and pe per id. The report's tallies are final once the output stream is
    exhausted.
    """
    report = InterleaveReport()

    def generate() -> Iterator[Triplet]:
        trans_it, noise_it = iter(trans), iter(noise)
        while True:
            t = next(trans_it, None)
            n = next(noise_it, None)
            if t is None and n is None:
                return
            if t is None or n is None:
                longer = "noise" if t is None else "trans"
                raise ApeSynthError(f"corpus length mismatch: {longer} stream has extra records")
            if t.id != n.id:
                raise ApeSynthError(f"id mismatch: trans {t.id} vs noise {n.id}")
            if t.src != n.src:
                raise ApeSynthError(f"record {t.id}: src differs between corpora")
            if t.pe != n.pe:
                raise ApeSynthError(f"record {t.id}: pe differs between corpora")
            keep_trans = select_trans(t, cfg)
            report.total += 1
            if keep_trans:
                report.kept_trans += 1
                yield t
            else:
                report.kept_noise += 1
                yield n

    return generate(), report
