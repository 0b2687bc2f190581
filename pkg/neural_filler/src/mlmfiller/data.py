"""Corpus reading and record preparation.

The filler consumes the toolkit's file formats directly (tab-separated
bitexts; JSON-lines masked-LM records with ``src``/``y_mask``/``y_noise``
token arrays) without importing the toolkit: files and the wire protocol are
the whole interface.
"""

from __future__ import annotations

import json
from typing import Iterator

import numpy as np

MASK = "<MASK>"

Record = tuple[list[str], list[str], list[str]]  # src, y_mask, y_noise


def read_bitexts(path: str) -> Iterator[tuple[list[str], list[str]]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            fields = raw.rstrip("\r\n").split("\t")
            if len(fields) != 2:
                raise ValueError(f"{path}:{line_no}: expected 2 tab-separated fields")
            src, ref = (f.split() for f in fields)
            if not src or not ref:
                raise ValueError(f"{path}:{line_no}: empty field")
            yield src, ref


def read_mlm_records(path: str) -> Iterator[Record]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            try:
                obj = json.loads(raw)
                src, y_mask, y_noise = obj["src"], obj["y_mask"], obj["y_noise"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad record ({exc})") from None
            if len(y_mask) != len(y_noise):
                raise ValueError(f"{path}:{line_no}: y_mask/y_noise length mismatch")
            yield src, y_mask, y_noise


def pretrain_records(
    bitexts: Iterator[tuple[list[str], list[str]]],
    mask_prob: float,
    seed: int,
) -> list[Record]:
    """Clean-reconstruction records: random masks whose targets are the
    original reference tokens (at least one mask per record)."""
    rng = np.random.default_rng(seed)
    records: list[Record] = []
    for src, ref in bitexts:
        picks = rng.random(len(ref)) < mask_prob
        if not picks.any():
            picks[int(rng.integers(len(ref)))] = True
        y_mask = [MASK if hit else tok for tok, hit in zip(ref, picks)]
        records.append((src, y_mask, list(ref)))
    return records
