"""Record types and streaming corpus I/O.

Corpora are flat files, one record per line, in two formats:

* ``tsv``   — UTF-8, LF line endings, fields separated by a single tab;
  tokens inside a field separated by whitespace. Bitexts are ``src<TAB>ref``,
  triplets ``src<TAB>mt<TAB>pe``.
* ``jsonl`` — one JSON object per line with token arrays under the field
  names ``src``, ``ref``, ``mt``, ``pe``, ``y_mask``, ``y_noise``.

Record ids are 0-based line ordinals and survive write/read round-trips.
Readers and writers are lazy single-pass streams; memory use is bounded by a
constant number of records regardless of corpus size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import CorpusFormatError

MASK_TOKEN = "<MASK>"

#: A token sequence is an immutable tuple of non-empty token strings.
TokenSeq = tuple[str, ...]

FORMATS = ("tsv", "jsonl")


def tokenize(field: str) -> TokenSeq:
    """Whitespace-split one text field into a token tuple."""
    return tuple(field.split())


def check_tokens(tokens: Iterable[str], field: str, allow_mask: bool = False) -> TokenSeq:
    """Validate a token sequence; returns it as a tuple.

    Tokens must be non-empty strings. The reserved ``<MASK>`` token is only
    legal in masked sequences (``allow_mask=True``); anywhere else it would
    silently corrupt downstream fill results, so it is rejected here.
    """
    toks = tuple(tokens)
    for t in toks:
        if not isinstance(t, str) or not t:
            raise CorpusFormatError(f"empty or non-string token in field {field!r}")
        if not allow_mask and t == MASK_TOKEN:
            raise CorpusFormatError(f"reserved token {MASK_TOKEN} not allowed in field {field!r}")
    return toks


def _check_nonempty(tokens: TokenSeq, field: str) -> TokenSeq:
    if not tokens:
        raise CorpusFormatError(f"field {field!r} is empty")
    return tokens


@dataclass(frozen=True)
class Bitext:
    """One parallel-corpus record: source text and its reference translation."""

    id: int
    src: TokenSeq
    ref: TokenSeq

    def __post_init__(self):
        object.__setattr__(self, "src", _check_nonempty(check_tokens(self.src, "src"), "src"))
        object.__setattr__(self, "ref", _check_nonempty(check_tokens(self.ref, "ref"), "ref"))


@dataclass(frozen=True)
class Triplet:
    """One post-editing record: source, machine translation, post-edit."""

    id: int
    src: TokenSeq
    mt: TokenSeq
    pe: TokenSeq

    def __post_init__(self):
        object.__setattr__(self, "src", _check_nonempty(check_tokens(self.src, "src"), "src"))
        object.__setattr__(self, "mt", _check_nonempty(check_tokens(self.mt, "mt"), "mt"))
        object.__setattr__(self, "pe", _check_nonempty(check_tokens(self.pe, "pe"), "pe"))


@dataclass(frozen=True)
class MlmTrainRecord:
    """Masked-LM training record: masked reference plus its noised counterpart.

    ``y_mask`` and ``y_noise`` have equal length and agree everywhere except
    at ``<MASK>`` positions, where ``y_noise`` carries the error token the
    filler should learn to produce.
    """

    id: int
    src: TokenSeq
    y_mask: TokenSeq
    y_noise: TokenSeq

    def __post_init__(self):
        object.__setattr__(self, "src", _check_nonempty(check_tokens(self.src, "src"), "src"))
        object.__setattr__(
            self, "y_mask", _check_nonempty(check_tokens(self.y_mask, "y_mask", allow_mask=True), "y_mask")
        )
        object.__setattr__(self, "y_noise", _check_nonempty(check_tokens(self.y_noise, "y_noise"), "y_noise"))
        if len(self.y_mask) != len(self.y_noise):
            raise CorpusFormatError(
                f"y_mask/y_noise length mismatch: {len(self.y_mask)} != {len(self.y_noise)}"
            )
        for i, (m, n) in enumerate(zip(self.y_mask, self.y_noise)):
            if m != MASK_TOKEN and m != n:
                raise CorpusFormatError(f"y_mask/y_noise differ at non-mask position {i}: {m!r} != {n!r}")

    @property
    def mask_count(self) -> int:
        return sum(1 for t in self.y_mask if t == MASK_TOKEN)


@dataclass(frozen=True)
class MaskedRecord:
    """Masking output awaiting a filler: source plus masked reference.

    ``y_mask`` may be empty when every reference token drew a deletion op;
    such records are flagged via :attr:`is_empty` and can be dropped before
    filling.
    """

    id: int
    src: TokenSeq
    y_mask: TokenSeq

    def __post_init__(self):
        object.__setattr__(self, "src", _check_nonempty(check_tokens(self.src, "src"), "src"))
        object.__setattr__(self, "y_mask", check_tokens(self.y_mask, "y_mask", allow_mask=True))

    @property
    def is_empty(self) -> bool:
        return len(self.y_mask) == 0

    @property
    def mask_count(self) -> int:
        return sum(1 for t in self.y_mask if t == MASK_TOKEN)


Record = Bitext | Triplet | MlmTrainRecord | MaskedRecord

#: JSONL field layout per record arity, in serialization order.
_JSONL_FIELDS = {
    "bitext": ("src", "ref"),
    "triplet": ("src", "mt", "pe"),
    "mlm": ("src", "y_mask", "y_noise"),
    "masked": ("src", "y_mask"),
}

_ARITY_TYPES = {"bitext": Bitext, "triplet": Triplet, "mlm": MlmTrainRecord, "masked": MaskedRecord}


def _record_fields(record: Record) -> tuple[str, tuple[TokenSeq, ...]]:
    if isinstance(record, Bitext):
        return "bitext", (record.src, record.ref)
    if isinstance(record, Triplet):
        return "triplet", (record.src, record.mt, record.pe)
    if isinstance(record, MlmTrainRecord):
        return "mlm", (record.src, record.y_mask, record.y_noise)
    if isinstance(record, MaskedRecord):
        return "masked", (record.src, record.y_mask)
    raise TypeError(f"not a corpus record: {type(record).__name__}")


def _build_record(arity: str, record_id: int, fields: tuple[TokenSeq, ...]) -> Record:
    return _ARITY_TYPES[arity](record_id, *fields)


def read_corpus(path: str, format: str = "tsv", arity: str = "triplet") -> Iterator[Record]:
    """Stream records from a corpus file.

    ``arity`` selects the record type: ``bitext``, ``triplet``, ``mlm`` or
    ``masked`` (the latter two are jsonl-only since tsv cannot hold empty
    fields or guarantee mask/noise pairing). Ids are line ordinals. Malformed
    lines raise :class:`CorpusFormatError` with the offending line number.
    """
    if format not in FORMATS:
        raise CorpusFormatError(f"unknown format {format!r}; expected one of {FORMATS}")
    if arity not in _JSONL_FIELDS:
        raise CorpusFormatError(f"unknown arity {arity!r}; expected one of {tuple(_JSONL_FIELDS)}")
    if format == "tsv" and arity in ("mlm", "masked"):
        raise CorpusFormatError(f"{arity} records require jsonl; tsv cannot represent them")
    return _read_lines(path, format, arity)


def _read_lines(path: str, format: str, arity: str) -> Iterator[Record]:
    field_names = _JSONL_FIELDS[arity]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            record_id = line_no - 1
            try:
                if format == "tsv":
                    fields = line.split("\t")
                    if len(fields) != len(field_names):
                        raise CorpusFormatError(
                            f"expected {len(field_names)} tab-separated fields for {arity}, got {len(fields)}"
                        )
                    token_fields = tuple(tokenize(f) for f in fields)
                else:
                    token_fields = _parse_jsonl_line(line, field_names)
                yield _build_record(arity, record_id, token_fields)
            except CorpusFormatError as exc:
                raise CorpusFormatError(str(exc), path=path, line_no=line_no) from None


def _parse_jsonl_line(line: str, field_names: tuple[str, ...]) -> tuple[TokenSeq, ...]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"invalid JSON: {exc.msg}")
    if not isinstance(obj, dict):
        raise CorpusFormatError("JSONL line is not an object")
    fields = []
    for name in field_names:
        if name not in obj:
            raise CorpusFormatError(f"missing field {name!r}")
        value = obj[name]
        if not isinstance(value, list):
            raise CorpusFormatError(f"field {name!r} is not a token array")
        fields.append(tuple(value))
    return tuple(fields)


def write_corpus(records: Iterable[Record], path: str, format: str = "tsv") -> int:
    """Write a record stream; returns the record count.

    Round-trip law: reading the written file yields the same token sequences
    in the same order. tsv mode rejects tokens containing whitespace (they
    cannot survive whitespace re-tokenization); jsonl holds any token.
    """
    if format not in FORMATS:
        raise CorpusFormatError(f"unknown format {format!r}; expected one of {FORMATS}")
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            arity, fields = _record_fields(record)
            if format == "tsv":
                if arity in ("mlm", "masked"):
                    raise CorpusFormatError(f"{arity} records require jsonl; tsv cannot represent them")
                for name, toks in zip(_JSONL_FIELDS[arity], fields):
                    for t in toks:
                        if any(c.isspace() for c in t):
                            raise CorpusFormatError(
                                f"token {t!r} in field {name!r} contains whitespace; not representable in tsv"
                            )
                fh.write("\t".join(" ".join(toks) for toks in fields) + "\n")
            else:
                obj = {name: list(toks) for name, toks in zip(_JSONL_FIELDS[arity], fields)}
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_bitexts(path: str, format: str = "tsv") -> Iterator[Bitext]:
    return read_corpus(path, format, "bitext")  # type: ignore[return-value]


def read_triplets(path: str, format: str = "tsv") -> Iterator[Triplet]:
    return read_corpus(path, format, "triplet")  # type: ignore[return-value]


def read_mlm_records(path: str) -> Iterator[MlmTrainRecord]:
    return read_corpus(path, "jsonl", "mlm")  # type: ignore[return-value]


def read_masked_records(path: str) -> Iterator[MaskedRecord]:
    return read_corpus(path, "jsonl", "masked")  # type: ignore[return-value]


def read_plain_text(path: str) -> Iterator[TokenSeq]:
    """Stream whitespace-tokenized lines of a plain text file (one sentence per line)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            toks = tokenize(raw.rstrip("\r\n"))
            if not toks:
                raise CorpusFormatError("empty line", path=path, line_no=line_no)
            yield check_tokens(toks, "text", allow_mask=True)
