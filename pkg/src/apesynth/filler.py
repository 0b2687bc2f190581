"""Mask fillers: turn masked references into noised ones.

Two implementations stand behind one duck-typed surface (``fill_stream``):

* :class:`NativeFiller` — a context-conditioned categorical model tabulated
  from masked-LM training records. Each mask site is keyed by its left/right
  neighbors in the masked sequence (mask tokens count as context symbols);
  lookups back off trigram -> bigram -> unigram, so sampling never fails.
* :class:`ExternalFiller` — a client for any child process speaking the
  "ape-fill" v1 line protocol (one JSON object per line over stdin/stdout).
  Every response is validated: same length, no surviving masks, context
  tokens untouched, ids matched. Violations raise, never pass silently.

``synthesize_triplets`` composes masking and filling into finished triplets.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable, Iterator, Sequence

import numpy as np

from .corpus import MASK_TOKEN, Bitext, MaskedRecord, MlmTrainRecord, TokenSeq, Triplet
from .errors import FillerProtocolError, FillerTrainingError, RecordError
from .masker import mask_reference
from .parallel import ordered_parallel_map
from .seeding import record_rng, stage_seed
from .stats import ErrorTypeDist

BOS = "<s>"
EOS = "</s>"

PROTOCOL_NAME = "ape-fill"
PROTOCOL_VERSION = 1

DEFAULT_BATCH_SIZE = 64
DEFAULT_MAX_INFLIGHT = 4
DEFAULT_TIMEOUT = 60.0


# --- native filler ---------------------------------------------------------

@dataclass
class FillerModel:
    """Backoff tables mapping mask context to error-token counts."""

    trigram: dict[tuple[str, str], dict[str, int]] = field(default_factory=dict)
    bigram: dict[str, dict[str, int]] = field(default_factory=dict)
    unigram: dict[str, int] = field(default_factory=dict)

    def observe(self, left: str, right: str, target: str) -> None:
        self.trigram.setdefault((left, right), {}).setdefault(target, 0)
        self.trigram[(left, right)][target] += 1
        self.bigram.setdefault(left, {}).setdefault(target, 0)
        self.bigram[left][target] += 1
        self.unigram[target] = self.unigram.get(target, 0) + 1

    def to_json(self) -> str:
        doc = {
            "format": "apesynth-filler",
            "version": 1,
            "trigram": [
                [l, r, sorted(counts.items())]
                for (l, r), counts in sorted(self.trigram.items())
            ],
            "bigram": [[l, sorted(counts.items())] for l, counts in sorted(self.bigram.items())],
            "unigram": sorted(self.unigram.items()),
        }
        return json.dumps(doc, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "FillerModel":
        doc = json.loads(text)
        if doc.get("format") != "apesynth-filler":
            raise FillerTrainingError(f"not a filler model file (format={doc.get('format')!r})")
        model = cls()
        model.trigram = {(l, r): dict((t, c) for t, c in counts) for l, r, counts in doc["trigram"]}
        model.bigram = {l: dict((t, c) for t, c in counts) for l, counts in doc["bigram"]}
        model.unigram = dict((t, c) for t, c in doc["unigram"])
        return model

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "FillerModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _contexts(y_mask: TokenSeq) -> Iterator[tuple[int, str, str]]:
    """(position, left, right) for each mask site, with sentence sentinels."""
    for i, tok in enumerate(y_mask):
        if tok == MASK_TOKEN:
            left = y_mask[i - 1] if i > 0 else BOS
            right = y_mask[i + 1] if i + 1 < len(y_mask) else EOS
            yield i, left, right


def train_native_filler(records: Iterable[MlmTrainRecord]) -> FillerModel:
    """Tabulate context -> error-token counts from every mask site."""
    model = FillerModel()
    sites = 0
    for rec in records:
        for i, left, right in _contexts(rec.y_mask):
            model.observe(left, right, rec.y_noise[i])
            sites += 1
    if sites == 0:
        raise FillerTrainingError("no mask sites in the training stream; nothing to learn")
    return model


def _sample_counts(counts: dict[str, int], rng: np.random.Generator) -> str:
    items = sorted(counts.items())
    cum = list(accumulate(c for _, c in items))
    i = int(rng.integers(cum[-1]))
    return items[bisect_right(cum, i)][0]


def fill(model: FillerModel, rec: MaskedRecord, rng: np.random.Generator) -> TokenSeq:
    """Replace each mask by a backoff-sampled token; everything else verbatim.

    Context keys come from the masked sequence as-is, left to right; fills do
    not feed back into later contexts, keeping sites independent.
    """
    out = list(rec.y_mask)
    for i, left, right in _contexts(rec.y_mask):
        counts = model.trigram.get((left, right)) or model.bigram.get(left) or model.unigram
        if not counts:
            raise FillerTrainingError("filler model has no unigram table; train it first")
        out[i] = _sample_counts(counts, rng)
    return tuple(out)


def _native_fill_worker(rec: MaskedRecord, model: FillerModel, seed: int) -> tuple[MaskedRecord, TokenSeq]:
    try:
        return rec, fill(model, rec, record_rng(seed, rec.id))
    except FillerTrainingError:
        raise
    except Exception as exc:
        raise RecordError(rec.id, str(exc)) from exc


class NativeFiller:
    """Streaming adapter for the native model; per-record rng keyed by (seed, id)
    makes the fill a parallel map whose output is worker-count invariant."""

    def __init__(self, model: FillerModel, seed: int, threads: int = 1):
        self.model = model
        self.seed = seed
        self.threads = threads

    def fill_stream(self, records: Iterable[MaskedRecord]) -> Iterator[tuple[MaskedRecord, TokenSeq]]:
        return ordered_parallel_map(
            _native_fill_worker, records, threads=self.threads, model=self.model, seed=self.seed
        )


# --- external filler -------------------------------------------------------

def validate_fill(masked: TokenSeq, filled: Sequence[str], record_id: int) -> TokenSeq:
    """Enforce the fill contract: length kept, masks gone, context verbatim."""
    if not isinstance(filled, (list, tuple)) or not all(isinstance(t, str) for t in filled):
        raise FillerProtocolError("filled is not an array of token strings", record_id)
    if len(filled) != len(masked):
        raise FillerProtocolError(
            f"length changed: sent {len(masked)} tokens, got {len(filled)}", record_id
        )
    for i, (m, f) in enumerate(zip(masked, filled)):
        if m == MASK_TOKEN:
            if f == MASK_TOKEN:
                raise FillerProtocolError(f"mask survived at position {i}", record_id)
            if not f:
                raise FillerProtocolError(f"empty fill at position {i}", record_id)
        elif f != m:
            raise FillerProtocolError(
                f"context token mutated at position {i}: {m!r} -> {f!r}", record_id
            )
    return tuple(filled)


class _LineReader(threading.Thread):
    """Pumps child stdout lines into a queue so reads can time out."""

    def __init__(self, stream):
        super().__init__(daemon=True)
        self.stream = stream
        self.lines: queue.Queue = queue.Queue()

    def run(self):
        try:
            for line in self.stream:
                self.lines.put(line)
        finally:
            self.lines.put(None)  # EOF marker

    def get(self, timeout: float) -> str | None:
        try:
            return self.lines.get(timeout=timeout)
        except queue.Empty:
            raise FillerProtocolError(f"no response within {timeout} s") from None


class ExternalFiller:
    """Client for a child process speaking the ape-fill v1 protocol.

    Requests are pipelined up to ``max_inflight * batch_size`` records ahead;
    responses may arrive in any order and are re-sequenced by id.
    """

    def __init__(
        self,
        command: str | Sequence[str],
        batch_size: int = DEFAULT_BATCH_SIZE,
        max_inflight: int = DEFAULT_MAX_INFLIGHT,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        self.command = command
        self.batch_size = batch_size
        self.max_inflight = max_inflight
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._reader: _LineReader | None = None

    def __enter__(self) -> "ExternalFiller":
        self._proc = subprocess.Popen(
            self.command,
            shell=isinstance(self.command, str),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._reader = _LineReader(self._proc.stdout)
        self._reader.start()
        self._handshake()
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _handshake(self) -> None:
        line = self._reader.get(self.timeout)
        if line is None:
            raise FillerProtocolError("filler exited before handshake")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            raise FillerProtocolError(f"handshake is not JSON: {line!r}") from None
        if obj.get("protocol") != PROTOCOL_NAME or obj.get("version") != PROTOCOL_VERSION:
            raise FillerProtocolError(f"unsupported handshake: {obj!r}")

    def _send(self, obj: dict) -> None:
        try:
            self._proc.stdin.write(json.dumps(obj, ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise FillerProtocolError("filler process closed its input") from None

    def _recv(self) -> dict:
        line = self._reader.get(self.timeout)
        if line is None:
            raise FillerProtocolError("filler exited mid-stream")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            raise FillerProtocolError(f"response is not JSON: {line.strip()!r}") from None
        if not isinstance(obj, dict):
            raise FillerProtocolError(f"response is not an object: {obj!r}")
        return obj

    def fill_stream(self, records: Iterable[MaskedRecord]) -> Iterator[tuple[MaskedRecord, TokenSeq]]:
        if self._proc is None:
            raise FillerProtocolError("filler not started; use it as a context manager")
        pending: dict[int, MaskedRecord] = {}
        done: dict[int, TokenSeq] = {}
        order: deque[int] = deque()
        limit = self.max_inflight * self.batch_size
        source = iter(records)
        exhausted = False

        while True:
            while not exhausted and len(pending) < limit:
                rec = next(source, None)
                if rec is None:
                    exhausted = True
                    break
                if rec.id in pending or rec.id in done:
                    raise FillerProtocolError("duplicate record id in input", rec.id)
                pending[rec.id] = rec
                order.append(rec.id)
                self._send({"id": rec.id, "src": list(rec.src), "masked": list(rec.y_mask)})
            while order and order[0] in done:
                rid = order.popleft()
                yield pending.pop(rid), done.pop(rid)
            if not pending:
                if exhausted:
                    return
                continue
            obj = self._recv()
            rid = obj.get("id")
            if rid not in pending:
                raise FillerProtocolError(f"response for unknown id {rid!r}")
            if "error" in obj:
                raise FillerProtocolError(f"filler error: {obj['error']}", rid)
            if "filled" not in obj:
                raise FillerProtocolError("response lacks 'filled'", rid)
            done[rid] = validate_fill(pending[rid].y_mask, obj["filled"], rid)

    def close(self) -> None:
        if self._proc is None:
            return
        try:
            if self._proc.poll() is None:
                self._send({"shutdown": True})
                self._proc.stdin.close()
                self._proc.wait(timeout=self.timeout)
        except (FillerProtocolError, subprocess.TimeoutExpired):
            self._proc.kill()
            self._proc.wait()
        finally:
            self._proc = None
            self._reader = None


# --- composition -----------------------------------------------------------

def synthesize_triplets(
    bitexts: Iterable[Bitext],
    mu: ErrorTypeDist,
    filler,
    seed: int,
    drop_empty: bool = True,
) -> Iterator[Triplet]:
    """Mask every reference, fill the masks, and emit (src, noised, ref).

    Masking draws from the "mask" stage sub-seed of ``seed``; a seed-bearing
    filler (e.g. :class:`NativeFiller`) should be constructed with
    ``stage_seed(seed, "fill")`` so the two stages stay independent.
    All-deletion records are dropped when ``drop_empty`` (a filler cannot
    fill an empty sequence), otherwise they raise.
    """
    mask_seed = stage_seed(seed, "mask")
    ref_by_id: dict[int, Bitext] = {}

    def tee_masked() -> Iterator[MaskedRecord]:
        for b in bitexts:
            rec = mask_reference(b, mu, record_rng(mask_seed, b.id))
            if rec.is_empty:
                if drop_empty:
                    continue
                raise RecordError(b.id, "all-deletion masking left an empty reference")
            ref_by_id[rec.id] = b
            yield rec

    for rec, filled in filler.fill_stream(tee_masked()):
        b = ref_by_id.pop(rec.id)
        yield Triplet(id=rec.id, src=b.src, mt=filled, pe=b.ref)
