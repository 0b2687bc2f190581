"""The ape-fill v1 serving loop.

Handshake first, then one JSON response per request line: every ``<MASK>``
replaced with the model's prediction (top-1 by default, temperature sampling
with ``--sample``), all other tokens copied verbatim. Malformed requests get
an error object; the loop never crashes on input.
"""

from __future__ import annotations

import json
import sys

import torch

from .data import MASK
from .model import SPECIALS, TinyMaskedLM, load_artifact
from .training import _pack

PROTOCOL = {"protocol": "ape-fill", "version": 1}


class Filler:
    def __init__(self, model: TinyMaskedLM, vocab: list[str],
                 sample: bool = False, temperature: float = 1.0, seed: int = 0):
        self.model = model
        self.vocab = vocab
        self.stoi = {t: i for i, t in enumerate(vocab)}
        self.sample = sample
        self.temperature = temperature
        self.generator = torch.Generator().manual_seed(seed)
        # never emit padding, separators, unknown markers, or a mask itself
        self.banned = torch.tensor([i for i, t in enumerate(vocab) if t in SPECIALS])

    def fill(self, src: list[str], masked: list[str]) -> list[str]:
        positions = [i for i, t in enumerate(masked) if t == MASK]
        if not positions:
            return list(masked)
        ids, offset = _pack(src, masked, self.stoi, self.model.config["max_len"])
        with torch.no_grad():
            logits = self.model(torch.tensor([ids], dtype=torch.long))[0]
        out = list(masked)
        for pos in positions:
            row = logits[offset + pos].clone()
            row[self.banned] = float("-inf")
            if self.sample:
                probs = torch.softmax(row / self.temperature, dim=-1)
                choice = int(torch.multinomial(probs, 1, generator=self.generator))
            else:
                choice = int(row.argmax())
            out[pos] = self.vocab[choice]
        return out


def _respond(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, ensure_ascii=False) + "\n")
    sys.stdout.flush()


def serve(model_path: str, sample: bool = False, temperature: float = 1.0, seed: int = 0) -> int:
    model, vocab = load_artifact(model_path)
    filler = Filler(model, vocab, sample=sample, temperature=temperature, seed=seed)
    _respond(PROTOCOL)
    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            _respond({"id": None, "error": f"request is not JSON: {exc.msg}"})
            continue
        if not isinstance(obj, dict):
            _respond({"id": None, "error": "request is not an object"})
            continue
        if obj.get("shutdown"):
            break
        rid = obj.get("id")
        try:
            src, masked = obj["src"], obj["masked"]
            if not isinstance(src, list) or not isinstance(masked, list):
                raise TypeError("src and masked must be token arrays")
            filled = filler.fill([str(t) for t in src], [str(t) for t in masked])
        except (KeyError, TypeError, ValueError) as exc:
            _respond({"id": rid, "error": str(exc)})
            continue
        _respond({"id": rid, "filled": filled})
    return 0
