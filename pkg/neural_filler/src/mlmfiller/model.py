"""A small transformer masked LM and its on-disk artifact format."""

from __future__ import annotations

import torch
from torch import nn

PAD, UNK, SEP = "<pad>", "<unk>", "<sep>"
MASK = "<MASK>"
SPECIALS = (PAD, UNK, SEP, MASK)

DEFAULT_CONFIG = {
    "d_model": 64,
    "heads": 4,
    "layers": 2,
    "ff": 128,
    "max_len": 256,
}


def build_vocab(token_iter) -> list[str]:
    """Specials first, then corpus tokens in first-seen order."""
    vocab = list(SPECIALS)
    seen = set(vocab)
    for tok in token_iter:
        if tok not in seen:
            seen.add(tok)
            vocab.append(tok)
    return vocab


class TinyMaskedLM(nn.Module):
    def __init__(self, vocab_size: int, config: dict):
        super().__init__()
        d = config["d_model"]
        self.config = dict(config)
        self.embed = nn.Embedding(vocab_size, d, padding_idx=0)
        self.pos = nn.Embedding(config["max_len"], d)
        layer = nn.TransformerEncoderLayer(
            d_model=d,
            nhead=config["heads"],
            dim_feedforward=config["ff"],
            batch_first=True,
            dropout=0.1,
        )
        self.encoder = nn.TransformerEncoder(
            layer, num_layers=config["layers"], enable_nested_tensor=False
        )
        self.head = nn.Linear(d, vocab_size)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        pad_mask = ids.eq(0)
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        x = self.embed(ids) + self.pos(positions)
        x = self.encoder(x, src_key_padding_mask=pad_mask)
        return self.head(x)


def save_artifact(path: str, model: TinyMaskedLM, vocab: list[str]) -> None:
    torch.save(
        {"format": "mlm-filler", "version": 1, "config": model.config,
         "vocab": vocab, "state": model.state_dict()},
        path,
    )


def load_artifact(path: str) -> tuple[TinyMaskedLM, list[str]]:
    doc = torch.load(path, map_location="cpu", weights_only=True)
    if doc.get("format") != "mlm-filler":
        raise ValueError(f"{path} is not a filler model artifact")
    model = TinyMaskedLM(len(doc["vocab"]), doc["config"])
    model.load_state_dict(doc["state"])
    model.eval()
    return model, doc["vocab"]
