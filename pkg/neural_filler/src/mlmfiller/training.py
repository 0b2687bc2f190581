"""Training loops: clean-reconstruction pretraining and error fine-tuning.

Both phases share one objective: cross-entropy at mask positions over the
packed sequence ``src <sep> y_mask``. Pretraining targets the hidden
reference tokens; fine-tuning targets the erroneous tokens of masked-LM
records, teaching the model to inject translation-style errors instead of
repairing them.
"""

from __future__ import annotations

import torch
from torch import nn

from .data import MASK, Record
from .model import DEFAULT_CONFIG, TinyMaskedLM, build_vocab

IGNORE = -100


def _pack(src: list[str], y_mask: list[str], stoi: dict[str, int], max_len: int) -> tuple[list[int], list[int]]:
    """Input ids ``src <sep> y_mask`` and the offset of the y_mask region.

    The source side is context only; it is truncated first when the packed
    sequence would overflow the position table.
    """
    unk = stoi["<unk>"]
    budget = max_len - len(y_mask) - 1
    if budget < 0:
        raise ValueError(f"masked sequence of {len(y_mask)} tokens exceeds the model window")
    src_ids = [stoi.get(t, unk) for t in src[:max(budget, 0)]]
    ids = src_ids + [stoi["<sep>"]] + [stoi.get(t, unk) for t in y_mask]
    return ids, len(src_ids) + 1


def _batches(records: list[Record], stoi: dict[str, int], max_len: int, batch_size: int):
    for lo in range(0, len(records), batch_size):
        chunk = records[lo:lo + batch_size]
        packed = []
        for src, y_mask, y_noise in chunk:
            ids, offset = _pack(src, y_mask, stoi, max_len)
            labels = [IGNORE] * len(ids)
            for i, (m, n) in enumerate(zip(y_mask, y_noise)):
                if m == MASK:
                    labels[offset + i] = stoi.get(n, stoi["<unk>"])
            packed.append((ids, labels))
        width = max(len(ids) for ids, _ in packed)
        batch_ids = torch.zeros(len(packed), width, dtype=torch.long)
        batch_labels = torch.full((len(packed), width), IGNORE, dtype=torch.long)
        for row, (ids, labels) in enumerate(packed):
            batch_ids[row, : len(ids)] = torch.tensor(ids)
            batch_labels[row, : len(labels)] = torch.tensor(labels)
        yield batch_ids, batch_labels


def train(
    records: list[Record],
    base: TinyMaskedLM | None = None,
    vocab: list[str] | None = None,
    epochs: int = 4,
    batch_size: int = 32,
    lr: float = 3e-3,
    seed: int = 0,
    config: dict | None = None,
) -> tuple[TinyMaskedLM, list[str], list[float]]:
    """Train (or continue training) on records; returns per-epoch mean loss.

    Fresh training builds the vocabulary from the records; continuation
    reuses the base model's, mapping unseen tokens to ``<unk>``.
    """
    if not records:
        raise ValueError("no training records")
    if not any(MASK in y_mask for _, y_mask, _ in records):
        raise ValueError("no mask sites in the training corpus; nothing to learn")

    torch.manual_seed(seed)
    if base is None:
        assert vocab is None or vocab[0] == "<pad>"
        vocab = vocab or build_vocab(
            tok for src, y_mask, y_noise in records for tok in (*src, *y_mask, *y_noise)
        )
        model = TinyMaskedLM(len(vocab), {**DEFAULT_CONFIG, **(config or {})})
    else:
        assert vocab is not None, "continuation needs the base vocabulary"
        model = base

    stoi = {t: i for i, t in enumerate(vocab)}
    max_len = model.config["max_len"]
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss(ignore_index=IGNORE)

    losses: list[float] = []
    model.train()
    for _ in range(epochs):
        total = 0.0
        steps = 0
        for ids, labels in _batches(records, stoi, max_len, batch_size):
            optimizer.zero_grad()
            logits = model(ids)
            loss = loss_fn(logits.view(-1, logits.size(-1)), labels.view(-1))
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            steps += 1
        losses.append(total / steps)
    model.eval()
    return model, vocab, losses
