"""Subcommands: pretrain the base model, fine-tune on masked-LM records, serve."""

from __future__ import annotations

import argparse
import sys

from . import data, model as model_mod, training


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlmfiller", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pretrain", help="train the base model on clean references")
    p.add_argument("--bitexts", required=True, help="tab-separated src/ref corpus")
    p.add_argument("--out", required=True, help="model artifact path")
    p.add_argument("--mask-prob", type=float, default=0.15)
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=3e-3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("finetune", help="continue training on masked-LM records")
    p.add_argument("--model", required=True, help="base model artifact")
    p.add_argument("--mlm", required=True, help="JSONL with src/y_mask/y_noise records")
    p.add_argument("--out", required=True, help="fine-tuned artifact path")
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="speak the ape-fill v1 protocol on stdin/stdout")
    p.add_argument("--model", required=True, help="model artifact to serve")
    p.add_argument("--sample", action="store_true", help="temperature sampling instead of top-1")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="sampling seed")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "pretrain":
        records = data.pretrain_records(
            data.read_bitexts(args.bitexts), args.mask_prob, seed=args.seed
        )
        model, vocab, losses = training.train(
            records, epochs=args.epochs, batch_size=args.batch_size,
            lr=args.lr, seed=args.seed,
        )
        model_mod.save_artifact(args.out, model, vocab)
        print(f"pretrain: {len(records)} records, vocab {len(vocab)}, "
              f"loss {losses[0]:.3f} -> {losses[-1]:.3f}", file=sys.stderr)
        return 0
    if args.command == "finetune":
        base, vocab = model_mod.load_artifact(args.model)
        records = list(data.read_mlm_records(args.mlm))
        model, vocab, losses = training.train(
            records, base=base, vocab=vocab, epochs=args.epochs,
            batch_size=args.batch_size, lr=args.lr, seed=args.seed,
        )
        model_mod.save_artifact(args.out, model, vocab)
        print(f"finetune: {len(records)} records, "
              f"loss {losses[0]:.3f} -> {losses[-1]:.3f}", file=sys.stderr)
        return 0
    if args.command == "serve":
        from .serve import serve

        return serve(args.model, sample=args.sample, temperature=args.temperature, seed=args.seed)
    raise AssertionError(args.command)


if __name__ == "__main__":
    sys.exit(main())
