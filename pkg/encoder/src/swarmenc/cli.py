"""Command-line front end: train a checkpoint, serve embeddings."""

from __future__ import annotations

import argparse
import sys

from .augment import AugmentParams
from .serve import serve
from .train import TrainConfig, desk_config, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmenc",
                                     description="behavior-encoder training and serving")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a contrastive encoder on a .swbd corpus")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--preset", choices=("paper", "desk"), default="desk")
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--temperature", type=float, default=0.5)
    p.add_argument("--optimizer", choices=("lars", "sgd"), default="lars")
    p.add_argument("--pretrained", action="store_true",
                   help="ImageNet trunk init (downloads weights)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="serve a checkpoint over the wire protocol")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--tcp", default=None, metavar="HOST:PORT",
                   help="listen on TCP instead of stdio")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        kwargs = dict(temperature=args.temperature, optimizer=args.optimizer,
                      pretrained=args.pretrained, seed=args.seed,
                      augment=AugmentParams())
        if args.batch is not None:
            kwargs["batch_size"] = args.batch
        if args.epochs is not None:
            kwargs["epochs"] = args.epochs
        config = TrainConfig(**kwargs) if args.preset == "paper" else desk_config(**kwargs)
        checkpoint = train(args.dataset, config, checkpoint_path=args.out,
                           log=lambda msg: print(msg, file=sys.stderr))
        print(f"checkpoint -> {args.out} (final loss {checkpoint['epoch_losses'][-1]:.4f})",
              file=sys.stderr)
        return 0
    if args.command == "serve":
        transport = f"tcp:{args.tcp}" if args.tcp else "stdio"
        return serve(args.checkpoint, transport,
                     log=lambda msg: print(f"[swarmenc] {msg}", file=sys.stderr))
    return 2


if __name__ == "__main__":
    sys.exit(main())
