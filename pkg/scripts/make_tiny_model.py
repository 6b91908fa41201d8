#!/usr/bin/env python3
"""Build and train a tiny offline model, packaged ready for `titleforge serve`.

Usage: python3 scripts/make_tiny_model.py OUT_DIR [--epochs 30] [--seed 7]

Produces OUT_DIR/model (weights + tokenizer + soft bank + manifest) trained to
memorize a small synthetic corpus, so generation demos and the UI have a model
that answers instantly on a laptop with no downloads.
"""

import argparse
import sys
from pathlib import Path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=Path)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    from titleforge.corpus import split_corpus
    from titleforge.model import Seq2SeqHandle
    from titleforge.testing import build_tiny_checkpoint, synthetic_quadruplets
    from titleforge.training import TrainingConfig, TrainingMode, train

    args.out.mkdir(parents=True, exist_ok=True)
    quads = synthetic_quadruplets(100, langs=("python", "java"), seed=args.seed)
    ckpt = build_tiny_checkpoint(args.out / "base", seed=args.seed, quads=quads)
    splits = {
        lang: split_corpus([q for q in quads if q.lang == lang]) for lang in ("python", "java")
    }
    handle = Seq2SeqHandle.load(ckpt, max_encoder_len=64, max_decoder_len=16)
    config = TrainingConfig(
        tasks=["python", "java"],
        learning_rate=5e-4,
        batch_size=16,
        max_src=64,
        max_tgt=16,
        patience=args.epochs,
        max_epochs=args.epochs,
        seed=args.seed,
        mode=TrainingMode.PROMPT_HYBRID,
    )
    state = train(config, splits, handle, out_dir=args.out / "run", base_checkpoint=str(ckpt))
    model_dir = args.out / "model"
    if model_dir.exists():
        import shutil

        shutil.rmtree(model_dir)
    import shutil

    shutil.copytree(state.best_checkpoint_path, model_dir)
    print(f"model ready: {model_dir}")
    print("try: python3 -m titleforge serve --model", model_dir)
    example = splits["python"].train[0]
    print(f"example request: lang=python description={example.description!r} code={example.code!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
