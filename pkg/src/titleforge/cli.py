"""Command-line entry point: build-corpus | train | evaluate | generate | serve."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

log = logging.getLogger(__name__)

_MODE_ALIASES = {
    "hybrid": "prompt_hybrid",
    "hard": "prompt_hard",
    "soft": "prompt_soft",
    "finetune": "finetune",
}
_MODALITY_ALIASES = {"bimodal": "bimodal", "desc": "desc_only", "code": "code_only"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="titleforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-corpus", help="mine a Posts.xml dump into per-language splits")
    p.add_argument("--dump", required=True, type=Path)
    p.add_argument("--langs", required=True, help="comma-separated language tags")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--min-score", type=int, default=10)
    p.add_argument("--valid-rounding", choices=["floor", "nearest"], default="floor")

    p = sub.add_parser("train", help="tune a checkpoint on a built corpus")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--mode", choices=sorted(_MODE_ALIASES), default="hybrid")
    p.add_argument("--modality", choices=sorted(_MODALITY_ALIASES), default="bimodal")
    p.add_argument("--langs", required=True)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--checkpoint", default="Salesforce/codet5-base",
                   help="pretrained encoder-decoder name or local path")
    p.add_argument("--lr", type=float, default=5e-5)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--max-epochs", type=int, default=10)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-src", type=int, default=512)
    p.add_argument("--max-tgt", type=int, default=64)
    p.add_argument("--freeze-backbone", action="store_true")
    p.add_argument("--select-by", choices=["loss", "rouge"], default="loss")
    p.add_argument("--prompt-config", type=Path, help="JSON with kind/modality/prefix overrides")
    p.add_argument("--single-task", action="store_true",
                   help="train one model per language instead of multi-task")

    p = sub.add_parser("evaluate", help="score generated titles on the test splits")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--langs", help="defaults to the languages in the model manifest")
    p.add_argument("--beam", type=int, default=10)
    p.add_argument("--dump", type=Path, help="JSONL of (post_id, generated, reference)")
    p.add_argument("--limit", type=int, help="cap test records per language")

    p = sub.add_parser("generate", help="generate candidate titles for one post")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--lang", required=True)
    p.add_argument("--desc-file", type=Path)
    p.add_argument("--code-file", type=Path)
    p.add_argument("--k", type=int, default=3, help="number of candidates")
    p.add_argument("--beam", type=int, default=10)

    p = sub.add_parser("serve", help="run the HTTP generation service")
    p.add_argument("--model", type=Path)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--max-concurrent", type=int, default=2)
    p.add_argument("--max-queue", type=int, default=8)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--allow-origin", action="append", default=[])
    return parser


def _cmd_build_corpus(args) -> int:
    from .corpus import build_corpus

    langs = [x.strip() for x in args.langs.split(",") if x.strip()]
    splits = build_corpus(
        args.dump, langs, args.out, min_score=args.min_score, valid_rounding=args.valid_rounding
    )
    for lang, split in splits.items():
        print(f"{lang}: train={len(split.train)} valid={len(split.valid)} test={len(split.test)}")
    if not splits:
        print("no language produced enough records to split", file=sys.stderr)
        return 1
    return 0


def _load_corpus(corpus_dir: Path, langs: list[str]):
    from .corpus import read_split

    return {lang: read_split(corpus_dir, lang) for lang in langs}


def _cmd_train(args) -> int:
    from .model import Seq2SeqHandle
    from .prompts import load_prompt_config
    from .training import TrainingConfig, train, train_single_language

    langs = [x.strip() for x in args.langs.split(",") if x.strip()]
    mode = _MODE_ALIASES[args.mode]
    modality = _MODALITY_ALIASES[args.modality]
    prefixes = None
    if args.prompt_config:
        overrides = load_prompt_config(args.prompt_config)
        mode_kind = overrides["kind"].value
        mode = {"hard": "prompt_hard", "soft": "prompt_soft", "hybrid": "prompt_hybrid"}.get(
            mode_kind, mode
        )
        modality = overrides["modality"].value
        prefixes = overrides["prefixes"]
    config_kwargs = dict(
        tasks=langs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        max_src=args.max_src,
        max_tgt=args.max_tgt,
        patience=args.patience,
        max_epochs=args.max_epochs,
        seed=args.seed,
        mode=mode,
        modality=modality,
        freeze_backbone=args.freeze_backbone,
        select_by=args.select_by,
    )
    if prefixes is not None:
        config_kwargs["prefixes"] = prefixes
    config = TrainingConfig(**config_kwargs)
    splits = _load_corpus(args.corpus, langs)
    if args.single_task:
        for lang in langs:
            handle = Seq2SeqHandle.load(args.checkpoint, args.max_src, args.max_tgt)
            state = train_single_language(
                config, splits[lang], handle,
                out_dir=args.out / lang, base_checkpoint=str(args.checkpoint),
            )
            print(f"{lang}: best valid loss {state.best_validation_loss:.4f} "
                  f"-> {state.best_checkpoint_path}")
        return 0
    handle = Seq2SeqHandle.load(args.checkpoint, args.max_src, args.max_tgt)
    state = train(config, splits, handle, out_dir=args.out, base_checkpoint=str(args.checkpoint))
    print(f"best valid loss {state.best_validation_loss:.4f} after epoch {state.epoch}")
    print(f"checkpoint: {state.best_checkpoint_path}")
    return 0


def _cmd_evaluate(args) -> int:
    from .metrics import evaluate_model
    from .model import load_model_state

    state = load_model_state(args.model)
    if args.langs:
        langs = [x.strip() for x in args.langs.split(",") if x.strip()]
    else:
        langs = sorted(state.prefixes)
    test_sets = {}
    for lang in langs:
        path = args.corpus / f"{lang}.test.jsonl"
        if not path.exists():
            log.warning("no test split for %s at %s; skipped", lang, path)
            continue
        from .corpus import read_jsonl

        records = read_jsonl(path)
        test_sets[lang] = records[: args.limit] if args.limit else records
    if not test_sets:
        print("no test splits found", file=sys.stderr)
        return 1
    report = evaluate_model(state, test_sets, beam_size=args.beam, dump_path=args.dump)
    report.write(args.out)
    for lang, scores in report.per_language.items():
        print(
            f"{lang}: ROUGE-L {scores['rouge_l']:.2f} METEOR {scores['meteor']:.2f} "
            f"BLEU-4 {scores['bleu_4']:.2f} CIDEr {scores['cider']:.3f}"
        )
    return 0


def _cmd_generate(args) -> int:
    from .generation import GenerationRequest, generate
    from .model import load_model_state

    description = args.desc_file.read_text(encoding="utf-8") if args.desc_file else ""
    code = args.code_file.read_text(encoding="utf-8") if args.code_file else ""
    state = load_model_state(args.model)
    request = GenerationRequest(
        lang=args.lang,
        description=description,
        code=code,
        num_candidates=args.k,
        beam_size=max(args.beam, args.k),
    )
    result = generate(state, request)
    for title, score in result.candidates:
        print(f"{score:.4f}\t{title}")
    return 0


def _cmd_serve(args) -> int:
    from .service import ServiceConfig, run_service

    config = ServiceConfig.from_env(
        model_dir=args.model,
        host=args.host,
        port=args.port,
        max_concurrent_generations=args.max_concurrent,
        max_queue=args.max_queue,
        request_timeout=args.timeout,
        allowed_origins=args.allow_origin,
    )
    if config.model_dir is None:
        print("no model directory given (flag --model or TITLEFORGE_MODEL_DIR)", file=sys.stderr)
        return 2
    print(f"serving {config.model_dir} on http://{config.host}:{config.port}")
    run_service(config)
    return 0


_COMMANDS = {
    "build-corpus": _cmd_build_corpus,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "generate": _cmd_generate,
    "serve": _cmd_serve,
}


def cli_dispatch(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
