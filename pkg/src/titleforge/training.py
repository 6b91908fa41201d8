"""Multi-task tuning loop: seeded single-language batches, per-epoch validation, early stopping."""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import torch

from .corpus import CorpusSplit, Quadruplet
from .model import (
    ModelState,
    Seq2SeqHandle,
    SoftPromptBank,
    batch_forward,
    build_soft_bank,
    encode_target,
    load_model_state,
    multitask_loss,
    save_model_state,
)
from .prompts import (
    DEFAULT_PREFIXES,
    Modality,
    TemplateKind,
    build_template,
    render,
    render_finetune,
    resolve_soft_token_id,
)

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


class TrainingMode(str, Enum):
    PROMPT_HYBRID = "prompt_hybrid"
    PROMPT_HARD = "prompt_hard"
    PROMPT_SOFT = "prompt_soft"
    FINETUNE = "finetune"

    @property
    def template_kind(self) -> TemplateKind | None:
        return {
            TrainingMode.PROMPT_HYBRID: TemplateKind.HYBRID,
            TrainingMode.PROMPT_HARD: TemplateKind.HARD,
            TrainingMode.PROMPT_SOFT: TemplateKind.SOFT,
            TrainingMode.FINETUNE: None,
        }[self]


@dataclass
class TrainingConfig:
    tasks: list[str]
    learning_rate: float = 5e-5
    batch_size: int = 16
    max_src: int = 512
    max_tgt: int = 64
    patience: int = 3
    max_epochs: int = 10
    seed: int = 0
    mode: TrainingMode = TrainingMode.PROMPT_HYBRID
    modality: Modality = Modality.BIMODAL
    freeze_backbone: bool = False
    select_by: str = "loss"  # "loss" or "rouge" (validation-subsample generation)
    valid_subsample: int = 32
    prefixes: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_PREFIXES))

    def __post_init__(self):
        self.mode = TrainingMode(self.mode)
        self.modality = Modality(self.modality)
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not self.tasks:
            raise ValueError("at least one task required")
        if self.select_by not in ("loss", "rouge"):
            raise ValueError("select_by must be 'loss' or 'rouge'")
        if self.mode is TrainingMode.FINETUNE and self.freeze_backbone:
            raise ValueError("freeze_backbone leaves nothing to train in finetune mode")


@dataclass
class TrainState:
    epoch: int
    best_validation_loss: float
    epochs_since_improvement: int
    history: list[dict]
    best_checkpoint_path: Path


class EarlyStopTracker:
    """Patience-based stopping on a to-minimize metric; tracks the best epoch."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.best_epoch: int | None = None
        self.since_improvement = 0

    def update(self, epoch: int, value: float) -> bool:
        if value < self.best:
            self.best = value
            self.best_epoch = epoch
            self.since_improvement = 0
            return True
        self.since_improvement += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.since_improvement >= self.patience


def make_task_batches(
    splits: dict[str, CorpusSplit],
    batch_size: int,
    seed: int,
    epoch: int,
) -> list[tuple[str, list[Quadruplet]]]:
    """Single-language batches covering every training example once, in a seeded shuffle."""
    rng = random.Random(seed * 1_000_003 + epoch)
    batches: list[tuple[str, list[Quadruplet]]] = []
    for lang in sorted(splits):
        records = list(splits[lang].train)
        if not records:
            raise ValueError(f"empty training split for {lang}")
        rng.shuffle(records)
        for i in range(0, len(records), batch_size):
            batches.append((lang, records[i : i + batch_size]))
    rng.shuffle(batches)
    return batches


def _render_for_mode(config: TrainingConfig, template, quad, tokenizer, soft_token_id):
    if config.mode is TrainingMode.FINETUNE:
        return render_finetune(quad, tokenizer, max_len=config.max_src, prefixes=config.prefixes)
    return render(
        template, quad, tokenizer,
        max_len=config.max_src, prefixes=config.prefixes, soft_token_id=soft_token_id,
    )


def _dataset_loss(config, template, handle, bank, records, soft_token_id) -> float:
    """Mean per-example token-summed loss over a record list, without gradients."""
    tokenizer = handle.tokenizer
    total, count = 0.0, 0
    with torch.no_grad():
        for i in range(0, len(records), config.batch_size):
            chunk = records[i : i + config.batch_size]
            inputs = [_render_for_mode(config, template, q, tokenizer, soft_token_id) for q in chunk]
            targets = [encode_target(tokenizer, q.title, config.max_tgt) for q in chunk]
            _, loss = batch_forward(handle, bank, inputs, targets)
            total += float(loss) * len(chunk)
            count += len(chunk)
    return total / count


def _validation_rouge(config, state_dirs_unused, handle, bank, template, splits, soft_token_id) -> float:
    """Mean top-1 ROUGE-L over a validation subsample (the literal model-selection reading)."""
    from .generation import GenerationRequest, generate
    from .metrics import make_pair, rouge_l

    manifest = {
        "mode": config.mode.value,
        "max_src": config.max_src,
        "max_tgt": config.max_tgt,
        "prefixes": config.prefixes,
        "template": template.to_dict() if template is not None else None,
        "soft_token_id": soft_token_id,
        "model_version": "in-training",
    }
    live_state = ModelState(handle=handle, bank=bank, manifest=manifest)
    scores = []
    for lang in config.tasks:
        records = splits[lang].valid[: config.valid_subsample]
        for quad in records:
            try:
                request = GenerationRequest(
                    lang=lang, description=quad.description, code=quad.code,
                    num_candidates=1, beam_size=4, max_len=config.max_tgt,
                )
                title = generate(live_state, request).candidates[0][0]
            except Exception as exc:
                log.warning("validation generation failed on %s: %s", quad.source_post_id, exc)
                title = ""
            scores.append(rouge_l(make_pair(title, quad.title)))
    handle.model.train()
    return sum(scores) / len(scores) if scores else 0.0


def _save_best(out_dir, config, handle, bank, template, soft_token_id, base_checkpoint) -> Path:
    best_dir = Path(out_dir) / "best"
    save_model_state(
        best_dir, handle, bank,
        mode=config.mode.value,
        modality=config.modality.value,
        prefixes=config.prefixes,
        template=template,
        soft_token_id=soft_token_id,
        base_checkpoint=base_checkpoint,
    )
    return best_dir


def _restore_best(handle, bank, best_dir) -> None:
    saved = load_model_state(best_dir)
    handle.model.load_state_dict(saved.handle.model.state_dict())
    if bank is not None and saved.bank is not None:
        with torch.no_grad():
            bank.vectors.copy_(saved.bank.vectors)


def train(
    config: TrainingConfig,
    splits: dict[str, CorpusSplit],
    handle: Seq2SeqHandle,
    bank: SoftPromptBank | None = None,
    out_dir: Path = Path("runs/train"),
    base_checkpoint: str = "",
) -> TrainState:
    """Tune the model on every configured task; keep the best-on-validation weights.

    Per optimizer step the loss is the single-language batch loss; the epoch
    validation metric averages per-task validation losses over the task count.
    Stops when the selection metric fails to improve for `patience` epochs or
    at max_epochs; the best checkpoint is persisted, then reloaded into the
    live handle/bank before returning.
    """
    missing = [t for t in config.tasks if t not in splits]
    if missing:
        raise ValueError(f"no splits for tasks {missing}")
    for lang in config.tasks:
        if not splits[lang].train or not splits[lang].valid:
            raise ValueError(f"task {lang} needs nonempty train and valid splits")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)

    kind = config.mode.template_kind
    template = build_template(kind, config.modality) if kind is not None else None
    tokenizer = handle.tokenizer
    soft_token_id = None
    if template is not None and template.soft_segments:
        soft_token_id = resolve_soft_token_id(tokenizer)
        if bank is None:
            bank = build_soft_bank(handle, template, seed=config.seed)
    params: list = []
    if bank is not None:
        params.extend(bank.parameters())
    if config.freeze_backbone:
        handle.model.requires_grad_(False)
    else:
        params.extend(handle.model.parameters())
    if not params:
        raise TrainingError("no trainable parameters")
    optimizer = torch.optim.AdamW(params, lr=config.learning_rate)

    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        dump = {k: (v.value if isinstance(v, Enum) else v) for k, v in vars(config).items()}
        json.dump(dump, fh, indent=2, default=str)
        fh.write("\n")

    tracker = EarlyStopTracker(config.patience)
    history: list[dict] = []
    task_splits = {lang: splits[lang] for lang in config.tasks}
    best_dir: Path | None = None
    history_path = out_dir / "history.jsonl"
    epoch = 0
    with open(history_path, "w", encoding="utf-8") as hist_fh:
        for epoch in range(1, config.max_epochs + 1):
            handle.model.train()
            train_total, train_count = 0.0, 0
            for lang, batch in make_task_batches(task_splits, config.batch_size, config.seed, epoch):
                inputs = [_render_for_mode(config, template, q, tokenizer, soft_token_id) for q in batch]
                targets = [encode_target(tokenizer, q.title, config.max_tgt) for q in batch]
                optimizer.zero_grad()
                _, loss = batch_forward(handle, bank, inputs, targets)
                if not torch.isfinite(loss):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch} on {lang} batch "
                        f"(post ids {[q.source_post_id for q in batch]})"
                    )
                loss.backward()
                optimizer.step()
                train_total += float(loss.detach()) * len(batch)
                train_count += len(batch)
            train_loss = train_total / train_count

            handle.model.eval()
            task_losses = [
                _dataset_loss(config, template, handle, bank, task_splits[lang].valid, soft_token_id)
                for lang in config.tasks
            ]
            valid_loss = float(multitask_loss(task_losses, len(config.tasks)))
            record = {"epoch": epoch, "train_loss": train_loss, "valid_loss": valid_loss}
            if config.select_by == "rouge":
                valid_rouge = _validation_rouge(
                    config, None, handle, bank, template, task_splits, soft_token_id
                )
                record["valid_rouge"] = valid_rouge
                selection_value = -valid_rouge
            else:
                selection_value = valid_loss
            history.append(record)
            hist_fh.write(json.dumps(record) + "\n")
            hist_fh.flush()
            log.info("epoch %d: train %.4f valid %.4f", epoch, train_loss, valid_loss)

            if tracker.update(epoch, selection_value):
                best_dir = _save_best(
                    out_dir, config, handle, bank, template, soft_token_id, base_checkpoint
                )
            if tracker.should_stop:
                log.info("early stop after epoch %d (best epoch %d)", epoch, tracker.best_epoch)
                break

    assert best_dir is not None
    _restore_best(handle, bank, best_dir)
    best_valid = min(h["valid_loss"] for h in history)
    return TrainState(
        epoch=epoch,
        best_validation_loss=best_valid,
        epochs_since_improvement=tracker.since_improvement,
        history=history,
        best_checkpoint_path=best_dir,
    )


def train_single_language(
    config: TrainingConfig,
    split: CorpusSplit,
    handle: Seq2SeqHandle,
    bank: SoftPromptBank | None = None,
    out_dir: Path = Path("runs/single"),
    base_checkpoint: str = "",
) -> TrainState:
    """The no-multitask ablation: one model per language."""
    single = TrainingConfig(**{**vars(config), "tasks": [split.lang]})
    return train(single, {split.lang: split}, handle, bank, out_dir, base_checkpoint)
