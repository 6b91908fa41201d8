"""Checkpoint adapter: trainable soft-prompt bank, token-level NLL, multi-task loss, save/load."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch
import transformers.utils.logging
from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

transformers.utils.logging.disable_progress_bar()

from .prompts import (
    Modality,
    ModelInput,
    PromptTemplate,
    TemplateKind,
    soft_init_spec,
    soft_widths,
)

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SOFT_BANK_NAME = "soft_prompt.pt"
FORMAT_VERSION = 1


class ModelStateError(RuntimeError):
    """Saved model directory is inconsistent with its manifest."""


@dataclass
class ModelConfig:
    d_model: int = 768
    num_heads: int = 12
    num_layers: int = 12
    vocab_size: int = 32100
    max_encoder_len: int = 512
    max_decoder_len: int = 64

    def __post_init__(self):
        if self.d_model % self.num_heads:
            raise ValueError(f"d_model {self.d_model} not divisible by num_heads {self.num_heads}")
        for name in ("d_model", "num_heads", "num_layers", "vocab_size", "max_encoder_len", "max_decoder_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def d_k(self) -> int:
        return self.d_model // self.num_heads

    @classmethod
    def from_backend(cls, model, max_encoder_len=512, max_decoder_len=64) -> "ModelConfig":
        cfg = model.config
        return cls(
            d_model=cfg.d_model,
            num_heads=cfg.num_heads,
            num_layers=cfg.num_layers,
            vocab_size=cfg.vocab_size,
            max_encoder_len=max_encoder_len,
            max_decoder_len=max_decoder_len,
        )


class Seq2SeqHandle:
    """Thin wrapper over a pretrained encoder-decoder checkpoint and its tokenizer."""

    def __init__(self, model, tokenizer, config: ModelConfig | None = None):
        self.model = model
        self.tokenizer = tokenizer
        self.config = config or ModelConfig.from_backend(model)

    @classmethod
    def load(cls, name_or_path, max_encoder_len=512, max_decoder_len=64) -> "Seq2SeqHandle":
        model = AutoModelForSeq2SeqLM.from_pretrained(name_or_path)
        tokenizer = AutoTokenizer.from_pretrained(name_or_path)
        return cls(model, tokenizer, ModelConfig.from_backend(model, max_encoder_len, max_decoder_len))

    @property
    def pad_id(self) -> int:
        return self.model.config.pad_token_id

    @property
    def eos_id(self) -> int:
        return self.model.config.eos_token_id

    @property
    def decoder_start_id(self) -> int:
        return self.model.config.decoder_start_token_id

    def embed(self, token_ids: torch.Tensor) -> torch.Tensor:
        return self.model.get_input_embeddings()(token_ids)

    def eval(self) -> "Seq2SeqHandle":
        self.model.eval()
        return self


class SoftPromptBank(torch.nn.Module):
    """Trainable continuous embeddings substituted at soft placeholder positions."""

    def __init__(self, vectors: torch.Tensor, init_source: list[int | None]):
        super().__init__()
        if vectors.shape[0] != len(init_source):
            raise ValueError("one init source entry per soft vector required")
        if not torch.isfinite(vectors).all():
            raise ValueError("soft prompt vectors must be finite")
        self.vectors = torch.nn.Parameter(vectors.clone())
        self.init_source = list(init_source)

    def __len__(self) -> int:
        return self.vectors.shape[0]


def build_soft_bank(handle: Seq2SeqHandle, template: PromptTemplate, seed: int = 0) -> SoftPromptBank | None:
    """One parameter row per soft expansion position, initialized from the phrase embeddings."""
    if not template.soft_segments:
        return None
    spec = dict(soft_init_spec(template, handle.tokenizer))
    widths = soft_widths(template, handle.tokenizer)
    embedding = handle.model.get_input_embeddings().weight.detach()
    gen = torch.Generator().manual_seed(seed)
    rows, sources = [], []
    for index, width in enumerate(widths):
        ids = spec[index]
        if ids is None:
            rows.append(torch.normal(0.0, 0.02, (width, embedding.shape[1]), generator=gen))
            sources.extend([None] * width)
        else:
            rows.append(embedding[torch.tensor(ids)].clone())
            sources.extend(ids)
    return SoftPromptBank(torch.cat(rows, dim=0), sources)


def encode_target(tokenizer, title: str, max_len: int) -> list[int]:
    ids = list(tokenizer.encode(title, add_special_tokens=False))[: max_len - 1]
    return ids + [tokenizer.eos_token_id]


def sequence_nll(logits: torch.Tensor, target_ids: torch.Tensor, pad_id: int | None = None) -> torch.Tensor:
    """Sum over target positions of -log P(target_t); pad positions excluded."""
    if logits.shape[0] != target_ids.shape[0]:
        raise ValueError("logits/target length mismatch")
    if target_ids.numel() and (target_ids.max() >= logits.shape[-1] or target_ids.min() < 0):
        raise ValueError("target id out of vocabulary range")
    # float64 keeps the summed loss accurate to ~1e-12 even over large vocabularies
    log_probs = torch.log_softmax(logits.to(torch.float64), dim=-1)
    picked = log_probs.gather(-1, target_ids.unsqueeze(-1)).squeeze(-1)
    if pad_id is not None:
        picked = picked * (target_ids != pad_id)
    return -picked.sum()


def _shift_right(targets: torch.Tensor, start_id: int, pad_id: int) -> torch.Tensor:
    shifted = targets.new_full(targets.shape, pad_id)
    shifted[:, 0] = start_id
    shifted[:, 1:] = targets[:, :-1]
    return shifted


def _embed_with_soft(handle: Seq2SeqHandle, bank: SoftPromptBank | None, batch_ids: torch.Tensor,
                     batch_soft: Sequence[dict[int, int]]) -> torch.Tensor:
    embeds = handle.embed(batch_ids)
    if bank is None:
        return embeds
    rows = []
    for b, mapping in enumerate(batch_soft):
        for pos, row in mapping.items():
            if row >= len(bank):
                raise ValueError(f"soft position references row {row} outside bank of {len(bank)}")
            rows.append((b, pos, row))
    if rows:
        b_idx = torch.tensor([r[0] for r in rows])
        p_idx = torch.tensor([r[1] for r in rows])
        v_idx = torch.tensor([r[2] for r in rows])
        embeds = embeds.index_put((b_idx, p_idx), bank.vectors[v_idx])
    return embeds


def batch_forward(
    handle: Seq2SeqHandle,
    bank: SoftPromptBank | None,
    inputs: Sequence[ModelInput],
    targets: Sequence[Sequence[int]],
) -> tuple[torch.Tensor, torch.Tensor]:
    """Teacher-forced logits and mean-over-examples of per-example token-summed NLL."""
    if len(inputs) != len(targets):
        raise ValueError("inputs/targets length mismatch")
    pad = handle.pad_id
    device = next(handle.model.parameters()).device
    src_len = max(len(mi.token_ids) for mi in inputs)
    tgt_len = max(len(t) for t in targets)
    batch_ids = torch.full((len(inputs), src_len), pad, dtype=torch.long, device=device)
    mask = torch.zeros((len(inputs), src_len), dtype=torch.long, device=device)
    labels = torch.full((len(inputs), tgt_len), pad, dtype=torch.long, device=device)
    for i, (mi, tgt) in enumerate(zip(inputs, targets)):
        batch_ids[i, : len(mi.token_ids)] = torch.tensor(mi.token_ids, device=device)
        mask[i, : len(mi.token_ids)] = 1
        labels[i, : len(tgt)] = torch.tensor(list(tgt), device=device)
    for mi in inputs:
        for tid in mi.token_ids:
            if tid >= handle.config.vocab_size or tid < 0:
                raise ValueError(f"token id {tid} out of range for vocab {handle.config.vocab_size}")
    embeds = _embed_with_soft(handle, bank, batch_ids, [mi.soft_positions for mi in inputs])
    decoder_input = _shift_right(labels, handle.decoder_start_id, pad)
    out = handle.model(inputs_embeds=embeds, attention_mask=mask, decoder_input_ids=decoder_input)
    per_example = []
    for i, tgt in enumerate(targets):
        per_example.append(sequence_nll(out.logits[i, : len(tgt)], labels[i, : len(tgt)], pad_id=None))
    loss = torch.stack(per_example).mean()
    return out.logits, loss


def forward_with_prompts(
    handle: Seq2SeqHandle,
    bank: SoftPromptBank | None,
    model_input: ModelInput,
    target_ids: Sequence[int],
) -> tuple[torch.Tensor, torch.Tensor]:
    """Single-example loss: encoder embeddings with soft rows substituted, summed decoder NLL."""
    if len(target_ids) > handle.config.max_decoder_len:
        raise ValueError(f"target of {len(target_ids)} tokens exceeds {handle.config.max_decoder_len}")
    logits, loss = batch_forward(handle, bank, [model_input], [list(target_ids)])
    return logits[0], loss


def multitask_loss(task_losses: Sequence, num_tasks: int) -> torch.Tensor | float:
    """Arithmetic mean of per-task losses over the configured task count."""
    losses = list(task_losses)
    if not losses:
        raise ValueError("no task losses supplied")
    if num_tasks <= 0:
        raise ValueError("num_tasks must be positive")
    if isinstance(losses[0], torch.Tensor):
        return torch.stack([torch.as_tensor(x) for x in losses]).sum() / num_tasks
    return sum(losses) / num_tasks


def _digest_files(paths: Sequence[Path]) -> str:
    digest = hashlib.sha256()
    for path in sorted(paths):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()[:16]


def _integrity_files(model_dir: Path) -> list[Path]:
    model_dir = Path(model_dir)
    keep = {".safetensors", ".bin", ".pt"}
    files = [p for p in model_dir.iterdir() if p.is_file() and p.suffix in keep]
    tokenizer_json = model_dir / "tokenizer.json"
    if tokenizer_json.exists():
        files.append(tokenizer_json)
    return files


@dataclass
class ModelState:
    """A loaded, generation-ready artifact: backbone, bank, and its manifest."""

    handle: Seq2SeqHandle
    bank: SoftPromptBank | None
    manifest: dict

    @property
    def version(self) -> str:
        return self.manifest["model_version"]

    @property
    def prefixes(self) -> dict[str, str]:
        return self.manifest["prefixes"]

    @property
    def template(self) -> PromptTemplate | None:
        if self.manifest.get("template") is None:
            return None
        return PromptTemplate.from_dict(self.manifest["template"])


def save_model_state(
    out_dir: Path,
    handle: Seq2SeqHandle,
    bank: SoftPromptBank | None,
    *,
    mode: str,
    modality: str,
    prefixes: dict[str, str],
    template: PromptTemplate | None,
    soft_token_id: int | None,
    base_checkpoint: str = "",
    extra: dict | None = None,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    handle.model.save_pretrained(out_dir)
    handle.tokenizer.save_pretrained(out_dir)
    if bank is not None:
        torch.save(
            {"vectors": bank.vectors.detach().cpu(), "init_source": bank.init_source},
            out_dir / SOFT_BANK_NAME,
        )
    manifest = {
        "format_version": FORMAT_VERSION,
        "mode": mode,
        "modality": modality,
        "prefixes": prefixes,
        "template": template.to_dict() if template is not None else None,
        "soft_token_id": soft_token_id,
        "max_src": handle.config.max_encoder_len,
        "max_tgt": handle.config.max_decoder_len,
        "base_checkpoint": base_checkpoint,
        "model_version": _digest_files(_integrity_files(out_dir)),
    }
    if extra:
        manifest.update(extra)
    with open(out_dir / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return out_dir


def load_model_state(model_dir: Path) -> ModelState:
    model_dir = Path(model_dir)
    manifest_path = model_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise ModelStateError(f"{model_dir} has no {MANIFEST_NAME}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    handle = Seq2SeqHandle.load(model_dir, manifest.get("max_src", 512), manifest.get("max_tgt", 64))
    handle.eval()
    bank = None
    bank_path = model_dir / SOFT_BANK_NAME
    if bank_path.exists():
        payload = torch.load(bank_path, weights_only=True)
        bank = SoftPromptBank(payload["vectors"], list(payload["init_source"]))
    if _digest_files(_integrity_files(model_dir)) != manifest.get("model_version"):
        raise ModelStateError("weights do not match the manifest model_version")
    template_dict = manifest.get("template")
    if template_dict is not None:
        template = PromptTemplate.from_dict(template_dict)
        expected_rows = sum(soft_widths(template, handle.tokenizer)) if template.soft_segments else 0
        found_rows = len(bank) if bank is not None else 0
        if expected_rows != found_rows:
            raise ModelStateError(
                f"soft bank holds {found_rows} rows but the template expands to {expected_rows}"
            )
        if bank is not None and bank.vectors.shape[1] != handle.config.d_model:
            raise ModelStateError("soft bank width does not match the checkpoint hidden size")
    return ModelState(handle=handle, bank=bank, manifest=manifest)
