"""Deterministic beam-search decoding over a trained model state."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import torch

from .model import ModelState
from .prompts import ModelInput, PromptError, render, render_finetune

log = logging.getLogger(__name__)

DEFAULT_BEAM_SIZE = 10
DEFAULT_MAX_LEN = 64


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PromptSource:
    """Bare (lang, description, code) triple accepted by the renderers."""

    lang: str
    description: str = ""
    code: str = ""


@dataclass
class GenerationRequest:
    lang: str
    description: str = ""
    code: str = ""
    num_candidates: int = 3
    beam_size: int = DEFAULT_BEAM_SIZE
    max_len: int = DEFAULT_MAX_LEN

    def __post_init__(self):
        if not self.description.strip() and not self.code.strip():
            raise ValueError("no input modality")
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if not 1 <= self.num_candidates <= self.beam_size:
            raise ValueError("num_candidates must lie in [1, beam_size]")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")


@dataclass
class GenerationResult:
    candidates: list[tuple[str, float]]  # (title, score), scores non-increasing
    model_manifest: str


def beam_search(
    step_fn,
    *,
    beam_size: int,
    max_len: int,
    eos_id: int | None = None,
    length_normalize: bool = True,
    num_candidates: int | None = None,
) -> list[tuple[tuple[int, ...], float]]:
    """Length-bounded beam search over a next-token log-probability function.

    step_fn(prefixes) maps a list of token-id prefixes (all the same length) to
    an array [len(prefixes), vocab] of log-probabilities. A hypothesis is
    complete when it emits eos_id (finalized while it ranks above the step's
    beam cutoff) or reaches max_len. Returned scores are total log-probability,
    divided by token count when length_normalize is on. Ties break toward the
    lexicographically smaller token sequence, so decoding is deterministic.
    """
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    num_candidates = beam_size if num_candidates is None else num_candidates
    live_tokens: list[tuple[int, ...]] = [()]
    live_scores = np.zeros(1)
    done: list[tuple[tuple[int, ...], float]] = []
    for _ in range(max_len):
        if not live_tokens:
            break
        logprobs = np.asarray(step_fn([list(t) for t in live_tokens]), dtype=float)
        if logprobs.shape[0] != len(live_tokens):
            raise ValueError("step_fn returned wrong batch size")
        vocab = logprobs.shape[1]
        flat = (live_scores[:, None] + logprobs).reshape(-1)
        order = np.argsort(-flat, kind="stable")
        next_tokens: list[tuple[int, ...]] = []
        next_scores: list[float] = []
        for idx in order:
            row, tok = divmod(int(idx), vocab)
            candidate = live_tokens[row] + (tok,)
            score = float(flat[idx])
            if eos_id is not None and tok == eos_id:
                done.append((candidate, score))
            else:
                next_tokens.append(candidate)
                next_scores.append(score)
            if len(next_tokens) >= beam_size:
                break
        live_tokens = next_tokens
        live_scores = np.asarray(next_scores)
    done.extend(zip(live_tokens, live_scores.tolist()))

    def rank_key(item):
        tokens, score = item
        value = score / len(tokens) if length_normalize and tokens else score
        return (-value, tokens)

    ranked = sorted(done, key=rank_key)
    out = []
    for tokens, score in ranked[:num_candidates]:
        value = score / len(tokens) if length_normalize and tokens else score
        out.append((tokens, value))
    return out


class _EncoderDecoderStepper:
    """Batched next-token log-probabilities for an encoded input, used by beam search."""

    def __init__(self, state: ModelState, model_input: ModelInput):
        handle = state.handle
        device = next(handle.model.parameters()).device
        ids = torch.tensor([model_input.token_ids], dtype=torch.long, device=device)
        self.mask = torch.tensor([model_input.attention_mask], dtype=torch.long, device=device)
        embeds = handle.embed(ids)
        if state.bank is not None and model_input.soft_positions:
            positions = sorted(model_input.soft_positions.items())
            p_idx = torch.tensor([p for p, _ in positions], device=device)
            v_idx = torch.tensor([r for _, r in positions], device=device)
            embeds = embeds.index_put(
                (torch.zeros_like(p_idx), p_idx), state.bank.vectors[v_idx].to(embeds.dtype)
            )
        with torch.no_grad():
            self.encoder_outputs = handle.model.get_encoder()(
                inputs_embeds=embeds, attention_mask=self.mask
            )
        self.handle = handle
        self.device = device

    def __call__(self, prefixes):
        handle = self.handle
        batch = len(prefixes)
        start = handle.decoder_start_id
        dec = torch.tensor([[start] + list(p) for p in prefixes], dtype=torch.long, device=self.device)
        hidden = self.encoder_outputs.last_hidden_state.expand(batch, -1, -1)
        mask = self.mask.expand(batch, -1)
        with torch.no_grad():
            out = self.handle.model(
                encoder_outputs=(hidden,),
                attention_mask=mask,
                decoder_input_ids=dec,
            )
            logprobs = torch.log_softmax(out.logits[:, -1, :].float(), dim=-1)
        return logprobs.cpu().numpy()


def render_request(state: ModelState, request: GenerationRequest) -> ModelInput:
    source = PromptSource(lang=request.lang, description=request.description, code=request.code)
    manifest = state.manifest
    if manifest["mode"] == "finetune":
        return render_finetune(
            source, state.handle.tokenizer, max_len=manifest["max_src"], prefixes=state.prefixes
        )
    template = state.template
    if template is None:
        raise GenerationError("manifest carries no template for a prompt-tuned model")
    return render(
        template,
        source,
        state.handle.tokenizer,
        max_len=manifest["max_src"],
        prefixes=state.prefixes,
        soft_token_id=manifest.get("soft_token_id"),
    )


def generate(
    state: ModelState,
    request: GenerationRequest,
    length_normalize: bool = True,
) -> GenerationResult:
    """Top-k candidate titles for one request via beam search; deterministic."""
    state.handle.eval()
    model_input = render_request(state, request)
    stepper = _EncoderDecoderStepper(state, model_input)
    max_len = min(request.max_len, state.manifest.get("max_tgt", DEFAULT_MAX_LEN))
    hypotheses = beam_search(
        stepper,
        beam_size=request.beam_size,
        max_len=max_len,
        eos_id=state.handle.eos_id,
        length_normalize=length_normalize,
        num_candidates=request.beam_size,
    )
    tokenizer = state.handle.tokenizer
    candidates: list[tuple[str, float]] = []
    for tokens, score in hypotheses:
        title = tokenizer.decode(list(tokens), skip_special_tokens=True).strip()
        if title:
            candidates.append((title, score))
        if len(candidates) == request.num_candidates:
            break
    if not candidates:
        raise GenerationError("decoder produced no nonempty candidates")
    return GenerationResult(candidates=candidates, model_manifest=state.version)
