"""Offline fixtures: word-level tokenizer, tiny random checkpoint, synthetic corpora.

Everything here builds deterministically from a seed with no network access,
so smoke training, service tests, and demos can run in sealed environments.
"""

from __future__ import annotations

import math
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path
from types import SimpleNamespace

import torch
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import PreTrainedTokenizerFast, T5Config, T5ForConditionalGeneration

from .corpus import Quadruplet
from .prompts import CODE_SEPARATOR, DEFAULT_PREFIXES, CODE_PHRASE, DESC_PHRASE, TASK_PHRASE

SOFT_TOKEN = "<soft>"

_VERBS = ["parse", "sort", "merge", "cache", "format", "stream", "filter", "encode", "batch", "retry"]
_NOUNS = ["frames", "queues", "tuples", "headers", "cursors", "buffers", "tokens", "indices", "configs", "sockets"]
_ADJS = ["nested", "lazy", "stale", "async", "sparse", "mutable", "chunked", "rotated"]


def synthetic_quadruplets(n: int, langs=("python", "java"), seed: int = 0) -> list[Quadruplet]:
    """Deterministic toy posts whose titles are recoverable from their bodies."""
    rng = random.Random(seed)
    start = datetime(2021, 1, 1, tzinfo=timezone.utc)
    quads = []
    for i in range(n):
        lang = langs[i % len(langs)]
        verb = rng.choice(_VERBS)
        noun = rng.choice(_NOUNS)
        adj = rng.choice(_ADJS)
        key = f"case{i}"
        title = f"how to {verb} {adj} {noun}"
        description = f"{key} my {adj} {noun} will not {verb} cleanly"
        code = f"{key} {noun} = {verb} ( {adj} )"
        quads.append(
            Quadruplet(
                lang=lang,
                title=title,
                description=description,
                code=code,
                creation_date=start + timedelta(hours=i),
                source_post_id=1000 + i,
            )
        )
    return quads


def vocabulary_for(quads, extra_texts=()) -> list[str]:
    words: set[str] = set()
    for quad in quads:
        for text in (quad.title, quad.description, quad.code):
            words.update(text.split())
    for text in extra_texts:
        words.update(text.split())
    for phrase in (DESC_PHRASE, CODE_PHRASE, TASK_PHRASE, CODE_SEPARATOR):
        words.update(phrase.split())
    words.update(DEFAULT_PREFIXES.values())
    return sorted(words)


def build_word_tokenizer(words) -> PreTrainedTokenizerFast:
    vocab = {"<pad>": 0, "</s>": 1, "<unk>": 2, SOFT_TOKEN: 3}
    for word in words:
        if word not in vocab:
            vocab[word] = len(vocab)
    backend = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    backend.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    return PreTrainedTokenizerFast(
        tokenizer_object=backend,
        pad_token="<pad>",
        eos_token="</s>",
        unk_token="<unk>",
        additional_special_tokens=[SOFT_TOKEN],
    )


def build_tiny_checkpoint(
    out_dir: Path,
    seed: int = 0,
    *,
    quads=None,
    d_model: int = 64,
    d_ff: int = 128,
    num_layers: int = 2,
    num_heads: int = 4,
    dropout: float = 0.0,
) -> Path:
    """Save a small randomly initialized encoder-decoder plus tokenizer to out_dir."""
    out_dir = Path(out_dir)
    if quads is None:
        quads = synthetic_quadruplets(120, seed=seed)
    tokenizer = build_word_tokenizer(vocabulary_for(quads))
    config = T5Config(
        vocab_size=len(tokenizer),
        d_model=d_model,
        d_ff=d_ff,
        d_kv=d_model // num_heads,
        num_layers=num_layers,
        num_heads=num_heads,
        dropout_rate=dropout,
        pad_token_id=tokenizer.pad_token_id,
        eos_token_id=tokenizer.eos_token_id,
        decoder_start_token_id=tokenizer.pad_token_id,
    )
    torch.manual_seed(seed)
    model = T5ForConditionalGeneration(config)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    return out_dir


class MiniSeq2Seq(torch.nn.Module):
    """Two-layer smooth encoder-decoder exposing the hooks the checkpoint adapter uses.

    Every op is float64-friendly (tanh, matmul, softmax), so finite-difference
    gradient checks resolve cleanly; production backbones mix float32 internals.
    """

    def __init__(self, vocab_size: int, d_model: int = 16, pad_id: int = 0, eos_id: int = 1, seed: int = 0):
        super().__init__()
        torch.manual_seed(seed)
        self.config = SimpleNamespace(
            d_model=d_model,
            num_heads=1,
            num_layers=2,
            vocab_size=vocab_size,
            pad_token_id=pad_id,
            eos_token_id=eos_id,
            decoder_start_token_id=pad_id,
        )
        self.embed = torch.nn.Embedding(vocab_size, d_model)
        self.enc1 = torch.nn.Linear(d_model, d_model)
        self.enc2 = torch.nn.Linear(d_model, d_model)
        self.query = torch.nn.Linear(d_model, d_model)
        self.out = torch.nn.Linear(d_model, vocab_size)

    def get_input_embeddings(self):
        return self.embed

    def forward(self, input_ids=None, inputs_embeds=None, attention_mask=None, decoder_input_ids=None):
        if inputs_embeds is None:
            inputs_embeds = self.embed(input_ids)
        if attention_mask is None:
            attention_mask = inputs_embeds.new_ones(inputs_embeds.shape[:2])
        hidden = torch.tanh(self.enc2(torch.tanh(self.enc1(inputs_embeds))))
        dec = self.embed(decoder_input_ids)
        scores = self.query(dec) @ hidden.transpose(1, 2) / math.sqrt(hidden.shape[-1])
        scores = scores + (attention_mask.to(scores.dtype) - 1.0).unsqueeze(1) * 1e9
        context = torch.softmax(scores, dim=-1) @ hidden
        logits = self.out(torch.tanh(context + dec))
        return SimpleNamespace(logits=logits)
