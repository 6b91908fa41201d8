"""Prompt templates: hard/soft/hybrid layouts, language-prefix rendering, soft-token init."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .corpus import Quadruplet

DESC_PHRASE = "The problem description:"
CODE_PHRASE = "The code snippet:"
TASK_PHRASE = "Generate the question title:"
CODE_SEPARATOR = "<code>"
SOFT_MARKER = "[SOFT]"

# Only the JavaScript prefix is prescribed upstream; the rest are short,
# unambiguous, lowercase, and overridable via config.
DEFAULT_PREFIXES = {
    "python": "py:",
    "java": "java:",
    "c#": "cs:",
    "javascript": "js:",
    "php": "php:",
    "html": "html:",
}

MAX_ENCODER_LEN = 512


class PromptError(ValueError):
    pass


class TemplateKind(str, Enum):
    HARD = "hard"
    SOFT = "soft"
    HYBRID = "hybrid"


class Modality(str, Enum):
    BIMODAL = "bimodal"
    DESC_ONLY = "desc_only"
    CODE_ONLY = "code_only"


class SegmentKind(str, Enum):
    LITERAL = "literal"
    SLOT_X = "slot_x"
    SLOT_Y = "slot_y"
    SLOT_Z = "slot_z"
    SOFT = "soft"


@dataclass(frozen=True)
class TemplateSegment:
    kind: SegmentKind
    text: str = ""  # literal token text, or the soft segment's init phrase ("" = random init)


@dataclass(frozen=True)
class PromptTemplate:
    kind: TemplateKind
    segments: tuple[TemplateSegment, ...]

    def __post_init__(self):
        slots = [s for s in self.segments if s.kind in (SegmentKind.SLOT_X, SegmentKind.SLOT_Y, SegmentKind.SLOT_Z)]
        z = [s for s in self.segments if s.kind is SegmentKind.SLOT_Z]
        if len(z) != 1:
            raise PromptError("template must contain exactly one answer slot")
        if slots[-1].kind is not SegmentKind.SLOT_Z or self.segments[-1].kind is not SegmentKind.SLOT_Z:
            raise PromptError("answer slot must come last")
        if self.kind is TemplateKind.HARD and any(s.kind is SegmentKind.SOFT for s in self.segments):
            raise PromptError("hard templates carry no soft segments")

    @property
    def soft_segments(self) -> list[TemplateSegment]:
        return [s for s in self.segments if s.kind is SegmentKind.SOFT]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "segments": [{"kind": s.kind.value, "text": s.text} for s in self.segments],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PromptTemplate":
        return cls(
            kind=TemplateKind(obj["kind"]),
            segments=tuple(TemplateSegment(SegmentKind(s["kind"]), s["text"]) for s in obj["segments"]),
        )


@dataclass(frozen=True)
class ModelInput:
    token_ids: tuple[int, ...]
    soft_positions: dict[int, int]  # encoder position -> soft parameter row
    attention_mask: tuple[int, ...]

    def __post_init__(self):
        if len(self.token_ids) != len(self.attention_mask):
            raise PromptError("mask length mismatch")


def build_template(kind: TemplateKind, modality: Modality = Modality.BIMODAL) -> PromptTemplate:
    """Assemble the prompt layout for one template kind and input modality."""
    kind = TemplateKind(kind)
    modality = Modality(modality)
    lit, soft = SegmentKind.LITERAL, SegmentKind.SOFT
    want_desc = modality is not Modality.CODE_ONLY
    want_code = modality is not Modality.DESC_ONLY

    segments: list[TemplateSegment] = []
    if want_desc:
        if kind is TemplateKind.SOFT:
            segments.append(TemplateSegment(soft, DESC_PHRASE))
        else:
            segments.append(TemplateSegment(lit, DESC_PHRASE))
        segments.append(TemplateSegment(SegmentKind.SLOT_X))
    if want_code:
        if kind is TemplateKind.SOFT:
            segments.append(TemplateSegment(soft, CODE_PHRASE))
        else:
            segments.append(TemplateSegment(lit, CODE_PHRASE))
        segments.append(TemplateSegment(SegmentKind.SLOT_Y))
    if kind is TemplateKind.HARD:
        segments.append(TemplateSegment(lit, TASK_PHRASE))
    else:
        segments.append(TemplateSegment(soft, TASK_PHRASE))
    segments.append(TemplateSegment(SegmentKind.SLOT_Z))
    return PromptTemplate(kind=kind, segments=tuple(segments))


def resolve_soft_token_id(tokenizer) -> int:
    """Reserved placeholder id whose static embedding is always overridden."""
    for name in ("<soft>", "<extra_id_99>", "<extra_id_0>"):
        tid = tokenizer.convert_tokens_to_ids(name)
        if tid is not None and tid != tokenizer.unk_token_id:
            return tid
    raise PromptError("tokenizer exposes no reserved token usable as the soft placeholder")


def _encode(tokenizer, text: str) -> list[int]:
    if not text:
        return []
    return list(tokenizer.encode(text, add_special_tokens=False))


def soft_init_spec(template: PromptTemplate, tokenizer) -> list[tuple[int, list[int] | None]]:
    """Per soft segment: token ids of its init phrase, or None for random init."""
    softs = template.soft_segments
    if not softs:
        raise PromptError("template has no soft segments")
    spec = []
    for index, seg in enumerate(softs):
        ids = _encode(tokenizer, seg.text) if seg.text else []
        spec.append((index, ids if ids else None))
    return spec


def soft_widths(template: PromptTemplate, tokenizer) -> list[int]:
    """Expansion width of each soft segment: one parameter per init-phrase token, minimum 1."""
    return [max(1, len(_encode(tokenizer, seg.text))) for seg in template.soft_segments]


def total_soft_width(template: PromptTemplate, tokenizer) -> int:
    return sum(soft_widths(template, tokenizer)) if template.soft_segments else 0


def _allocate(budget: int, d: int, c: int) -> tuple[int, int]:
    # Proportional tail truncation; a nonempty channel keeps at least one token.
    if d + c <= budget:
        return d, c
    if budget <= 0:
        raise PromptError("prompt scaffolding leaves no room for the inputs")
    d_keep = min(d, max(1 if d else 0, budget * d // (d + c)))
    c_keep = min(c, budget - d_keep)
    d_keep = min(d, budget - c_keep)
    return d_keep, c_keep


def _prefix_for(lang: str, prefixes: dict[str, str]) -> str:
    try:
        return prefixes[lang]
    except KeyError:
        raise PromptError(f"no registered prefix for language {lang!r}") from None


def render(
    template: PromptTemplate,
    quad: Quadruplet,
    tokenizer,
    max_len: int = MAX_ENCODER_LEN,
    prefixes: dict[str, str] | None = None,
    soft_token_id: int | None = None,
) -> ModelInput:
    """Token-level encoder input: [LANG] prefix, literals, filled slots, soft placeholders.

    The answer slot is the decoder's target, never part of the encoder input.
    Literal, prefix, and soft tokens are reserved first; the remaining budget
    is split between description and code proportionally to their untruncated
    lengths, truncating each from the tail.
    """
    prefixes = DEFAULT_PREFIXES if prefixes is None else prefixes
    prefix = _prefix_for(quad.lang, prefixes)
    has_x = any(s.kind is SegmentKind.SLOT_X for s in template.segments)
    has_y = any(s.kind is SegmentKind.SLOT_Y for s in template.segments)
    desc = quad.description if has_x else ""
    code = quad.code if has_y else ""
    if not desc.strip() and not code.strip():
        raise PromptError("no input modality")
    if template.soft_segments and soft_token_id is None:
        soft_token_id = resolve_soft_token_id(tokenizer)

    prefix_ids = _encode(tokenizer, prefix)
    desc_ids = _encode(tokenizer, desc)
    code_ids = _encode(tokenizer, code)
    literal_ids = {id(s): _encode(tokenizer, s.text) for s in template.segments if s.kind is SegmentKind.LITERAL}
    widths = iter(soft_widths(template, tokenizer))

    eos = [tokenizer.eos_token_id] if tokenizer.eos_token_id is not None else []
    reserved = len(prefix_ids) + sum(len(v) for v in literal_ids.values())
    reserved += total_soft_width(template, tokenizer) + len(eos)
    d_keep, c_keep = _allocate(max_len - reserved, len(desc_ids), len(code_ids))
    desc_ids = desc_ids[:d_keep]
    code_ids = code_ids[:c_keep]

    token_ids: list[int] = list(prefix_ids)
    soft_positions: dict[int, int] = {}
    soft_row = 0
    for seg in template.segments:
        if seg.kind is SegmentKind.LITERAL:
            token_ids.extend(literal_ids[id(seg)])
        elif seg.kind is SegmentKind.SLOT_X:
            token_ids.extend(desc_ids)
        elif seg.kind is SegmentKind.SLOT_Y:
            token_ids.extend(code_ids)
        elif seg.kind is SegmentKind.SOFT:
            for _ in range(next(widths)):
                soft_positions[len(token_ids)] = soft_row
                token_ids.append(soft_token_id)
                soft_row += 1
        # SLOT_Z is intentionally skipped.
    token_ids.extend(eos)
    if len(token_ids) > max_len:
        raise PromptError(f"rendered input of {len(token_ids)} tokens exceeds {max_len}")
    return ModelInput(
        token_ids=tuple(token_ids),
        soft_positions=soft_positions,
        attention_mask=tuple([1] * len(token_ids)),
    )


def render_finetune(
    quad: Quadruplet,
    tokenizer,
    max_len: int = MAX_ENCODER_LEN,
    prefixes: dict[str, str] | None = None,
) -> ModelInput:
    """Prompt-free input for the fine-tuning baseline: [LANG] desc <code> code."""
    prefixes = DEFAULT_PREFIXES if prefixes is None else prefixes
    prefix = _prefix_for(quad.lang, prefixes)
    if not quad.description.strip() and not quad.code.strip():
        raise PromptError("no input modality")
    prefix_ids = _encode(tokenizer, prefix)
    sep_ids = _encode(tokenizer, CODE_SEPARATOR)
    desc_ids = _encode(tokenizer, quad.description)
    code_ids = _encode(tokenizer, quad.code)
    eos = [tokenizer.eos_token_id] if tokenizer.eos_token_id is not None else []
    budget = max_len - len(prefix_ids) - len(sep_ids) - len(eos)
    d_keep, c_keep = _allocate(budget, len(desc_ids), len(code_ids))
    token_ids = prefix_ids + desc_ids[:d_keep] + sep_ids + code_ids[:c_keep] + eos
    return ModelInput(
        token_ids=tuple(token_ids),
        soft_positions={},
        attention_mask=tuple([1] * len(token_ids)),
    )


def render_text(
    template: PromptTemplate,
    quad: Quadruplet,
    prefixes: dict[str, str] | None = None,
    soft_marker: str = SOFT_MARKER,
) -> str:
    """Human-readable rendering (soft segments as markers); the golden-file surface."""
    prefixes = DEFAULT_PREFIXES if prefixes is None else prefixes
    pieces = [_prefix_for(quad.lang, prefixes)]
    for seg in template.segments:
        if seg.kind is SegmentKind.LITERAL:
            pieces.append(seg.text)
        elif seg.kind is SegmentKind.SLOT_X:
            pieces.append(quad.description)
        elif seg.kind is SegmentKind.SLOT_Y:
            pieces.append(quad.code)
        elif seg.kind is SegmentKind.SOFT:
            pieces.append(soft_marker)
    return " ".join(p for p in pieces if p)


def render_finetune_text(quad: Quadruplet, prefixes: dict[str, str] | None = None) -> str:
    prefixes = DEFAULT_PREFIXES if prefixes is None else prefixes
    pieces = [_prefix_for(quad.lang, prefixes), quad.description, CODE_SEPARATOR, quad.code]
    return " ".join(p for p in pieces if p)


def load_prompt_config(path: Path) -> dict:
    """Config file: {"kind": ..., "modality": ..., "prefixes": {...}} with defaults filled in."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    prefixes = dict(DEFAULT_PREFIXES)
    prefixes.update(raw.get("prefixes", {}))
    values = {p for p in prefixes.values()}
    if len(values) != len(prefixes):
        raise PromptError("prefix strings must be distinct per language")
    return {
        "kind": TemplateKind(raw.get("kind", "hybrid")),
        "modality": Modality(raw.get("modality", "bimodal")),
        "prefixes": {k.lower(): v.lower() for k, v in prefixes.items()},
    }
