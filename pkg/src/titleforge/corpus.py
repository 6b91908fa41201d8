"""Stack Exchange dump mining: quality rules, quadruplet extraction, chronological splits."""

from __future__ import annotations

import json
import logging
import re
import statistics
import xml.parsers.expat
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from html.parser import HTMLParser
from pathlib import Path
from typing import BinaryIO, Callable, Iterable, Iterator, Sequence

log = logging.getLogger(__name__)

DEFAULT_MIN_SCORE = 10
SPLIT_RATIOS = (0.8, 0.1, 0.1)
SPLIT_NAMES = ("train", "valid", "test")

_REQUIRED_ATTRS = ("Id", "CreationDate", "Body")


class PostType(Enum):
    QUESTION = "question"
    ANSWER = "answer"
    OTHER = "other"


class DumpParseError(ValueError):
    """Malformed XML in a Posts.xml stream."""


class ExtractionError(ValueError):
    """Post body yields no usable code channel."""


@dataclass(frozen=True)
class QuestionPost:
    id: int
    post_type: PostType
    score: int
    title: str
    body_html: str
    tags: tuple[str, ...]
    creation_date: datetime
    accepted_answer_id: int | None


@dataclass(frozen=True)
class Quadruplet:
    """One training record: language, title, problem description, code snippet."""

    lang: str
    title: str
    description: str
    code: str
    creation_date: datetime
    source_post_id: int

    def __post_init__(self):
        if not self.code.strip():
            raise ValueError(f"post {self.source_post_id}: empty code channel")
        if len(self.title.split()) < 2:
            raise ValueError(f"post {self.source_post_id}: title shorter than 2 tokens")


@dataclass
class CorpusSplit:
    lang: str
    train: list[Quadruplet]
    valid: list[Quadruplet]
    test: list[Quadruplet]

    @property
    def all_records(self) -> list[Quadruplet]:
        return self.train + self.valid + self.test


def _parse_tags(raw: str) -> tuple[str, ...]:
    # Dumps encode tags either as "<a><b>" (classic) or "|a|b|" (2024+ format).
    if not raw:
        return ()
    if "<" in raw:
        parts = re.findall(r"<([^<>]+)>", raw)
    else:
        parts = raw.split("|")
    return tuple(t.strip().lower() for t in parts if t.strip())


def _parse_timestamp(raw: str) -> datetime:
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _row_to_post(attrs: dict[str, str]) -> QuestionPost | None:
    missing = [a for a in _REQUIRED_ATTRS if a not in attrs]
    if missing:
        log.warning("row %s rejected: missing attributes %s", attrs.get("Id", "?"), missing)
        return None
    type_id = attrs.get("PostTypeId", "")
    post_type = {"1": PostType.QUESTION, "2": PostType.ANSWER}.get(type_id, PostType.OTHER)
    try:
        creation = _parse_timestamp(attrs["CreationDate"])
    except ValueError:
        log.warning("row %s rejected: bad CreationDate %r", attrs["Id"], attrs["CreationDate"])
        return None
    accepted = attrs.get("AcceptedAnswerId")
    return QuestionPost(
        id=int(attrs["Id"]),
        post_type=post_type,
        score=int(attrs.get("Score", "0")),
        title=attrs.get("Title", ""),
        body_html=attrs["Body"],
        tags=_parse_tags(attrs.get("Tags", "")),
        creation_date=creation,
        accepted_answer_id=int(accepted) if accepted is not None else None,
    )


def iter_question_posts(stream: BinaryIO, chunk_size: int = 1 << 16) -> Iterator[QuestionPost]:
    """Stream every question row from a Posts.xml byte stream.

    Memory use is bounded by chunk_size regardless of file size. Malformed XML
    raises DumpParseError naming the byte offset; rows missing required
    attributes are dropped with a warning.
    """
    pending: list[QuestionPost] = []

    def on_start(name, attrs):
        if name != "row":
            return
        post = _row_to_post(attrs)
        if post is not None and post.post_type is PostType.QUESTION:
            pending.append(post)

    parser = xml.parsers.expat.ParserCreate()
    parser.buffer_text = True
    parser.StartElementHandler = on_start
    while True:
        chunk = stream.read(chunk_size)
        try:
            parser.Parse(chunk, not chunk)
        except xml.parsers.expat.ExpatError as exc:
            raise DumpParseError(
                f"malformed XML at byte offset {parser.ErrorByteIndex}: "
                f"{xml.parsers.expat.errors.messages[exc.code]}"
            ) from exc
        yield from pending
        pending.clear()
        if not chunk:
            return


def parse_dump(stream: BinaryIO, lang_tag: str) -> Iterator[QuestionPost]:
    """Yield the question posts whose tag list contains lang_tag."""
    lang = lang_tag.lower()
    for post in iter_question_posts(stream):
        if lang in post.tags:
            yield post


class _BodyExtractor(HTMLParser):
    """Split body HTML into the code channel (text inside <code>) and the rest."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.code_chunks: list[str] = []
        self._text_parts: list[str] = []
        self._code_depth = 0
        self._current: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "code":
            if self._code_depth == 0:
                self._current = []
            self._code_depth += 1
        else:
            self._text_parts.append(" ")

    def handle_endtag(self, tag):
        if tag == "code":
            if self._code_depth:
                self._code_depth -= 1
                if self._code_depth == 0:
                    self.code_chunks.append("".join(self._current))
        else:
            self._text_parts.append(" ")

    def handle_data(self, data):
        if self._code_depth:
            self._current.append(data)
        else:
            self._text_parts.append(data)

    def close(self):
        super().close()
        if self._code_depth:  # unclosed <code> at end of body
            self.code_chunks.append("".join(self._current))
            self._code_depth = 0

    @property
    def description(self) -> str:
        return " ".join("".join(self._text_parts).split())


def _split_body(body_html: str) -> tuple[str, list[str]]:
    ex = _BodyExtractor()
    ex.feed(body_html)
    ex.close()
    return ex.description, ex.code_chunks


def has_code(body_html: str) -> bool:
    _, chunks = _split_body(body_html)
    return any(chunk.strip() for chunk in chunks)


def passes_rules(post: QuestionPost, min_score: int = DEFAULT_MIN_SCORE) -> bool:
    """Quality gate: score threshold, at least one nonempty code snippet, accepted answer."""
    return (
        post.score >= min_score
        and post.accepted_answer_id is not None
        and has_code(post.body_html)
    )


def extract_quadruplet(post: QuestionPost, lang_tag: str) -> Quadruplet:
    """Pull the (title, description, code) channels out of a rule-passing post.

    Code is the text content of every <code> element in document order joined
    by single newlines; the description is everything else with markup
    stripped and whitespace collapsed.
    """
    description, chunks = _split_body(post.body_html)
    code = "\n".join(chunks)
    if not code.strip():
        raise ExtractionError(f"post {post.id}: no code content in body")
    return Quadruplet(
        lang=lang_tag.lower(),
        title=post.title,
        description=description,
        code=code,
        creation_date=post.creation_date,
        source_post_id=post.id,
    )


def split_sizes(
    n: int,
    ratios: tuple[float, float, float] = SPLIT_RATIOS,
    valid_rounding: str = "floor",
) -> tuple[int, int, int]:
    """Partition sizes for an n-record corpus: floor train, floor/nearest valid, remainder test."""
    n_train = int(ratios[0] * n)
    if valid_rounding == "floor":
        n_valid = int(ratios[1] * n)
    elif valid_rounding == "nearest":
        n_valid = int(ratios[1] * n + 0.5)
    else:
        raise ValueError(f"unknown valid_rounding {valid_rounding!r}")
    return n_train, n_valid, n - n_train - n_valid


def split_corpus(
    quadruplets: Sequence[Quadruplet],
    ratios: tuple[float, float, float] = SPLIT_RATIOS,
    valid_rounding: str = "floor",
) -> CorpusSplit:
    """Chronological train/valid/test split, ties broken by post id."""
    n = len(quadruplets)
    if n < 3:
        raise ValueError("insufficient data to split")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios {ratios} do not sum to 1")
    langs = {q.lang for q in quadruplets}
    if len(langs) != 1:
        raise ValueError(f"split expects a single language, got {sorted(langs)}")
    ordered = sorted(quadruplets, key=lambda q: (q.creation_date, q.source_post_id))
    n_train, n_valid, _ = split_sizes(n, ratios, valid_rounding)
    return CorpusSplit(
        lang=langs.pop(),
        train=ordered[:n_train],
        valid=ordered[n_train : n_train + n_valid],
        test=ordered[n_train + n_valid :],
    )


def _field_stats(lengths: list[int], under: int) -> dict:
    counts = Counter(lengths)
    top = max(counts.values())
    return {
        "max": max(lengths),
        "mean": statistics.fmean(lengths),
        "mode": min(v for v, c in counts.items() if c == top),
        "median": statistics.median(lengths),
        "min": min(lengths),
        f"under_{under}": 100.0 * sum(1 for x in lengths if x < under) / len(lengths),
    }


def corpus_stats(split: CorpusSplit, tokenizer: Callable[[str], Sequence]) -> dict:
    """Token-length statistics per channel over the whole split (train+valid+test)."""
    records = split.all_records
    if not records:
        raise ValueError("empty split")
    lengths = {
        "code": [len(tokenizer(q.code)) for q in records],
        "description": [len(tokenizer(q.description)) for q in records],
        "title": [len(tokenizer(q.title)) for q in records],
    }
    return {
        "code": _field_stats(lengths["code"], under=256),
        "description": _field_stats(lengths["description"], under=256),
        "title": _field_stats(lengths["title"], under=16),
    }


def quadruplet_to_json(quad: Quadruplet) -> str:
    return json.dumps(
        {
            "lang": quad.lang,
            "title": quad.title,
            "description": quad.description,
            "code": quad.code,
            "creation_date": quad.creation_date.isoformat(),
            "source_post_id": quad.source_post_id,
        },
        ensure_ascii=False,
    )


def quadruplet_from_json(line: str) -> Quadruplet:
    obj = json.loads(line)
    return Quadruplet(
        lang=obj["lang"],
        title=obj["title"],
        description=obj["description"],
        code=obj["code"],
        creation_date=_parse_timestamp(obj["creation_date"]),
        source_post_id=obj["source_post_id"],
    )


def write_split(split: CorpusSplit, out_dir: Path) -> list[Path]:
    """Serialize a split as {lang}.{train|valid|test}.jsonl (UTF-8, LF)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SPLIT_NAMES:
        path = out_dir / f"{split.lang}.{name}.jsonl"
        records = getattr(split, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for quad in records:
                fh.write(quadruplet_to_json(quad) + "\n")
        written.append(path)
    return written


def read_jsonl(path: Path) -> list[Quadruplet]:
    with open(path, encoding="utf-8") as fh:
        return [quadruplet_from_json(line) for line in fh if line.strip()]


def read_split(corpus_dir: Path, lang: str) -> CorpusSplit:
    corpus_dir = Path(corpus_dir)
    parts = {name: read_jsonl(corpus_dir / f"{lang}.{name}.jsonl") for name in SPLIT_NAMES}
    return CorpusSplit(lang=lang, **parts)


def build_corpus(
    dump_path: Path,
    langs: Iterable[str],
    out_dir: Path,
    min_score: int = DEFAULT_MIN_SCORE,
    valid_rounding: str = "floor",
) -> dict[str, CorpusSplit]:
    """Run the full pipeline: parse, filter, extract, split, serialize.

    A post tagged with several target languages is emitted to each of their
    corpora; the overlap count is logged so it can be audited against the
    source dump.
    """
    targets = [lang.lower() for lang in langs]
    buckets: dict[str, list[Quadruplet]] = {lang: [] for lang in targets}
    n_questions = 0
    n_multi = 0
    with open(dump_path, "rb") as stream:
        for post in iter_question_posts(stream):
            n_questions += 1
            matched = [lang for lang in targets if lang in post.tags]
            if not matched:
                continue
            if not passes_rules(post, min_score=min_score):
                continue
            if len(matched) > 1:
                n_multi += 1
            for lang in matched:
                try:
                    buckets[lang].append(extract_quadruplet(post, lang))
                except ValueError as exc:
                    log.warning("post %s dropped for %s: %s", post.id, lang, exc)
    log.info(
        "scanned %d questions; %d passing posts carried multiple target languages",
        n_questions,
        n_multi,
    )
    splits: dict[str, CorpusSplit] = {}
    for lang in targets:
        records = buckets[lang]
        if len(records) < 3:
            log.warning("language %s has %d records, too few to split; skipped", lang, len(records))
            continue
        split = split_corpus(records, valid_rounding=valid_rounding)
        write_split(split, out_dir)
        log.info(
            "%s: %d train / %d valid / %d test",
            lang,
            len(split.train),
            len(split.valid),
            len(split.test),
        )
        splits[lang] = split
    return splits
