"""Overlap metrics for generated titles: ROUGE-L, BLEU-1..4, METEOR, CIDEr.

Parameterizations follow the COCO-caption scorers (the implementation family
behind the usual nlg evaluation stack): ROUGE-L beta 1.2, corpus BLEU with
epsilon smoothing and closest-reference brevity penalty, clipped TF-IDF CIDEr
with a gaussian length penalty, and classic METEOR restricted to the
exact+stem stages (no synonym resources in this stack). The exact values live
in METRICS_PARAMS and are emitted with every report.
"""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ._porter import porter_stem

log = logging.getLogger(__name__)

METRICS_PARAMS = {
    "tokenizer": "lowercase, punctuation separated from word characters, whitespace split",
    "rouge_l": {"beta": 1.2},
    "bleu": {"max_order": 4, "smoothing": {"tiny": 1e-15, "small": 1e-9}, "reflen": "closest"},
    "meteor": {"alpha": 0.9, "beta": 3.0, "gamma": 0.5, "stages": ["exact", "porter_stem"]},
    "cider": {"max_n": 4, "sigma": 6.0, "scale": 10.0, "idf": "ln(N/df) over references", "clipped": True},
}

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> tuple[str, ...]:
    """Shared metric tokenizer: lowercase, punctuation split out, whitespace split."""
    return tuple(_TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class EvalPair:
    candidate: tuple[str, ...]
    references: tuple[tuple[str, ...], ...]
    doc_id: int = 0

    def __post_init__(self):
        if not self.references:
            raise ValueError("at least one reference required")


def make_pair(candidate: str, reference: str, doc_id: int = 0) -> EvalPair:
    return EvalPair(candidate=tokenize(candidate), references=(tokenize(reference),), doc_id=doc_id)


# --- ROUGE-L ------------------------------------------------------------------

def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(pair: EvalPair, beta: float = 1.2) -> float:
    """LCS F-score against the best reference; 0 for empty or disjoint inputs."""
    if not pair.candidate:
        return 0.0
    best_p = best_r = 0.0
    for ref in pair.references:
        if not ref:
            continue
        lcs = _lcs_len(pair.candidate, ref)
        best_p = max(best_p, lcs / len(pair.candidate))
        best_r = max(best_r, lcs / len(ref))
    if best_p == 0.0 or best_r == 0.0:
        return 0.0
    return ((1 + beta**2) * best_p * best_r) / (best_r + beta**2 * best_p)


# --- BLEU ---------------------------------------------------------------------

def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_all(pairs: Sequence[EvalPair], max_n: int = 4, smoothing: bool = True) -> list[float]:
    """Corpus-level BLEU-1..max_n: clipped n-gram precision, brevity penalty.

    With smoothing on, zero counts are softened by the tiny/small epsilons the
    COCO scorer uses; with smoothing off, a zero clipped count zeroes the score.
    """
    if not pairs:
        raise ValueError("empty corpus")
    tiny, small = (1e-15, 1e-9) if smoothing else (0.0, 0.0)
    correct = [0] * max_n
    guess = [0] * max_n
    testlen = 0
    reflen = 0.0
    for pair in pairs:
        cand = pair.candidate
        testlen += len(cand)
        lens = [len(r) for r in pair.references]
        reflen += min(lens, key=lambda L: (abs(L - len(cand)), L))
        for k in range(max_n):
            cand_counts = _ngram_counts(cand, k + 1)
            max_ref: Counter = Counter()
            for ref in pair.references:
                for gram, cnt in _ngram_counts(ref, k + 1).items():
                    max_ref[gram] = max(max_ref[gram], cnt)
            correct[k] += sum(min(cnt, max_ref[gram]) for gram, cnt in cand_counts.items())
            guess[k] += max(0, len(cand) - k)
    bleus = []
    running = 1.0
    for k in range(max_n):
        denom = guess[k] + small
        running *= (correct[k] + tiny) / denom if denom > 0 else 0.0
        bleus.append(running ** (1.0 / (k + 1)))
    ratio = (testlen + tiny) / (reflen + small) if (reflen + small) > 0 else 0.0
    if ratio < 1 and ratio > 0:
        bleus = [b * math.exp(1 - 1 / ratio) for b in bleus]
    return bleus


def bleu(pairs: Sequence[EvalPair], n: int = 4, smoothing: bool = True) -> float:
    if not 1 <= n <= 4:
        raise ValueError("BLEU order must be 1..4")
    return bleu_all(pairs, max_n=n, smoothing=smoothing)[n - 1]


# --- METEOR -------------------------------------------------------------------

def _stage_match(cand_free, ref_free, cand_keys, ref_keys):
    matches = []
    for i in sorted(cand_free):
        for j in sorted(ref_free):
            if cand_keys[i] == ref_keys[j]:
                matches.append((i, j))
                cand_free.remove(i)
                ref_free.remove(j)
                break
    return matches


def meteor_pair(
    candidate: Sequence[str],
    reference: Sequence[str],
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    """Classic METEOR on one pair: exact then stemmed greedy alignment."""
    if not candidate or not reference:
        return 0.0
    cand_free = set(range(len(candidate)))
    ref_free = set(range(len(reference)))
    matches = _stage_match(cand_free, ref_free, list(candidate), list(reference))
    stems_c = [porter_stem(w) for w in candidate]
    stems_r = [porter_stem(w) for w in reference]
    matches += _stage_match(cand_free, ref_free, stems_c, stems_r)
    m = len(matches)
    if m == 0:
        return 0.0
    precision = m / len(candidate)
    recall = m / len(reference)
    f_mean = precision * recall / (alpha * precision + (1 - alpha) * recall)
    matches.sort()
    chunks = 1 + sum(
        1
        for (i0, j0), (i1, j1) in zip(matches, matches[1:])
        if not (i1 == i0 + 1 and j1 == j0 + 1)
    )
    penalty = gamma * (chunks / m) ** beta
    return f_mean * (1.0 - penalty)


def meteor(pairs: Sequence[EvalPair], alpha: float = 0.9, beta: float = 3.0, gamma: float = 0.5) -> float:
    if not pairs:
        raise ValueError("empty corpus")
    total = 0.0
    for pair in pairs:
        total += max(meteor_pair(pair.candidate, ref, alpha, beta, gamma) for ref in pair.references)
    return total / len(pairs)


# --- CIDEr --------------------------------------------------------------------

def cider(pairs: Sequence[EvalPair], max_n: int = 4, sigma: float = 6.0) -> float:
    """Corpus CIDEr: TF-IDF n-gram vectors with clipped cosine and length penalty.

    IDF is computed over the whole evaluation corpus' references, so the score
    of one pair depends on the rest of the corpus; a single-document corpus
    has zero IDF everywhere and scores 0 by construction.
    """
    if not pairs:
        raise ValueError("empty corpus")
    doc_freq: Counter = Counter()
    for pair in pairs:
        seen: set = set()
        for ref in pair.references:
            for n in range(1, max_n + 1):
                seen.update(_ngram_counts(ref, n).keys())
        doc_freq.update(seen)
    log_docs = math.log(len(pairs))

    def tfidf_vectors(tokens: Sequence[str]):
        vecs, norms = [], []
        for n in range(1, max_n + 1):
            vec = {
                gram: tf * (log_docs - math.log(max(1.0, doc_freq[gram])))
                for gram, tf in _ngram_counts(tokens, n).items()
            }
            vecs.append(vec)
            norms.append(math.sqrt(sum(v * v for v in vec.values())))
        return vecs, norms

    total = 0.0
    for pair in pairs:
        cand_vecs, cand_norms = tfidf_vectors(pair.candidate)
        pair_score = 0.0
        for ref in pair.references:
            ref_vecs, ref_norms = tfidf_vectors(ref)
            delta = float(len(pair.candidate) - len(ref))
            length_penalty = math.exp(-(delta**2) / (2 * sigma**2))
            for n in range(max_n):
                num = sum(
                    min(weight, ref_vecs[n].get(gram, 0.0)) * ref_vecs[n].get(gram, 0.0)
                    for gram, weight in cand_vecs[n].items()
                )
                denom = cand_norms[n] * ref_norms[n]
                sim = num / denom if denom != 0.0 else 0.0
                pair_score += sim * length_penalty
        total += 10.0 * pair_score / (max_n * len(pair.references))
    return total / len(pairs)


# --- corpus-level report ------------------------------------------------------

def corpus_scores(pairs: Sequence[EvalPair]) -> dict[str, float]:
    """All metrics over one evaluation corpus; rouge/meteor are pair means."""
    if not pairs:
        raise ValueError("empty corpus")
    bleus = bleu_all(pairs, max_n=4)
    return {
        "rouge_l": sum(rouge_l(p) for p in pairs) / len(pairs),
        "meteor": meteor(pairs),
        "bleu_1": bleus[0],
        "bleu_2": bleus[1],
        "bleu_3": bleus[2],
        "bleu_4": bleus[3],
        "cider": cider(pairs),
    }


@dataclass
class MetricReport:
    """Per-language scores in table shape: percentages except the raw CIDEr scalar."""

    per_language: dict[str, dict[str, float]] = field(default_factory=dict)
    params: dict = field(default_factory=lambda: METRICS_PARAMS)

    def to_dict(self) -> dict:
        return {"per_language": self.per_language, "metrics_params": self.params}

    def write(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def as_percentages(scores: dict[str, float]) -> dict[str, float]:
    out = {}
    for key, value in scores.items():
        out[key] = value if key == "cider" else 100.0 * value
    return out


def evaluate_model(
    state,
    test_sets: dict[str, list],
    beam_size: int = 10,
    dump_path: Path | None = None,
    max_len: int = 64,
) -> MetricReport:
    """Generate a top-1 title per test record and score all four metrics per language.

    Records whose generation fails are logged, scored with an empty candidate,
    and the run continues. The (post id, generated, reference) triples go to
    dump_path as JSONL when given.
    """
    from .generation import GenerationRequest, generate

    report = MetricReport()
    dump_fh = open(dump_path, "w", encoding="utf-8") if dump_path else None
    try:
        for lang, records in test_sets.items():
            if not records:
                raise ValueError(f"empty test set for {lang}")
            pairs = []
            for quad in records:
                try:
                    request = GenerationRequest(
                        lang=lang,
                        description=quad.description,
                        code=quad.code,
                        num_candidates=1,
                        beam_size=beam_size,
                        max_len=max_len,
                    )
                    title = generate(state, request).candidates[0][0]
                except Exception as exc:  # scored 0, run continues
                    log.warning("generation failed for post %s: %s", quad.source_post_id, exc)
                    title = ""
                pairs.append(make_pair(title, quad.title, doc_id=quad.source_post_id))
                if dump_fh is not None:
                    dump_fh.write(
                        json.dumps(
                            {"post_id": quad.source_post_id, "generated": title, "reference": quad.title},
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
            report.per_language[lang] = as_percentages(corpus_scores(pairs))
    finally:
        if dump_fh is not None:
            dump_fh.close()
    return report
