"""Live differential against the external evaluation toolkit, where installed.

The build environment's package mirror does not carry any of the reference
metric distributions (pycocoevalcap / nlg-eval / nltk), so these tests skip
there; the frozen-oracle differential in test_acceptance covers the same
fixture. On a machine with the toolkit installed they run the literal
comparison at the 1e-4 tolerance.
"""

import json

import pytest

from titleforge.metrics import bleu_all, cider, make_pair, meteor, rouge_l

pycocoevalcap = pytest.importorskip("pycocoevalcap")


def fixture_pairs(fixtures_dir):
    pairs = []
    with open(fixtures_dir / "metric_pairs_20.jsonl", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            obj = json.loads(line)
            pairs.append(make_pair(obj["candidate"], obj["reference"], doc_id=i))
    return pairs


def as_coco(pairs):
    hyps = {i: [" ".join(p.candidate)] for i, p in enumerate(pairs)}
    refs = {i: [" ".join(r) for r in p.references] for i, p in enumerate(pairs)}
    return hyps, refs


def test_bleu_matches_reference_toolkit(fixtures_dir):
    from pycocoevalcap.bleu.bleu import Bleu

    pairs = fixture_pairs(fixtures_dir)
    hyps, refs = as_coco(pairs)
    expected, _ = Bleu(4).compute_score(refs, hyps)
    got = bleu_all(pairs, 4)
    for mine, theirs in zip(got, expected):
        assert mine == pytest.approx(theirs, abs=1e-4)


def test_rouge_matches_reference_toolkit(fixtures_dir):
    from pycocoevalcap.rouge.rouge import Rouge

    pairs = fixture_pairs(fixtures_dir)
    hyps, refs = as_coco(pairs)
    expected, _ = Rouge().compute_score(refs, hyps)
    got = sum(rouge_l(p) for p in pairs) / len(pairs)
    assert got == pytest.approx(expected, abs=1e-4)


def test_cider_matches_reference_toolkit(fixtures_dir):
    from pycocoevalcap.cider.cider import Cider

    pairs = fixture_pairs(fixtures_dir)
    hyps, refs = as_coco(pairs)
    expected, _ = Cider().compute_score(refs, hyps)
    assert cider(pairs) == pytest.approx(expected, abs=1e-4)


def test_meteor_exact_stem_matches_nltk(fixtures_dir):
    """The jar-based METEOR needs a Java runtime; NLTK's implementation restricted
    to the exact+stem stages is the pinned differential configuration."""
    nltk_meteor = pytest.importorskip("nltk.translate.meteor_score")
    from nltk.stem.porter import PorterStemmer

    class NoSynonyms:
        @staticmethod
        def synsets(word):
            return []

    pairs = fixture_pairs(fixtures_dir)
    stemmer = PorterStemmer(mode="ORIGINAL_ALGORITHM")
    expected = sum(
        nltk_meteor.meteor_score(
            [list(p.references[0])], list(p.candidate), stemmer=stemmer, wordnet=NoSynonyms()
        )
        for p in pairs
    ) / len(pairs)
    assert meteor(pairs) == pytest.approx(expected, abs=1e-4)
