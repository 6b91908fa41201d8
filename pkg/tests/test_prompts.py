import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from titleforge.prompts import (
    CODE_PHRASE,
    DESC_PHRASE,
    TASK_PHRASE,
    Modality,
    PromptError,
    PromptTemplate,
    SegmentKind,
    TemplateKind,
    TemplateSegment,
    build_template,
    render,
    render_finetune,
    render_finetune_text,
    render_text,
    resolve_soft_token_id,
    soft_init_spec,
    soft_widths,
)

from conftest import make_quad


class SpaceTokenizer:
    """Whitespace token ids over a closed-world vocabulary; enough for prompt tests."""

    def __init__(self):
        self.vocab = {"<pad>": 0, "</s>": 1, "<unk>": 2, "<soft>": 3}
        self.eos_token_id = 1
        self.unk_token_id = 2

    def encode(self, text, add_special_tokens=False):
        ids = []
        for word in text.split():
            if word not in self.vocab:
                self.vocab[word] = len(self.vocab)
            ids.append(self.vocab[word])
        return ids

    def convert_tokens_to_ids(self, token):
        return self.vocab.get(token, self.unk_token_id)


@pytest.fixture()
def tok():
    return SpaceTokenizer()


FIXTURE_QUAD = dict(description="Parsing fails on the second row.", code="df = pd.read_csv(path)")


class TestBuildTemplate:
    def test_hard_bimodal_layout(self):
        t = build_template(TemplateKind.HARD, Modality.BIMODAL)
        kinds = [s.kind for s in t.segments]
        assert kinds == [
            SegmentKind.LITERAL, SegmentKind.SLOT_X,
            SegmentKind.LITERAL, SegmentKind.SLOT_Y,
            SegmentKind.LITERAL, SegmentKind.SLOT_Z,
        ]
        assert [s.text for s in t.segments if s.kind is SegmentKind.LITERAL] == [
            DESC_PHRASE, CODE_PHRASE, TASK_PHRASE,
        ]

    def test_soft_bimodal_layout(self):
        t = build_template(TemplateKind.SOFT, Modality.BIMODAL)
        kinds = [s.kind for s in t.segments]
        assert kinds == [
            SegmentKind.SOFT, SegmentKind.SLOT_X,
            SegmentKind.SOFT, SegmentKind.SLOT_Y,
            SegmentKind.SOFT, SegmentKind.SLOT_Z,
        ]

    def test_hybrid_keeps_literals_and_one_soft_tail(self):
        t = build_template(TemplateKind.HYBRID, Modality.BIMODAL)
        kinds = [s.kind for s in t.segments]
        assert kinds == [
            SegmentKind.LITERAL, SegmentKind.SLOT_X,
            SegmentKind.LITERAL, SegmentKind.SLOT_Y,
            SegmentKind.SOFT, SegmentKind.SLOT_Z,
        ]
        assert t.segments[-2].text == TASK_PHRASE

    def test_desc_only_drops_code_slot(self):
        t = build_template(TemplateKind.HARD, Modality.DESC_ONLY)
        kinds = {s.kind for s in t.segments}
        assert SegmentKind.SLOT_Y not in kinds
        assert [s.text for s in t.segments if s.kind is SegmentKind.LITERAL] == [DESC_PHRASE, TASK_PHRASE]

    def test_code_only_drops_desc_slot(self):
        t = build_template(TemplateKind.HYBRID, Modality.CODE_ONLY)
        kinds = [s.kind for s in t.segments]
        assert SegmentKind.SLOT_X not in kinds
        assert kinds[0] is SegmentKind.LITERAL and t.segments[0].text == CODE_PHRASE

    def test_invariants_enforced(self):
        with pytest.raises(PromptError, match="exactly one answer slot"):
            PromptTemplate(TemplateKind.HARD, (TemplateSegment(SegmentKind.SLOT_X),))
        with pytest.raises(PromptError, match="last"):
            PromptTemplate(
                TemplateKind.HARD,
                (TemplateSegment(SegmentKind.SLOT_Z), TemplateSegment(SegmentKind.SLOT_X)),
            )
        with pytest.raises(PromptError, match="no soft"):
            PromptTemplate(
                TemplateKind.HARD,
                (TemplateSegment(SegmentKind.SOFT, "x"), TemplateSegment(SegmentKind.SLOT_Z)),
            )

    def test_round_trips_through_dict(self):
        t = build_template(TemplateKind.HYBRID, Modality.BIMODAL)
        assert PromptTemplate.from_dict(t.to_dict()) == t


class TestGoldenRenderings:
    def quad(self):
        return make_quad(lang="python", **FIXTURE_QUAD)

    def test_hard_bimodal_matches_golden(self, fixtures_dir):
        golden = (fixtures_dir / "golden" / "template_hard_bimodal.txt").read_bytes()
        text = render_text(build_template(TemplateKind.HARD), self.quad())
        assert text.encode("utf-8") == golden

    def test_hybrid_bimodal_matches_golden(self, fixtures_dir):
        golden = (fixtures_dir / "golden" / "template_hybrid_bimodal.txt").read_bytes()
        text = render_text(build_template(TemplateKind.HYBRID), self.quad())
        assert text.encode("utf-8") == golden

    def test_finetune_matches_golden(self, fixtures_dir):
        golden = (fixtures_dir / "golden" / "template_finetune.txt").read_bytes()
        assert render_finetune_text(self.quad()).encode("utf-8") == golden

    def test_soft_bimodal_text(self):
        text = render_text(build_template(TemplateKind.SOFT), self.quad())
        assert text == (
            "py: [SOFT] Parsing fails on the second row. [SOFT] df = pd.read_csv(path) [SOFT]"
        )

    def test_desc_only_hard_text(self):
        quad = make_quad(lang="python", description="D text", code="ignored")
        text = render_text(build_template(TemplateKind.HARD, Modality.DESC_ONLY), quad)
        assert text == "py: The problem description: D text Generate the question title:"

    def test_finetune_empty_description(self):
        quad = make_quad(lang="python", description="", code="C")
        assert render_finetune_text(quad) == "py: <code> C"

    def test_finetune_empty_code_via_template_text(self):
        # Reuses the finetune layout for the desc-only ablation.
        quad = make_quad(lang="python", description="D", code="x")
        object.__setattr__(quad, "code", "")  # bypass corpus invariant for the ablation shape
        assert render_finetune_text(quad) == "py: D <code>"


class TestRender:
    def test_lang_prefix_heads_sequence(self, tok):
        quad = make_quad(lang="javascript", description="D", code="C")
        mi = render(build_template(TemplateKind.HARD), quad, tok)
        assert mi.token_ids[0] == tok.encode("js:")[0]

    def test_unregistered_language(self, tok):
        quad = make_quad(lang="cobol", description="D", code="C")
        with pytest.raises(PromptError, match="no registered prefix"):
            render(build_template(TemplateKind.HARD), quad, tok)

    def test_no_input_modality(self, tok):
        quad = make_quad(description="x", code="y")
        object.__setattr__(quad, "description", "")
        object.__setattr__(quad, "code", "   ")
        with pytest.raises(PromptError, match="no input modality"):
            render(build_template(TemplateKind.HARD), quad, tok)

    def test_soft_positions_use_placeholder_id(self, tok):
        quad = make_quad(description="some words here", code="a = 1")
        mi = render(build_template(TemplateKind.HYBRID), quad, tok)
        soft_id = resolve_soft_token_id(tok)
        assert len(mi.soft_positions) == 4  # "Generate the question title:" is 4 space tokens
        for pos, row in mi.soft_positions.items():
            assert mi.token_ids[pos] == soft_id
        assert sorted(mi.soft_positions.values()) == [0, 1, 2, 3]

    def test_soft_template_expansion_count(self, tok):
        quad = make_quad(description="D", code="C")
        t = build_template(TemplateKind.SOFT)
        mi = render(t, quad, tok)
        assert len(mi.soft_positions) == sum(soft_widths(t, tok))
        assert len(mi.soft_positions) == 3 + 3 + 4  # per-phrase space-token counts

    def test_overlong_code_truncates_to_max_len(self, tok):
        quad = make_quad(description="short desc", code=" ".join(f"t{i}" for i in range(900)))
        mi = render(build_template(TemplateKind.HARD), quad, tok, max_len=512)
        assert len(mi.token_ids) == 512

    def test_truncation_never_removes_prompt_tokens(self, tok):
        quad = make_quad(description=" ".join(f"d{i}" for i in range(600)),
                         code=" ".join(f"c{i}" for i in range(600)))
        mi = render(build_template(TemplateKind.HARD), quad, tok, max_len=128)
        ids = list(mi.token_ids)
        for phrase in ("py:", DESC_PHRASE, CODE_PHRASE, TASK_PHRASE):
            for t_id in tok.encode(phrase):
                assert t_id in ids

    def test_hybrid_minus_soft_equals_hard_minus_tail(self, tok):
        quad = make_quad(description="some problem text", code="code = 1")
        hard = render(build_template(TemplateKind.HARD), quad, tok)
        hybrid = render(build_template(TemplateKind.HYBRID), quad, tok)
        tail_ids = tok.encode(TASK_PHRASE)
        hard_ids = [t for t in hard.token_ids]
        # remove the final literal from the hard rendering
        eos = [tok.eos_token_id]
        assert hard_ids[-len(tail_ids) - 1 : -1] == tail_ids
        hard_wo_tail = hard_ids[: -len(tail_ids) - 1] + eos
        hybrid_wo_soft = [t for i, t in enumerate(hybrid.token_ids) if i not in hybrid.soft_positions]
        assert hybrid_wo_soft == hard_wo_tail

    def test_render_finetune_has_no_soft_positions(self, tok):
        mi = render_finetune(make_quad(description="D", code="C"), tok)
        assert mi.soft_positions == {}

    @settings(max_examples=40, deadline=None)
    @given(
        d_len=st.integers(0, 700),
        c_len=st.integers(1, 700),
        max_len=st.integers(64, 512),
    )
    def test_budget_and_mask_properties(self, d_len, c_len, max_len):
        tok = SpaceTokenizer()
        quad = make_quad(
            description=" ".join(f"d{i}" for i in range(d_len)),
            code=" ".join(f"c{i}" for i in range(c_len)),
        )
        mi = render(build_template(TemplateKind.HYBRID), quad, tok, max_len=max_len)
        assert len(mi.token_ids) <= max_len
        assert all(m == 1 for m in mi.attention_mask)

    def test_distinct_prefixes_never_collide(self, tok):
        a = render_text(build_template(TemplateKind.HARD), make_quad(lang="python", description="D", code="C"))
        b = render_text(build_template(TemplateKind.HARD), make_quad(lang="java", description="D", code="C"))
        assert a != b


class TestSoftInit:
    def test_hybrid_single_entry(self, tok):
        spec = soft_init_spec(build_template(TemplateKind.HYBRID), tok)
        assert len(spec) == 1
        assert spec[0] == (0, tok.encode(TASK_PHRASE))

    def test_soft_template_mirrors_hard_phrases(self, tok):
        spec = soft_init_spec(build_template(TemplateKind.SOFT), tok)
        assert [ids for _, ids in spec] == [
            tok.encode(DESC_PHRASE), tok.encode(CODE_PHRASE), tok.encode(TASK_PHRASE),
        ]

    def test_empty_phrase_marks_random_init(self, tok):
        t = PromptTemplate(
            TemplateKind.SOFT,
            (
                TemplateSegment(SegmentKind.SOFT, ""),
                TemplateSegment(SegmentKind.SLOT_X),
                TemplateSegment(SegmentKind.SLOT_Z),
            ),
        )
        assert soft_init_spec(t, tok) == [(0, None)]

    def test_hard_template_rejected(self, tok):
        with pytest.raises(PromptError, match="no soft segments"):
            soft_init_spec(build_template(TemplateKind.HARD), tok)
