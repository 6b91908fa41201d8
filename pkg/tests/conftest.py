import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"

if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))


def make_quad(lang="python", title="How to test", description="desc text", code="x = 1",
              when="2020-01-01T00:00:00", post_id=1):
    from titleforge.corpus import Quadruplet

    return Quadruplet(
        lang=lang,
        title=title,
        description=description,
        code=code,
        creation_date=datetime.fromisoformat(when).replace(tzinfo=timezone.utc),
        source_post_id=post_id,
    )


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def dump_path():
    return FIXTURES / "posts_50.xml"


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small saved checkpoint + tokenizer usable fully offline."""
    from titleforge.testing import build_tiny_checkpoint

    out = tmp_path_factory.mktemp("tiny_ckpt")
    build_tiny_checkpoint(out, seed=0)
    return out


@pytest.fixture(scope="session")
def saved_state_dir(tmp_path_factory, tiny_model_dir):
    """An untrained but fully packaged model directory (weights + bank + manifest)."""
    from titleforge.model import Seq2SeqHandle, build_soft_bank, save_model_state
    from titleforge.prompts import DEFAULT_PREFIXES, TemplateKind, build_template, resolve_soft_token_id

    handle = Seq2SeqHandle.load(tiny_model_dir, max_encoder_len=64, max_decoder_len=12)
    template = build_template(TemplateKind.HYBRID)
    bank = build_soft_bank(handle, template)
    out = tmp_path_factory.mktemp("packaged") / "model"
    save_model_state(
        out, handle, bank,
        mode="prompt_hybrid", modality="bimodal",
        prefixes=dict(DEFAULT_PREFIXES), template=template,
        soft_token_id=resolve_soft_token_id(handle.tokenizer),
        base_checkpoint=str(tiny_model_dir),
    )
    return out
