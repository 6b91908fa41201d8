#!/usr/bin/env python3
"""Write the byte-exact golden renderings for the three input layouts.

The strings are composed here by hand from the published template wordings,
independently of the package renderer the tests exercise.
"""

from pathlib import Path

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden"

FIXTURE_DESC = "Parsing fails on the second row."
FIXTURE_CODE = "df = pd.read_csv(path)"

GOLDENS = {
    "template_hard_bimodal.txt": (
        "py: The problem description: Parsing fails on the second row. "
        "The code snippet: df = pd.read_csv(path) Generate the question title:"
    ),
    "template_hybrid_bimodal.txt": (
        "py: The problem description: Parsing fails on the second row. "
        "The code snippet: df = pd.read_csv(path) [SOFT]"
    ),
    "template_finetune.txt": (
        "py: Parsing fails on the second row. <code> df = pd.read_csv(path)"
    ),
}


def main():
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    for name, text in GOLDENS.items():
        (GOLDEN_DIR / name).write_bytes(text.encode("utf-8"))
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
