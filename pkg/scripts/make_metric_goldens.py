#!/usr/bin/env python3
"""Freeze expected metric values for the 20-pair fixture.

Computed with the independent oracles in tests/oracles.py (written before the
production metric code), over the shared metric tokenizer.
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import bleu_oracle, cider_oracle, meteor_oracle, rouge_l_oracle  # noqa: E402

from titleforge._porter import porter_stem  # noqa: E402
from titleforge.metrics import tokenize  # noqa: E402


def main():
    fixture = ROOT / "tests" / "fixtures" / "metric_pairs_20.jsonl"
    pairs = []
    with open(fixture, encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            pairs.append((list(tokenize(obj["candidate"])), list(tokenize(obj["reference"]))))
    assert len(pairs) == 20

    bleus = bleu_oracle(pairs, 4)
    golden = {
        "rouge_l": sum(rouge_l_oracle(c, r) for c, r in pairs) / len(pairs),
        "meteor": sum(meteor_oracle(c, r, porter_stem) for c, r in pairs) / len(pairs),
        "bleu_1": bleus[0],
        "bleu_2": bleus[1],
        "bleu_3": bleus[2],
        "bleu_4": bleus[3],
        "cider": cider_oracle(pairs),
    }
    out = ROOT / "tests" / "fixtures" / "golden" / "metrics_20pairs.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(golden, fh, indent=2)
        fh.write("\n")
    print(json.dumps(golden, indent=2))


if __name__ == "__main__":
    main()
