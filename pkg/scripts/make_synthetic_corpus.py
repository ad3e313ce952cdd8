#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures.

Writes a 20-image synthetic scene-graph corpus plus the synonym table and
attribute lexicon the tests pair it with.  The output is a pure function of
the seed, so running this script twice produces identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os

from refsynth.expression import default_attribute_lexicon
from refsynth.synthgen import make_corpus_payload

SYNONYMS = {
    "cup": ["cup", "mug"],
    "near": ["near", "close to"],
    "sofa": ["sofa", "couch"],
    "table": ["table", "desk"],
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--images", type=int, default=20)
    parser.add_argument(
        "--out-dir",
        default=os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures"),
    )
    args = parser.parse_args()

    out_dir = os.path.abspath(args.out_dir)
    os.makedirs(out_dir, exist_ok=True)

    payload = make_corpus_payload(args.seed, args.images)
    targets = {
        "corpus20.json": payload,
        "lexicon.json": default_attribute_lexicon(),
        "synonyms.json": SYNONYMS,
    }
    for name, data in targets.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(data, handle, indent=2, sort_keys=True)
            handle.write("\n")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
