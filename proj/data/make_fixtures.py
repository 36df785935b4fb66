#!/usr/bin/env python3
"""Regenerates the bundled toy corpora (headline-style source/target pairs)."""
import json
import random
import sys
from pathlib import Path

SUBJECTS = ["the government", "the president", "police", "the central bank", "a court", "the army",
            "oil prices", "the company", "researchers", "the city council", "shares", "the union",
            "farmers", "the minister", "voters", "the team"]
SHORT = {"the government": "government", "the president": "president", "police": "police",
         "the central bank": "central bank", "a court": "court", "the army": "army",
         "oil prices": "oil prices", "the company": "company", "researchers": "researchers",
         "the city council": "council", "shares": "shares", "the union": "union",
         "farmers": "farmers", "the minister": "minister", "voters": "voters", "the team": "team"}
VERBS = [("announced", "announces"), ("rejected", "rejects"), ("approved", "approves"),
         ("criticized", "criticizes"), ("delayed", "delays"), ("proposed", "proposes"),
         ("cut", "cuts"), ("expanded", "expands"), ("suspended", "suspends"), ("backed", "backs")]
OBJECTS = ["new tax plan", "trade deal", "budget", "interest rates", "strike", "peace talks",
           "export ban", "election reform", "merger", "rescue package", "health law", "water project"]
PLACES = ["in paris", "on monday", "in tokyo", "on friday", "after a long debate", "in the capital",
          "despite protests", "late on sunday", "in brussels", "this week"]
REASONS = ["officials said", "citing rising costs", "amid growing pressure", "according to reports",
           "in a surprise move", "after weeks of talks"]


def pair(rng):
    subj = rng.choice(SUBJECTS)
    past, present = rng.choice(VERBS)
    obj = rng.choice(OBJECTS)
    src = f"{subj} {past} the {obj} {rng.choice(PLACES)} , {rng.choice(REASONS)} ."
    tgt = f"{SHORT[subj]} {present} {obj}"
    return {"source": src, "target": tgt}


def write(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    rng = random.Random(20190601)
    seen, records = set(), []
    while len(records) < 200:
        r = pair(rng)
        if r["source"] not in seen:
            seen.add(r["source"])
            records.append(r)
    write(out / "fixture_200.jsonl", records)
    test = []
    while len(test) < 20:
        r = pair(rng)
        if r["source"] not in seen:
            seen.add(r["source"])
            test.append(r)
    write(out / "fixture_test.jsonl", test)
    write(out / "overfit_10.jsonl", records[:10])


if __name__ == "__main__":
    main()
