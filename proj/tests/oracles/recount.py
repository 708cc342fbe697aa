#!/usr/bin/env python3
"""Recount aggregate fields from an exported dump and compare with the stored values.

Usage: recount.py DUMP_DIR
Prints one JSON object {"checked", "mismatch_count", "mismatches"}; exit 0 when
the dump was readable, whatever the result.
"""
import collections
import gzip
import json
import os
import sys


def records(root, kind, manifest):
    for part in manifest["kinds"][kind]["files"]:
        with gzip.open(os.path.join(root, part["path"]), "rt", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield json.loads(line)


def main(root):
    with open(os.path.join(root, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    data = {k: list(records(root, k, manifest)) for k in manifest["kinds"]}

    works = {w["id"]: w for w in data["works"]}
    cited = collections.Counter()
    by = {k: collections.defaultdict(set) for k in ("authors", "venues", "institutions", "concepts")}
    for wid, w in works.items():
        for ref in set(w["referenced_works"]):
            if ref in works:
                cited[ref] += 1
        for a in w["authorships"]:
            by["authors"][a["author"]].add(wid)
            for inst in a["institutions"]:
                by["institutions"][inst].add(wid)
        for loc in w["locations"]:
            if loc["venue"]:
                by["venues"][loc["venue"]].add(wid)
        for c in w["concepts"]:
            by["concepts"][c["id"]].add(wid)

    mismatches = []
    checked = 0

    def expect(rec, field, value):
        nonlocal checked
        checked += 1
        if rec[field] != value:
            mismatches.append({"id": rec["id"], "field": field, "stored": rec[field], "recount": value})

    for wid, w in works.items():
        expect(w, "cited_by_count", cited[wid])
    for a in data["authors"]:
        mine = by["authors"].get(a["id"], set())
        expect(a, "works_count", len(mine))
        expect(a, "cited_by_count", sum(cited[w] for w in mine))
    for kind in ("venues", "institutions", "concepts"):
        for r in data[kind]:
            expect(r, "works_count", len(by[kind].get(r["id"], set())))

    print(json.dumps({"checked": checked, "mismatch_count": len(mismatches), "mismatches": mismatches[:20]}))


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
