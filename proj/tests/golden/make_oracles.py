"""Regenerates oracles.json: exhaustive k-center and sum-of-radii optima on
small planar instances, computed independently of the C++ oracles."""

import itertools
import json
import math
import random
from pathlib import Path


def kcenter(pts, k):
    n = len(pts)
    best = math.inf
    for size in range(1, min(k, n) + 1):
        for centers in itertools.combinations(range(n), size):
            cost = max(min(math.dist(pts[p], pts[c]) for c in centers) for p in range(n))
            best = min(best, cost)
    return best


def sum_radii(pts, k):
    # Every assignment of points to at most k clusters, each cluster centred
    # at its best member.
    n = len(pts)
    best = math.inf
    for labels in itertools.product(range(k), repeat=n):
        if labels[0] != 0:
            continue
        total = 0.0
        for c in set(labels):
            members = [i for i in range(n) if labels[i] == c]
            total += min(max(math.dist(pts[a], pts[b]) for b in members) for a in members)
            if total >= best:
                break
        best = min(best, total)
    return best


def main():
    rng = random.Random(20240611)
    cases = []
    for case in range(40):
        n = rng.randint(2, 8)
        k = rng.randint(1, 3)
        pts = [(rng.randint(0, 50), rng.randint(0, 50)) for _ in range(n)]
        cases.append({"points": pts, "k": k, "kcenter": kcenter(pts, k), "sum_radii": sum_radii(pts, k)})
    out = Path(__file__).with_name("oracles.json")
    lines = ",\n".join("  " + json.dumps(c) for c in cases)
    out.write_text('{"cases": [\n' + lines + "\n]}\n")


if __name__ == "__main__":
    main()
