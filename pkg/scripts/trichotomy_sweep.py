"""Sweep random co-moving triples: signature of gt versus the sign of f - 1.

Also reports the worst decompose-after-transform error per dimension.

    python3 scripts/trichotomy_sweep.py --triples 30 --points 200 --seed 0
"""

import argparse
from collections import Counter

import numpy as np

from sigflip.geometry import signature_at
from sigflip.randomized import random_comoving_triple
from sigflip.transform import EPS_H, decompose_field, transform

ZERO_BAND = 1e-8


def expected(f_minus_1: float, n: int) -> tuple[int, int, int]:
    if abs(f_minus_1) <= ZERO_BAND:
        return (0, 1, n - 1)
    return (1, 0, n - 1) if f_minus_1 < 0 else (0, 0, n)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--triples", type=int, default=30)
    parser.add_argument("--points", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    for n in (2, 3, 4):
        kinds, mismatches, worst = Counter(), 0, 0.0
        for _ in range(args.triples):
            T, _ = random_comoving_triple(rng, n)
            pts = T.chart.random_points(rng, args.points)
            gt = transform(T, pts)
            rec = decompose_field(gt, T.V, pts)
            for p in pts:
                f1 = T.f(list(p)) - 1.0
                rep = signature_at(gt, p, ZERO_BAND)
                kinds[rep.kind] += 1
                mismatches += rep.counts != expected(f1, n)
                if abs(f1) >= EPS_H:
                    worst = max(worst, float(np.max(np.abs(rec.g.matrix(p) - T.g.matrix(p)))))
        total = sum(kinds.values())
        print(f"n={n}: {total} points, {dict(kinds)}, mismatches={mismatches}, worst g round trip={worst:.2e}")


if __name__ == "__main__":
    main()
