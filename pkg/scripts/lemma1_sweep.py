"""Sweep the simulator inequality over random-unitary adversaries and write a CSV.

    python3 scripts/lemma1_sweep.py --count 20 --n 6 --seed 1 --out sweep.csv
"""

import argparse
import csv
import time

from qromlab.adversary import PREDICATES, random_unitary_adversary
from qromlab.oracle import sample_uniform
from qromlab.reprogram import verify_lemma1
from qromlab.seeding import trial_rng


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--X", type=int, default=2)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--dim-e", type=int, default=2)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="lemma1_sweep.csv")
    args = ap.parse_args()

    rows = []
    t0 = time.perf_counter()
    for k in range(args.count):
        q = k % 3
        A = random_unitary_adversary(trial_rng(args.seed, k, 0), q, args.X, args.n, args.dim_e)
        H = sample_uniform(args.X, args.n, trial_rng(args.seed, k, 1))
        for name, V in PREDICATES.items():
            for x0 in range(args.X):
                r = verify_lemma1(A, H, x0, V)
                rows.append(dict(adversary=k, q=q, predicate=name, x0=x0, lhs=r.lhs, bound=r.bound,
                                 term1=r.term1, term2=r.term2, holds=r.holds))
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    bad = sum(not r["holds"] for r in rows)
    print(f"{len(rows)} cells, {bad} violations, {time.perf_counter() - t0:.1f}s -> {args.out}")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
