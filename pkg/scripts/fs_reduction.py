"""Honest FS prover pushed through the reduction: exact per-point report and sampled acceptance.

    python3 scripts/fs_reduction.py --points 4 --trials 10000 --seed 3
"""

import argparse
import json

from qromlab.fiat_shamir import PairEncoding, honest_fs_adversary, reduction_acceptance, verify_fs_reduction
from qromlab.oracle import sample_uniform
from qromlab.reprogram import loss_constant
from qromlab.seeding import trial_rng
from qromlab.sigma import SchnorrProtocol


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=4)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    S = SchnorrProtocol()
    rng = trial_rng(args.seed)
    w = int(rng.integers(1, S.r))
    x = pow(S.g, w, S.p)
    ys = [int(y) for y in rng.choice(S.r, size=args.points, replace=False)]
    enc = PairEncoding([x], [pow(S.g, y, S.p) for y in ys])
    A = honest_fs_adversary(S, enc, w, [(x, y) for y in ys])

    exact = verify_fs_reduction(A, S, enc, sample_uniform(enc.domain_size, 6, rng))
    p, err = reduction_acceptance(A, S, enc, args.trials, args.seed)
    target = 1 / loss_constant(1) - 1 / (2 * 2 * S.challenge_size)
    print(json.dumps(dict(exact_sigma_success=exact.sigma_success, exact_bound=exact.aggregate_bound,
                          exact_holds=exact.holds, sampled=p, stderr=err, target=target), indent=2))
    return 0 if exact.holds and p >= target - 3 * err else 1


if __name__ == "__main__":
    raise SystemExit(main())
