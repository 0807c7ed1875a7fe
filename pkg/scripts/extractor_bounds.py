"""Rewinding extractor against the library provers, plus the NMA -> extraction pipeline.

    python3 scripts/extractor_bounds.py --trials 2000 --seed 5
"""

import argparse

from qromlab.extract import FixedChallengeProver, HonestQuantumProver, PartialKnowledgeProver, TwoResponseProver, extractor_bound_check
from qromlab.sigma import SchnorrProtocol, TwoResponseProtocol
from qromlab.signatures import SignatureScheme, nma_extraction_pipeline


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--t", type=int, default=2)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    S = SchnorrProtocol()
    w = 47
    x = pow(S.g, w, S.p)
    provers = {
        "honest": HonestQuantumProver(S, x, w),
        "fixed-challenge": FixedChallengeProver(S, x, 11),
        "partial-knowledge": PartialKnowledgeProver(S, x, w),
        "two-response (unchecked)": TwoResponseProver(TwoResponseProtocol(S), x, w),
    }
    print(f"{'prover':26} {'V':>6} {'attempt':>8} {'E':>6} {'bound':>7} holds")
    ok = True
    for k, (name, P) in enumerate(provers.items()):
        r = extractor_bound_check(P, args.t, args.trials, args.seed + k)
        print(f"{name:26} {r.acceptance:6.3f} {r.attempt_success:8.3f} {r.extraction:6.3f} {r.bound:7.3f} {r.holds}")
        ok &= r.holds or "unchecked" in name
    pipe = nma_extraction_pipeline(SignatureScheme(S), args.trials // 4, args.seed)
    print(f"NMA pipeline: forgery rate {pipe.forgery_rate:.3f}, E={pipe.extraction:.3f}, bound={pipe.bound:.2e}, holds={pipe.holds}")
    return 0 if ok and pipe.holds else 1


if __name__ == "__main__":
    raise SystemExit(main())
