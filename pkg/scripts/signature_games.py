"""NMA and CMA game frequencies for the bundled forgers.

    python3 scripts/signature_games.py --trials 10000 --seed 2
"""

import argparse

from qromlab.signatures import (
    ChallengeGuessingForger,
    HonestSignerForger,
    JunkForger,
    RerandomizeForger,
    ReplayForger,
    SignatureScheme,
    cma_game,
    nma_game,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    scheme = SignatureScheme()
    C, r = scheme.base.challenge_size, scheme.base.r
    nma = [("honest", HonestSignerForger(), 1.0), ("junk", JunkForger(), 1 / r)]
    nma += [(f"guess q={q}", ChallengeGuessingForger(q), 1 - (1 - 1 / C) ** q) for q in (1, 2, 4, 8)]
    for k, (name, f, expected) in enumerate(nma):
        res = nma_game(scheme, f, args.trials, args.seed + k)
        print(f"nma {name:12} {res.frequency:.4f} +- {res.stderr:.4f}  expected {expected:.4f}")
    for name, f in [("replay", ReplayForger()), ("rerandomize", RerandomizeForger()), ("honest", HonestSignerForger(b"\x09"))]:
        res = cma_game(scheme, f, 4, args.trials // 10, args.seed)
        print(f"cma {name:12} forgeries {res.forgeries}/{res.trials}, replays rejected {res.replays_rejected}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
