"""End-to-end acceptance checks, one test per criterion; each prints a PASS/FAIL line."""

import math
import time
from pathlib import Path

import pytest

from conftest import record
from qromlab.adversary import PREDICATES, Z_EQUALS_THETA, classical_query_adversary, library_adversaries, random_unitary_adversary
from qromlab.cli import main
from qromlab.extract import (
    FixedChallengeProver,
    HonestQuantumProver,
    PartialKnowledgeProver,
    collapsing_game,
    extract,
    extractor_bound_check,
    function_relation,
    graph_state,
    pair_fourier_distinguisher,
    projection_bound_check,
    qcur_check,
    random_bound_instance,
    random_two_part_instance,
    two_part_bound_check,
)
from qromlab.fiat_shamir import PairEncoding, fs_reduce, honest_fs_adversary, reduction_acceptance
from qromlab.oracle import all_functions, sample_uniform
from qromlab.reprogram import lemma1_lhs, lemma1_rhs, verify_lemma1, verify_thm1
from qromlab.seeding import frequency, trial_rng
from qromlab.sigma import SchnorrProtocol, TwoResponseProtocol
from qromlab.signatures import ChallengeGuessingForger, ReplayForger, Signature, SignatureScheme, cma_game, nma_game
from qromlab.fiat_shamir import FSProof

S = SchnorrProtocol()
SLACK = 1e-9


def honest_fs(seed=0, points=4):
    rng = trial_rng(seed)
    w = int(rng.integers(1, S.r))
    x = pow(S.g, w, S.p)
    ys = [int(y) for y in rng.choice(S.r, size=points, replace=False)]
    enc = PairEncoding([x], [pow(S.g, y, S.p) for y in ys])
    return honest_fs_adversary(S, enc, w, [(x, y) for y in ys]), enc, x, w


def test_criterion_1_exhaustive_lemma1():
    t0 = time.perf_counter()
    cells = bad = 0
    for H in all_functions(2, 2):
        for A in library_adversaries(2, 2):
            for V in PREDICATES.values():
                for x0 in range(2):
                    cells += 1
                    bad += not verify_lemma1(A, H, x0, V).holds
    A = classical_query_adversary(0, 2, 6)
    H = sample_uniform(2, 6, 0)
    lhs = lemma1_lhs(A, H, 0, Z_EQUALS_THETA)
    bound = lemma1_rhs(A, H, 0, Z_EQUALS_THETA)[0]
    closed = abs(lhs - 0.26171875) <= SLACK and abs(bound - (1 / 20 - 1 / 256)) <= SLACK
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and closed and elapsed < 60
    assert record(1, ok, f"{cells} cells, {bad} violations, lhs={lhs:.8f} bound={bound:.8f}, {elapsed:.1f}s")


def test_criterion_2_random_unitary_sweep():
    t0 = time.perf_counter()
    cells = bad = 0
    for k in range(20):
        q = k % 3
        A = random_unitary_adversary(trial_rng(2024, k), q, 2, 6, 2)
        assert A.layout.total <= 2**14
        H = sample_uniform(2, 6, trial_rng(2025, k))
        for V in PREDICATES.values():
            for x0 in range(2):
                cells += 1
                bad += not verify_lemma1(A, H, x0, V).holds
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 600
    assert record(2, ok, f"20 adversaries, {cells} cells, {bad} violations, {elapsed:.1f}s")


def test_criterion_3_thm1_family():
    parts, ok = [], True
    for k, A in enumerate(library_adversaries(2, 2)):
        rep = verify_thm1(A, Z_EQUALS_THETA, 200, trial_rng(3, k))
        good = rep.holds and rep.per_x0_holds and rep.family_matches_uniform and rep.k == 2 * (A.q + 1)
        ok &= good
        parts.append(f"{A.name}:{'ok' if good else 'FAIL'}")
    assert record(3, ok, "200 members each; " + ", ".join(parts))


def test_criterion_4_fs_reduction():
    A, enc, _, _ = honest_fs()
    p, err = reduction_acceptance(A, S, enc, 10_000, 4)
    target = 1 / 20 - 1 / 256
    ok = A.q == 1 and S.challenge_size == 64 and p >= target - 3 * err
    assert record(4, ok, f"acceptance {p:.4f} +- {err:.4f} vs {target:.5f}")


def test_criterion_5_projection_bounds():
    bad = 0
    for k in range(1000):
        P, psi = random_bound_instance(trial_rng(5, k), 6, 16)
        bad += not projection_bound_check(P, psi, 2 + k % 2).holds
    bad2 = 0
    for k in range(500):
        P, psi = random_two_part_instance(trial_rng(6, k), 3, 3, 8)
        bad2 += not two_part_bound_check(P, psi).holds
    import numpy as np

    hand = projection_bound_check([np.diag([1, 0]), np.diag([0, 1])], np.ones(2) / math.sqrt(2), 2)
    hand_ok = abs(hand.V - 0.5) <= 1e-12 and abs(hand.F - 0.25) <= 1e-12
    ok = bad == 0 and bad2 == 0 and hand_ok
    assert record(5, ok, f"fvsv violations {bad}/1000, fvsv2 violations {bad2}/500, hand (V,F)=({hand.V:.3f},{hand.F:.3f})")


def test_criterion_6_honest_extraction():
    w = 47
    x = pow(S.g, w, S.p)
    P = HonestQuantumProver(S, x, w)
    N, hits, wrong = 10_000, 0, 0
    truth = S.brute_force_dlog(x)
    for k in range(N):
        res = extract(P, x, 2, trial_rng(6, k))
        if res.ok:
            hits += 1
            wrong += res.witness != truth or pow(S.g, res.witness, S.p) != x
    target = 1 - 2 * 4 / 64
    ok = hits / N >= target and wrong == 0
    assert record(6, ok, f"extraction {hits / N:.4f} vs {target:.4f}, {wrong} bad witnesses")


def test_criterion_7_extractor_bound():
    w = 47
    x = pow(S.g, w, S.p)
    A, enc, _, _ = honest_fs()
    provers = {
        "honest": HonestQuantumProver(S, x, w),
        "fixed-challenge": FixedChallengeProver(S, x, 11, 4),
        "partial-knowledge": PartialKnowledgeProver(S, x, w),
        "partial-knowledge-wide": PartialKnowledgeProver(S, x, w, alpha=1.0, spread=1.6),
        "reduced-fs": fs_reduce(A, S, enc, sample_uniform(enc.domain_size, 6, 8)),
    }
    parts, ok = [], True
    for k, (name, P) in enumerate(provers.items()):
        rep = extractor_bound_check(P, 2, 2000, 70 + k)
        ok &= rep.holds
        parts.append(f"{name}: V={rep.acceptance:.3f} E={rep.extraction:.3f} bound={rep.bound:.3f}")
    assert record(7, ok, "; ".join(parts))


def _mutate(scheme, sig, m, rng):
    fields = [m[0], sig.proof.a >> 8, sig.proof.a & 0xFF, sig.proof.z]
    pos = int(rng.integers(0, 4))
    fields[pos] ^= int(rng.integers(1, 256))
    m2 = bytes([fields[0]])
    return m2, Signature(m2, FSProof((fields[1] << 8) | fields[2], fields[3]))


def test_criterion_8_signatures():
    scheme = SignatureScheme(S)
    round_trip = mutated_ok = 0
    for k in range(1000):
        rng = trial_rng(8, k)
        kp = scheme.keygen(rng)
        H = scheme.random_oracle(rng)
        m = bytes([int(rng.integers(0, 256))])
        sig = scheme.sign(H, kp.sk, m, rng)
        round_trip += scheme.verify(H, kp.pk, m, sig)
        m2, bad = _mutate(scheme, sig, m, rng)
        mutated_ok += scheme.verify(H, kp.pk, m2, bad)
    q = 2
    nma = nma_game(scheme, ChallengeGuessingForger(q), 10_000, 81)
    expected = q / 64
    nma_ok = abs(nma.frequency - expected) <= 3 * math.sqrt(expected * (1 - expected) / 10_000)
    cma = cma_game(scheme, ReplayForger(), 2, 500, 82)
    ok = round_trip == 1000 and mutated_ok / 1000 <= 2 / 64 and nma_ok and cma.forgeries == 0
    assert record(8, ok, f"round trips {round_trip}/1000, mutations accepted {mutated_ok}/1000, "
                         f"nma q={q} {nma.frequency:.4f} vs {expected:.4f}, cma replays counted {cma.forgeries}")


def test_criterion_9_collapsing():
    f = [2, 0, 3, 1]
    bij = collapsing_game(function_relation(f, 4), graph_state(f, 4, dS=2), pair_fourier_distinguisher(2, 4, 4, 0, 1))
    x = pow(S.g, 47, S.p)
    a = pow(S.g, 5, S.p)
    two = qcur_check(TwoResponseProtocol(S), x, a, 3, trials=10_000, seed=9)
    sch = qcur_check(S, x, a, 3)
    ok = bij.exact and bij.advantage == 0 and abs(two.advantage - 0.5) <= 3 * two.stderr and sch.advantage == 0
    assert record(9, ok, f"bijection {bij.advantage}, two-response {two.advantage:.4f} +- {two.stderr:.4f}, schnorr qcur {sch.advantage}")


CLI_RUNS = [
    ["lemma1", "--oracles", "2"],
    ["thm1", "--X", "2", "--n", "2", "--members", "20"],
    ["fsreduce", "--trials", "100"],
    ["sigma-run", "--trials", "200"],
    ["sigma-extract", "--prover", "all", "--trials", "50"],
    ["keygen"],
    ["sign", "--message", "2a"],
    ["verify", "--message", "2a"],
    ["nma-game", "--trials", "200"],
    ["cma-game", "--forger", "replay", "--trials", "50"],
    ["bounds", "--trials", "50"],
    ["bounds", "--lemma", "fvsv2", "--trials", "50"],
    ["collapse-game", "--relation", "two-preimage", "--trials", "500"],
    ["qcur", "--protocol", "two-response", "--trials", "500"],
]


def _run_all(out: Path) -> None:
    key, sig = out / "key.json", out / "signature.json"
    for args in CLI_RUNS:
        extra = ["--seed", "10", "--out", str(out)]
        if args[0] in ("keygen", "sign", "verify"):
            extra += ["--key", str(key)]
        if args[0] in ("sign", "verify"):
            extra += ["--signature", str(sig)]
        main(args + extra)


def test_criterion_10_determinism(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = Path("reports")
    _run_all(out)
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    for p in out.iterdir():
        p.unlink()
    _run_all(out)
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    names = {a[0] for a in CLI_RUNS}
    covered = all(f"{n}.json" in first and f"{n}.csv" in first for n in names)
    differing = sorted(n for n in first if first[n] != second.get(n))
    ok = covered and not differing and set(first) == set(second)
    assert record(10, ok, f"{len(names)} subcommands, {len(first)} files, differing: {differing or 'none'}")
