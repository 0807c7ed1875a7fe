import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qromlab.adversary import guessing_adversary
from qromlab.fiat_shamir import (
    EncodingError,
    FiatShamir,
    FSProof,
    PairEncoding,
    fs_prove,
    fs_reduce,
    fs_verify,
    honest_fs_adversary,
    reduction_acceptance,
    schnorr_encoding,
    sigma_predicate,
    verify_fs_reduction,
)
from qromlab.oracle import FiniteFunction, sample_kwise, sample_uniform
from qromlab.seeding import frequency, trial_rng
from qromlab.sigma import SchnorrProtocol, rejecting_toy_protocol, run_interaction

S = SchnorrProtocol()
ENC = schnorr_encoding(S)


def key(seed):
    rng = trial_rng(seed)
    w = int(rng.integers(1, S.r))
    return pow(S.g, w, S.p), w


def test_encoding_round_trip():
    assert ENC.domain_size == 606 * 101
    for x, a in [(1, S.subgroup[0]), (606, S.subgroup[-1]), (64, 64)]:
        assert ENC.decode(ENC.index(x, a)) == (x, a)
    with pytest.raises(EncodingError):
        ENC.index(0, 1)
    with pytest.raises(EncodingError):
        ENC.decode(ENC.domain_size)
    with pytest.raises(EncodingError):
        PairEncoding([1, 1], [2])


def test_schnorr_first_iteration_and_round_trip():
    fs = FiatShamir(S, ENC)
    x, w = key(1)
    H = sample_kwise(4, ENC.domain_size, 6, 2)
    proof, it = fs.prove(H, x, w, trial_rng(3), return_iterations=True)
    assert it == 1 and fs.verify(H, x, proof)
    assert fs_verify(fs, H, x, fs_prove(fs, H, x, w, 8, trial_rng(4)))


def test_bad_witness_and_bottom():
    fs = FiatShamir(S, ENC)
    x, w = key(1)
    H = sample_kwise(4, ENC.domain_size, 6, 2)
    with pytest.raises(ValueError):
        fs.prove(H, x, (w + 1) % S.r, trial_rng(0))
    assert not fs.verify(H, x, None)
    assert not fs.verify(H, x, FSProof(0, 0))


def test_oracle_shape_checked():
    fs = FiatShamir(S, ENC)
    with pytest.raises(EncodingError):
        fs.prove(sample_uniform(4, 6, 0), *key(0), trial_rng(0))


def test_rejecting_iterations():
    sig = rejecting_toy_protocol(1.0, S)
    fs = FiatShamir(sig, ENC)
    H = sample_kwise(4, ENC.domain_size, 6, 2)
    x, w = key(2)
    assert fs.prove(H, x, w, trial_rng(0), max_iters=64) is None
    quarter = FiatShamir(rejecting_toy_protocol(0.25, S), ENC)
    its = [quarter.prove(H, x, w, trial_rng(7, k), return_iterations=True)[1] for k in range(10_000)]
    mean, sd = float(np.mean(its)), float(np.std(its, ddof=1))
    assert abs(mean - 4 / 3) <= 3 * sd / math.sqrt(len(its))


def test_flip_one_bit_of_a_rejects():
    fs = FiatShamir(S, ENC)
    x, w = key(3)
    bad = 0
    for k in range(1000):
        H = sample_kwise(4, ENC.domain_size, 6, trial_rng(11, k))
        pi = fs.prove(H, x, w, trial_rng(12, k))
        bit = 1 << int(trial_rng(13, k).integers(0, 10))
        bad += fs.verify(H, x, FSProof(pi.a ^ bit, pi.z))
    assert bad / 1000 <= 1 / 64 + 3 * math.sqrt((1 / 64) / 1000)


def small_fs(points=4, seed=0):
    rng = trial_rng(seed)
    x, w = key(seed)
    ys = [int(y) for y in rng.choice(S.r, size=points, replace=False)]
    enc = PairEncoding([x], [pow(S.g, y, S.p) for y in ys])
    return honest_fs_adversary(S, enc, w, [(x, y) for y in ys]), enc, x, w


def test_honest_fs_adversary_always_valid():
    A, enc, x, w = small_fs()
    H = sample_uniform(enc.domain_size, 6, 0)
    V = sigma_predicate(S, enc)
    from qromlab.adversary import success_prob

    assert sum(success_prob(A, H, V, x0) for x0 in range(enc.domain_size)) == pytest.approx(1)


@settings(max_examples=5)
@given(st.integers(0, 2**31))
def test_reduction_per_x0_and_aggregate(seed):
    A, enc, x, w = small_fs(seed=seed % 1000)
    rep = verify_fs_reduction(A, S, enc, sample_uniform(enc.domain_size, 6, seed))
    assert rep.holds and rep.per_x0_holds
    assert rep.constant == 20
    assert rep.sigma_success >= 1 / 20 - 1 / 256 - 1e-9


def test_reduction_guessing_adversary_low():
    enc = PairEncoding([64], [S.subgroup[1], S.subgroup[2]])
    A = guessing_adversary(0, 7, enc.domain_size, 6)
    from qromlab.qsim import RegisterLayout

    # Z must hold responses in Z_r, so pad the guessing fixture to dim_z = r
    from qromlab.adversary import OracleAlgorithm
    from qromlab.qsim import init

    L = RegisterLayout(enc.domain_size, 64, S.r, 1)
    G = OracleAlgorithm(L, init(L, basis=(0, 0, 7, 0)), (), "guess")
    rep = verify_fs_reduction(G, S, enc, sample_uniform(enc.domain_size, 6, 1))
    assert rep.sigma_success <= 1 / 64 + 1e-9 and rep.holds
    assert A.q == 0


def test_reduced_prover_interaction():
    A, enc, x, w = small_fs()
    p, err = reduction_acceptance(A, S, enc, 1000, 5)
    assert p >= 1 / 20 - 1 / 256 - 3 * err
    pk, _ = reduction_acceptance(A, S, enc, 300, 5, k=4)
    assert pk > 0.1


def test_reduced_prover_rewinds():
    A, enc, x, w = small_fs()
    P = fs_reduce(A, S, enc, sample_uniform(enc.domain_size, 6, 3))
    _, _, st0 = P.first_stage(trial_rng(0))
    back = P.backward(P.forward(st0, 17), 17)
    assert back.vector.allclose(st0.vector)
