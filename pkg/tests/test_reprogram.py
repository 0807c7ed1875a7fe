import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qromlab.adversary import (
    ALWAYS_TRUE,
    PREDICATES,
    Z_EQUALS_THETA,
    classical_query_adversary,
    guessing_adversary,
    library_adversaries,
    random_unitary_adversary,
    success_prob,
    superposed_query_adversary,
    two_query_chain_adversary,
)
from qromlab.oracle import all_functions, sample_uniform
from qromlab.reprogram import (
    lemma1_lhs,
    lemma1_rhs,
    loss_constant,
    stage_one,
    stage_two,
    verify_lemma1,
    verify_thm1,
)
from qromlab.seeding import frequency, trial_rng

H64 = sample_uniform(2, 6, 0)


def test_loss_constant():
    assert [loss_constant(q) for q in range(3)] == [6, 20, 42]


def test_stage_one_classical_measures_x0():
    A = classical_query_adversary(1, 2, 2)
    H = sample_uniform(2, 2, 3)
    for s in range(20):
        cp = stage_one(A, H, trial_rng(s, 0))
        assert cp.measured_x == 1


def test_stage_one_superposed_half():
    A = superposed_query_adversary([0.5, 0.5], 2)
    H = sample_uniform(2, 2, 3)
    hits = sum(stage_one(A, H, trial_rng(5, s), i=0).measured_x for s in range(10_000))
    p, _ = frequency(hits, 10_000)
    assert abs(p - 0.5) <= 3 * math.sqrt(0.25 / 10_000)


def test_stage_one_q0():
    A = guessing_adversary(0, 1, 2, 2)
    assert {stage_one(A, sample_uniform(2, 2, 0), trial_rng(1, s)).i for s in range(10)} == {0}


def test_stage_two_classical_cases():
    A = classical_query_adversary(0, 2, 2)
    H = sample_uniform(2, 2, 7)
    cp0 = stage_one(A, H, trial_rng(0, 0), i=0)
    cp1 = stage_one(A, H, trial_rng(0, 1), i=1)
    for theta in range(4):
        assert stage_two(cp0, theta, 0, Z_EQUALS_THETA)[1] == pytest.approx(1)
        assert stage_two(cp0, theta, 1, Z_EQUALS_THETA)[1] == pytest.approx(float(theta == H(0)))
        for b in (0, 1):
            assert stage_two(cp1, theta, b, Z_EQUALS_THETA)[1] == pytest.approx(float(theta == H(0)))


def test_lhs_closed_form_classical_query():
    A = classical_query_adversary(0, 2, 6)
    assert lemma1_lhs(A, H64, 0, Z_EQUALS_THETA) == pytest.approx(0.26171875, abs=1e-9)
    bound, t1, t2 = lemma1_rhs(A, H64, 0, Z_EQUALS_THETA)
    assert (t1, t2) == pytest.approx((1, 1), abs=1e-12)
    assert bound == pytest.approx(1 / 20 - 1 / 256, abs=1e-9)


def test_guessing_constants():
    A = guessing_adversary(0, 5, 2, 6)
    assert lemma1_lhs(A, H64, 0, Z_EQUALS_THETA) == pytest.approx(1 / 64, abs=1e-12)
    bound, t1, t2 = lemma1_rhs(A, H64, 0, Z_EQUALS_THETA)
    assert t1 == pytest.approx(1 / 64) and t2 == pytest.approx(1)
    assert bound == pytest.approx(1 / (6 * 64) - 1 / 128) and bound < 0


def test_never_output_gives_zero():
    A = classical_query_adversary(0, 2, 6)
    assert lemma1_lhs(A, H64, 1, Z_EQUALS_THETA) == 0
    assert lemma1_rhs(A, H64, 1, Z_EQUALS_THETA)[2] == 0


@pytest.mark.parametrize("x0", [0, 1])
def test_verify_examples_hold(x0):
    for A in (classical_query_adversary(0, 2, 6), guessing_adversary(0, 5, 2, 6)):
        assert verify_lemma1(A, H64, x0, Z_EQUALS_THETA).holds


def test_exhaustive_sweep_library():
    for H in all_functions(2, 2):
        for A in library_adversaries(2, 2):
            for V in PREDICATES.values():
                for x0 in range(2):
                    rep = verify_lemma1(A, H, x0, V)
                    assert rep.holds, rep


@settings(max_examples=6)
@given(st.integers(0, 2**31), st.integers(0, 2))
def test_random_unitary_adversaries_hold(seed, q):
    A = random_unitary_adversary(seed, q, 2, 2, 2)
    H = sample_uniform(2, 2, seed)
    for V in PREDICATES.values():
        for x0 in range(2):
            assert verify_lemma1(A, H, x0, V).holds


def test_always_true_lhs_in_unit_interval():
    A = random_unitary_adversary(3, 2, 2, 2, 2)
    H = sample_uniform(2, 2, 0)
    vals = [lemma1_lhs(A, H, x0, ALWAYS_TRUE) for x0 in range(2)]
    assert all(0 <= v <= 1 for v in vals)


def test_sampled_simulator_matches_exact():
    A = superposed_query_adversary([0.25, 0.75], 2)
    H = sample_uniform(2, 2, 1)
    exact = sum(lemma1_lhs(A, H, x0, Z_EQUALS_THETA) for x0 in range(2))
    N = 20_000
    acc = 0.0
    for s in range(N):
        rng = trial_rng(17, s)
        cp = stage_one(A, H, rng)
        theta = int(rng.integers(0, 4))
        b = int(rng.integers(0, 2))
        acc += stage_two(cp, theta, b, Z_EQUALS_THETA)[1]
    mean = acc / N
    assert abs(mean - exact) <= 3 * math.sqrt(0.25 / N)


def test_monte_carlo_path(monkeypatch):
    import qromlab.reprogram as rp

    A = two_query_chain_adversary(0, 2, 2)
    H = sample_uniform(2, 2, 0)
    exact = lemma1_lhs(A, H, 0, ALWAYS_TRUE)
    monkeypatch.setattr(rp, "EXHAUSTIVE_CELLS", 4)
    v, err = lemma1_lhs(A, H, 0, ALWAYS_TRUE, rng=trial_rng(0), samples=4000, with_stderr=True)
    assert abs(v - exact) <= 4 * err + 1e-12


def test_thm1_library_q1():
    A = classical_query_adversary(0, 2, 2)
    rep = verify_thm1(A, Z_EQUALS_THETA, 200, trial_rng(3))
    assert rep.holds and rep.per_x0_holds and rep.family_matches_uniform
    assert rep.constant == 20 and rep.k == 4


def test_thm1_guessing():
    A = guessing_adversary(0, 1, 2, 2)
    rep = verify_thm1(A, Z_EQUALS_THETA, 200, trial_rng(4))
    assert rep.lhs == pytest.approx(1 / 4)
    assert rep.rhs <= 1 / 24 + 1e-12
