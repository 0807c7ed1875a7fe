import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qromlab.adversary import (
    ALWAYS_TRUE,
    PREDICATES,
    Z_EQUALS_THETA,
    OutputNormalizationError,
    OracleAlgorithm,
    classical_predicate,
    classical_query_adversary,
    guessing_adversary,
    library_adversaries,
    random_unitary_adversary,
    run,
    run_segment,
    run_segment_inverse,
    success_prob,
    superposed_query_adversary,
    two_query_chain_adversary,
)
from qromlab.oracle import FiniteFunction, all_functions, reprogram, sample_kwise, sample_uniform
from qromlab.qsim import Gate, RegisterLayout, init



def z_equals_h(H):
    return classical_predicate("z=H(x)", lambda x, t, z: z == H(x))


def test_q0_run_is_initial_state():
    A = guessing_adversary(1, 2, 2, 2)
    assert run(A, sample_uniform(2, 2, 0)).allclose(A.initial_state)


def test_classical_query_basis_output():
    A = classical_query_adversary(0, 1, 2)
    H = FiniteFunction(1, 2, np.array([3]))
    out = run(A, H)
    assert abs(out.amplitudes[A.layout.flat_index(0, 0, 3, 0)]) == pytest.approx(1)


@given(st.integers(0, 2**31))
def test_noop_reprogram_same_state(seed):
    H = sample_uniform(3, 2, seed)
    for A in library_adversaries(3, 2):
        assert run(A, H).allclose(run(A, reprogram(H, 1, H(1))))


def test_segment_conventions():
    A = two_query_chain_adversary(0, 3, 2)
    H = sample_uniform(3, 2, 4)
    s = A.initial_state
    for i in range(A.q + 1):
        assert run_segment(A, H, i, i, s).allclose(s)
    mid = run_segment(A, H, 0, 1, s)
    assert run_segment(A, H, 1, 2, mid).allclose(run_segment(A, H, 0, 2, s))
    assert run_segment_inverse(A, H, 0, 2, run_segment(A, H, 0, 2, s)).allclose(s)
    with pytest.raises(ValueError):
        run_segment(A, H, 2, 1, s)


def test_segment_ignores_reprogram_off_support():
    A = classical_query_adversary(0, 4, 2)
    H = sample_uniform(4, 2, 1)
    G = reprogram(H, 3, (H(3) + 1) % 4)
    assert run_segment(A, H, 0, 1, A.initial_state).allclose(run_segment(A, G, 0, 1, A.initial_state))


def test_success_examples():
    H = sample_uniform(2, 2, 9)
    A = classical_query_adversary(1, 2, 2)
    assert success_prob(A, H, ALWAYS_TRUE, 1) == pytest.approx(1)
    assert success_prob(A, H, z_equals_h(H), 1) == pytest.approx(1)
    half = superposed_query_adversary([0.5, 0.5], 2)
    assert success_prob(half, H, ALWAYS_TRUE, 0) == pytest.approx(0.5)
    assert success_prob(half, H, ALWAYS_TRUE, 1) == pytest.approx(0.5)


def test_query_and_copy_under_z_eq_theta():
    # with theta = H(x0) via the identity reprogram the copied answer lands in Z
    A = classical_query_adversary(0, 2, 2)
    for H in all_functions(2, 2):
        G = reprogram(H, 0, H(0))
        p = success_prob(A, G, Z_EQUALS_THETA, 0)
        # success_prob evaluates the predicate against H(x0)
        assert p == pytest.approx(1)


def test_guessing_average_over_theta():
    A = guessing_adversary(0, 2, 2, 3)
    total = np.mean([success_prob(A, FiniteFunction(2, 3, np.array([t, 0])), Z_EQUALS_THETA, 0) for t in range(8)])
    assert total == pytest.approx(1 / 8)


@given(st.integers(0, 2**31))
def test_output_normalization_and_completeness(seed):
    H = sample_uniform(3, 2, seed)
    advs = library_adversaries(3, 2) + [random_unitary_adversary(seed, q, 3, 2, 2) for q in range(3)]
    for A in advs:
        out = run(A, H)
        assert out.is_normalized(1e-10)
        assert sum(success_prob(A, H, ALWAYS_TRUE, x0) for x0 in range(3)) == pytest.approx(1, abs=1e-9)


def test_kwise_member_accepted():
    f = sample_kwise(4, 2, 2, 0)
    A = classical_query_adversary(0, 2, 2)
    assert success_prob(A, f, ALWAYS_TRUE, 0) == pytest.approx(1)


def test_output_check_raises():
    L = RegisterLayout(2, 2, 1, 1)
    A = OracleAlgorithm(L, init(L, basis=(0, 0, 0, 0)), ((Gate(("Y",), perm=np.array([0, 1])),),))
    H = FiniteFunction(2, 1, np.array([1, 1]))
    with pytest.raises(OutputNormalizationError):
        run(A, H)
    run(A, H, check_output=False)


def test_predicate_registry():
    assert set(PREDICATES) == {"z=theta", "true", "false", "parity"}
    assert list(PREDICATES["parity"].cell(1, 0, 4)) == [0, 1, 0, 1]
