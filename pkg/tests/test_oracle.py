import itertools
import math
from collections import Counter

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from qromlab.oracle import (
    IRREDUCIBLE_POLYS,
    CapacityError,
    FiniteFunction,
    KWiseFamilyMember,
    all_functions,
    evaluate_kwise,
    gf_mul,
    kwise_family,
    materialize,
    reprogram,
    sample_kwise,
    sample_uniform,
)


def test_single_entry_table():
    H = sample_uniform(1, 1, 3)
    assert H.table.shape == (1,) and H(0) in (0, 1)


def test_same_seed_same_table():
    assert sample_uniform(4, 2, 11) == sample_uniform(4, 2, 11)


def test_uniform_per_point_chi_square():
    counts = np.zeros((4, 64))
    for s in range(10_000):
        H = sample_uniform(4, 6, s)
        counts[np.arange(4), H.table] += 1
    expected = 10_000 / 64
    for row in counts:
        chi2 = float(((row - expected) ** 2 / expected).sum())
        # 63 degrees of freedom; 99.99% quantile is about 116
        assert chi2 < 116


def test_table_rejects_out_of_range():
    with pytest.raises(ValueError):
        FiniteFunction(2, 1, np.array([0, 2]))
    with pytest.raises(ValueError):
        FiniteFunction(2, 1, np.array([0]))


def test_capacity_cap(monkeypatch):
    monkeypatch.setenv("QROMLAB_TABLE_CAP", "64")
    with pytest.raises(CapacityError):
        sample_uniform(16, 3, 0)
    sample_uniform(8, 3, 0)


def test_reprogram_table_edit():
    H = FiniteFunction(2, 1, np.array([0, 1]))
    assert list(reprogram(H, 0, 1).table) == [1, 1]


@given(st.integers(0, 2**32 - 1), st.integers(0, 7), st.integers(0, 15), st.integers(0, 15))
def test_reprogram_last_write_and_identity(seed, x, t1, t2):
    H = sample_uniform(8, 4, seed)
    assert reprogram(reprogram(H, x, t1), x, t2) == reprogram(H, x, t2)
    assert reprogram(H, x, H(x)) == H
    diff = int(np.sum(reprogram(H, x, t1).table != H.table))
    assert diff == (0 if t1 == H(x) else 1)


def test_reprogram_does_not_mutate():
    H = sample_uniform(4, 2, 0)
    before = H.table.copy()
    reprogram(H, 1, (H(1) + 1) % 4)
    assert np.array_equal(H.table, before)
    with pytest.raises(ValueError):
        H.table[0] = 1


def test_json_round_trip():
    H = sample_uniform(5, 3, 2)
    assert FiniteFunction.from_json(H.to_json()) == H


def test_all_functions_count():
    fs = list(all_functions(2, 2))
    assert len(fs) == 16 and len(set(fs)) == 16


@pytest.mark.parametrize("m", sorted(IRREDUCIBLE_POLYS))
def test_polynomials_irreducible(m):
    t = sympy.symbols("t")
    bits = IRREDUCIBLE_POLYS[m]
    poly = sympy.Poly(sum(t**i for i in range(bits.bit_length()) if bits >> i & 1), t, modulus=2)
    assert poly.degree() == m and poly.is_irreducible


@given(st.integers(1, 12), st.data())
def test_gf_field_laws(m, data):
    a, b, c = (data.draw(st.integers(0, (1 << m) - 1)) for _ in range(3))
    assert gf_mul(a, b, m) == gf_mul(b, a, m)
    assert gf_mul(a, gf_mul(b, c, m), m) == gf_mul(gf_mul(a, b, m), c, m)
    assert gf_mul(a, b ^ c, m) == gf_mul(a, b, m) ^ gf_mul(a, c, m)
    assert gf_mul(a, 1, m) == a
    if a:
        assert any(gf_mul(a, x, m) == 1 for x in range(1 << m))


def test_zero_and_constant_polynomials():
    zero = KWiseFamilyMember(3, (0, 0, 0), 8, 2)
    const = KWiseFamilyMember(1, (5,), 8, 3)
    assert all(evaluate_kwise(zero, x) == 0 for x in range(8))
    assert all(evaluate_kwise(const, x) == 5 for x in range(8))


def test_pairwise_uniform_exhaustive():
    counts = Counter()
    family = list(kwise_family(2, 4, 2))
    for f in family:
        tab = materialize(f).table
        for x1, x2 in itertools.permutations(range(4), 2):
            counts[(x1, x2, tab[x1], tab[x2])] += 1
    per = len(family) / 16
    assert set(counts.values()) == {per}
    assert len(counts) == 12 * 16


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_materialize_matches_pointwise(seed, k):
    f = sample_kwise(k, 12, 3, seed)
    tab = materialize(f).table
    assert all(tab[x] == f(x) == evaluate_kwise(f, x) for x in range(12))


def test_kwise_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        KWiseFamilyMember(2, (0,), 4, 2)
    with pytest.raises(ValueError):
        KWiseFamilyMember(1, (4,), 4, 2)


def test_kwise_marginal_uniform():
    counts = np.zeros(8)
    for s in range(4000):
        counts[sample_kwise(4, 100, 3, s)(37)] += 1
    expected = 500
    assert float(((counts - expected) ** 2 / expected).sum()) < 30
