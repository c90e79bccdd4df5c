import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from satotate import kernels
from satotate.ffield import field_make
from satotate.moments import (BudgetError, ChunkSpec, chunk_record, double_factorial_F,
                              enumerate_Rn, fibre_power_moment, merge_chunk_records, mobius,
                              pair_partitions, power_sum, power_sum_by_partitions, rn_size,
                              set_partitions, trace_histogram)


def naive_power_sum(p, n, m):
    """Double loop over tuples and x with Euler's criterion; shares no code with the package."""
    total = 0
    for a in itertools.permutations(range(p), n):
        s = 0
        for x in range(p):
            v = 1
            for ai in a:
                v = v * (x - ai) % p
            s += 0 if v == 0 else (1 if pow(v, (p - 1) // 2, p) == 1 else -1)
        total += s ** m
    return total


@pytest.mark.parametrize("p,n,m", [(5, 3, 1), (5, 3, 2), (7, 3, 2), (5, 4, 3), (7, 4, 2), (7, 4, 3)])
def test_power_sum_matches_naive(p, n, m):
    assert power_sum(field_make(p), n, m).sum == naive_power_sum(p, n, m)


def test_known_values():
    assert power_sum(field_make(5), 3, 2).sum == 240
    assert power_sum(field_make(7), 4, 2).sum == 3528
    assert power_sum(field_make(11), 4, 3).sum == -60720


def test_double_factorial():
    assert [double_factorial_F(m) for m in range(9)] == [1, 0, 1, 0, 3, 0, 15, 0, 105]


def test_set_partitions_are_bell_numbers():
    assert [sum(1 for _ in set_partitions(n)) for n in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]


def test_pair_partitions_count():
    for m in (2, 4, 6, 8):
        assert len(pair_partitions(m)) == double_factorial_F(m)
    with pytest.raises(ValueError):
        pair_partitions(3)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_mobius_weights_sum_to_zero(n):
    assert sum(mobius(pi) for pi in set_partitions(n)) == 0


def test_extension_field_partition_oracle():
    s = field_make(3, 2)
    for n, m in [(3, 1), (3, 2), (4, 2), (4, 3)]:
        assert power_sum(s, n, m).sum == power_sum_by_partitions(s, n, m)


def test_enumeration_order_and_chunks():
    s = field_make(5)
    tuples = [b.a for b in enumerate_Rn(s, 3)]
    assert tuples == list(itertools.permutations(range(5), 3))
    parts = ChunkSpec.split(len(tuples), 7)
    glued = [b.a for c in parts for b in enumerate_Rn(s, 3, c)]
    assert glued == tuples
    assert list(enumerate_Rn(s, 6)) == []


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([5, 7, 11]), st.integers(3, 4), st.integers(1, 64), st.integers(1, 4))
def test_histogram_independent_of_chunking(p, n, chunks, threads):
    s = field_make(p)
    assert trace_histogram(s, n, chunks=chunks, threads=threads) == trace_histogram(s, n)


def test_backends_agree():
    s = field_make(13)
    shift, mul, chi = kernels.field_tables(s)
    total = rn_size(13, 4)
    py = kernels.trace_counts(0, total, 4, shift, mul, chi, impl=kernels.python)
    native = kernels.trace_counts(0, total, 4, shift, mul, chi)
    assert (py == native).all()


def test_budget_guard():
    with pytest.raises(BudgetError):
        power_sum(field_make(61), 3, 2, budget=1000)


def test_chunk_records_roundtrip():
    s = field_make(7)
    recs = [json.loads(json.dumps(chunk_record(s, 3, 2, i, 4))) for i in range(4)]
    assert merge_chunk_records(recs).sum == power_sum(s, 3, 2).sum
    with pytest.raises(ValueError, match="missing chunk ids \\[2\\]"):
        merge_chunk_records(recs[:2] + recs[3:])
    with pytest.raises(ValueError, match="duplicate"):
        merge_chunk_records(recs + recs[:1])
    other = dict(recs[0], m=3)
    with pytest.raises(ValueError):
        merge_chunk_records([other] + recs[1:])


def test_fibre_sandwich_direct_middle():
    s = field_make(13)
    fs = fibre_power_moment(s, 4, 1, 1)
    # direct: sum over tuples of T^2 * N where N = q + 1 - T
    hist = trace_histogram(s, 4)
    assert fs.middle == sum(c * t * t * (14 - t) for t, c in hist.items())
    assert fs.holds


def test_odd_odd_vanishing_small():
    for p in (5, 7):
        assert power_sum(field_make(p), 5, 3).sum == 0
