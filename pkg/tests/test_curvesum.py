import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from satotate.curvesum import (BranchTuple, branch_tuple, char_sum_poly, is_const_times_square,
                               monic_polys, point_count, squarefree_decompose,
                               squarefree_factorization, trace_sum, weil_bound_check, weil_sweep)
from satotate.ffield import Poly, field_make


def naive_trace(p, a):
    # Euler's criterion in plain integers
    total = 0
    for x in range(p):
        v = 1
        for ai in a:
            v = v * (x - ai) % p
        total += 0 if v == 0 else (1 if pow(v, (p - 1) // 2, p) == 1 else -1)
    return -total


def naive_point_count(p, a):
    affine = sum(1 for x in range(p) for y in range(p)
                 if (y * y - math.prod(x - ai for ai in a)) % p == 0)
    return affine + 1


def test_examples_f5():
    s = field_make(5)
    assert point_count(s, (0, 1, 2)) == 8
    assert point_count(s, (0, 1, 2, 3)) == 7


def test_branch_tuple_validation():
    s = field_make(7)
    with pytest.raises(ValueError):
        branch_tuple(s, (1, 1, 2))
    with pytest.raises(ValueError):
        branch_tuple(s, (1, 2))
    with pytest.raises(ValueError):
        branch_tuple(s, (1, 2, 9))
    assert branch_tuple(s, (0, 1, 2, 3, 4)).genus == 2


@settings(max_examples=120, deadline=None)
@given(st.sampled_from([5, 7, 11, 13]), st.data())
def test_trace_matches_naive_and_riemann(p, data):
    n = data.draw(st.integers(3, min(6, p)))
    a = tuple(data.draw(st.permutations(range(p)))[:n])
    s = field_make(p)
    tv = trace_sum(s, a)
    assert tv.T == naive_trace(p, a)
    assert point_count(s, a) == naive_point_count(p, a) == p - tv.T + 1
    assert tv.within_bound


def test_trace_invariant_under_affine_substitution():
    # T is unchanged by a -> a + c, and by a -> lam * a when chi(lam)^n = 1
    s = field_make(11)
    a = (0, 2, 5, 7)
    T = trace_sum(s, a).T
    for c in range(11):
        assert trace_sum(s, tuple((x + c) % 11 for x in a)).T == T
    for lam in range(1, 11):
        assert trace_sum(s, tuple(lam * x % 11 for x in a)).T == T


def test_nonsquare_scaling_flips_sign_for_odd_n():
    s = field_make(11)
    for a in [(0, 1, 3), (2, 5, 6, 8, 9)]:
        T = trace_sum(s, a).T
        for lam in range(1, 11):
            sign = 1 if pow(lam, 5, 11) == 1 else -1
            assert trace_sum(s, tuple(lam * x % 11 for x in a)).T == sign * T


def test_extension_field_traces():
    s = field_make(3, 2)
    for a in itertools.permutations(range(9), 3):
        assert trace_sum(s, a).within_bound
        assert point_count(s, a) == 9 - trace_sum(s, a).T + 1


def test_squarefree_decomposition():
    s = field_make(5)
    x = Poly.monomial(s, 1)
    P = (x + Poly(s, [1])) ** 3 * (x + Poly(s, [2])) ** 2 * (x ** 2 + Poly(s, [2])) * 3
    R, Q = squarefree_decompose(s, P)
    assert R * Q * Q == P
    assert R.gcd(R.derivative()).is_one()
    facs = squarefree_factorization(P)
    assert sorted(e for _, e in facs) == [1, 2, 3]


def test_squarefree_in_characteristic_p():
    s = field_make(3)
    x = Poly.monomial(s, 1)
    P = (x ** 3 + Poly(s, [1])) * (x + Poly(s, [2]))  # (x+1)^3 (x+2)
    R, Q = squarefree_decompose(s, P)
    assert R * Q * Q == P


def test_constant_times_square_detection():
    s = field_make(7)
    x = Poly.monomial(s, 1)
    Q = x ** 2 + Poly(s, [3])
    ok, c, root = is_const_times_square(s, Q * Q * 3)
    assert ok and c == 3 and root * root * c == Q * Q * 3
    assert not is_const_times_square(s, x ** 3 + Poly(s, [1]))[0]
    # c Q^2 gives a sum of order q, so the Weil bound must be skipped
    rep = weil_bound_check(s, Q * Q)
    assert rep.skipped


def test_char_sum_zero_poly_raises():
    with pytest.raises(ValueError):
        char_sum_poly(field_make(5), Poly(field_make(5), []))


def test_weil_sweep_small_fields():
    for p in (5, 7):
        s = field_make(p)
        for d in (2, 3):
            sw = weil_sweep(s, d)
            assert sw.passed and sw.total == p ** d
    assert sum(1 for _ in monic_polys(field_make(5), 2)) == 25
