import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satotate.ffield import FieldError, Poly, char_table, field_make, is_prime, quad_char

FIELDS = [(3, 1), (5, 1), (7, 1), (13, 1), (3, 2), (5, 2), (3, 3), (7, 2)]


@pytest.fixture(params=FIELDS, ids=lambda pk: f"F{pk[0]}^{pk[1]}")
def fld(request):
    return field_make(*request.param)


def test_rejects_bad_characteristic():
    for p in (2, 4, 9, 15, 1, 0):
        with pytest.raises(FieldError):
            field_make(p)


def test_rejects_reducible_or_misshaped_modulus():
    with pytest.raises(FieldError):
        field_make(3, 2, (2, 0, 1))  # x^2 - 1
    with pytest.raises(FieldError):
        field_make(3, 2, (1, 0, 0, 1))
    with pytest.raises(FieldError):
        field_make(3, 2, (1, 0, 2))  # not monic


def test_default_modulus_of_f9():
    assert field_make(3, 2).modulus == (1, 0, 1)
    assert field_make(3, 2).q == 9


def test_is_prime_small():
    primes = [n for n in range(60) if is_prime(n)]
    assert primes == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]


def test_field_axioms(fld):
    q = fld.q
    add, mul = fld.add_table, fld.mul_table
    els = np.arange(q)
    assert np.array_equal(add, add.T) and np.array_equal(mul, mul.T)
    assert np.array_equal(add[0], els) and np.array_equal(mul[1], els)
    # every nonzero element has a unique inverse
    for a in range(1, q):
        assert np.count_nonzero(mul[a] == 1) == 1
        assert fld.mul(a, fld.inv(a)) == 1
    # distributivity on all triples for small q
    if q <= 9:
        for a, b, c in itertools.product(range(q), repeat=3):
            assert mul[a, add[b, c]] == add[mul[a, b], mul[a, c]]


def test_sub_table_layout(fld):
    sub = fld.sub_table
    for x, a in itertools.product(range(fld.q), repeat=2):
        assert fld.add(sub[x, a], a) == x


def test_multiplicative_group_is_cyclic(fld):
    # some element has order q - 1
    orders = []
    for a in range(1, fld.q):
        x, k = a, 1
        while x != 1:
            x, k = fld.mul(x, a), k + 1
        orders.append(k)
    assert max(orders) == fld.q - 1


def test_character_table(fld):
    chi = char_table(fld)
    assert chi[0] == 0
    assert np.count_nonzero(chi == 1) == (fld.q - 1) // 2
    assert np.count_nonzero(chi == -1) == (fld.q - 1) // 2
    squares = {fld.mul(y, y) for y in range(1, fld.q)}
    for x in range(1, fld.q):
        assert chi[x] == (1 if x in squares else -1)
        assert quad_char(fld, x) == chi[x]


def test_euler_criterion_matches_python_pow():
    for p in (5, 7, 11, 13, 101):
        s = field_make(p)
        for x in range(1, p):
            legendre = pow(x, (p - 1) // 2, p)
            assert quad_char(s, x) == (1 if legendre == 1 else -1)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(FIELDS), st.data())
def test_character_is_multiplicative(pk, data):
    s = field_make(*pk)
    a = data.draw(st.integers(0, s.q - 1))
    b = data.draw(st.integers(0, s.q - 1))
    assert quad_char(s, s.mul(a, b)) == quad_char(s, a) * quad_char(s, b)


def poly_strategy(s, max_deg=6):
    return st.lists(st.integers(0, s.q - 1), min_size=0, max_size=max_deg + 1).map(
        lambda c: Poly(s, c))


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(FIELDS), st.data())
def test_poly_division_identity(pk, data):
    s = field_make(*pk)
    a = data.draw(poly_strategy(s))
    b = data.draw(poly_strategy(s).filter(lambda p: not p.is_zero()))
    qt, r = a.divmod(b)
    assert qt * b + r == a
    assert r.is_zero() or r.deg < b.deg


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(FIELDS), st.data())
def test_poly_gcd_divides_both(pk, data):
    s = field_make(*pk)
    a = data.draw(poly_strategy(s, 4).filter(lambda p: not p.is_zero()))
    b = data.draw(poly_strategy(s, 4).filter(lambda p: not p.is_zero()))
    g = a.gcd(b)
    assert (a % g).is_zero() and (b % g).is_zero()
    assert g.lead == 1


def test_poly_values_match_horner(fld):
    P = Poly.from_roots(fld, [0, 1, 2][: min(3, fld.q)])
    assert all(P.values()[x] == P(x) for x in range(fld.q))
    assert all(P(r) == 0 for r in (0, 1, 2)[: min(3, fld.q)])


def test_derivative_and_pth_root():
    s = field_make(3)
    x = Poly.monomial(s, 1)
    P = x ** 6 + Poly(s, [2])  # x^6 + 2 = (x^2 + 2)^3 in char 3
    assert P.derivative().is_zero()
    assert P.pth_root() ** 3 == P
