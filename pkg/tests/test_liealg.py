import io
import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from satotate.haar import GroupSpec, trace_moment_weyl
from satotate.liealg import (a4_algebraic, build_root_system, dominant_rep, freudenthal_multiplicity,
                             kumar_containment, length_set, multiplicity_table,
                             orbit_negation_stable, orbit_orthogonality_check, product_length_set,
                             tensor_square_decompose, weight, weyl_dimension, weyl_orbit,
                             write_table)

SYSTEMS = [("A", 1), ("B", 2), ("C", 2), ("B", 3), ("C", 3), ("D", 4)]
H = Fraction(1, 2)


def rs_of(tr):
    return build_root_system(*tr)


def test_invalid_systems():
    for t, r in [("A", 2), ("B", 1), ("C", 7), ("D", 2), ("E", 6)]:
        with pytest.raises(ValueError):
            build_root_system(t, r)
    assert build_root_system("D", 3).rank == 3


def test_basic_data():
    c2 = build_root_system("C", 2)
    assert set(c2.positive_roots) == {weight(v) for v in [(1, -1), (1, 1), (2, 0), (0, 2)]}
    assert c2.rho == (2, 1)
    assert build_root_system("B", 2).rho == (Fraction(3, 2), H)
    a1 = build_root_system("A", 1)
    assert len(a1.positive_roots) == 1 and a1.rho == a1.omega(1)
    for t in "BCD":
        rs = build_root_system(t, 4)
        assert rs.omega(1) == (1, 0, 0, 0)


def test_orbits():
    c2 = build_root_system("C", 2)
    assert weyl_orbit(c2, (1, 0)) == {weight(v) for v in [(1, 0), (-1, 0), (0, 1), (0, -1)]}
    assert len(weyl_orbit(build_root_system("D", 3), (1, 0, 0))) == 6
    assert weyl_orbit(c2, (0, 0)) == {(0, 0)}
    # D_n spinor orbit: even sign changes only
    d4 = build_root_system("D", 4)
    orb = weyl_orbit(d4, (H, H, H, H))
    assert len(orb) == 8 and all(sum(c < 0 for c in v) % 2 == 0 for v in orb)


@pytest.mark.parametrize("tr", SYSTEMS)
def test_orbit_closed_under_reflections_and_negation(tr):
    rs = rs_of(tr)
    for k in (1, 2, 3):
        lam = rs.k_omega1(k)
        orb = weyl_orbit(rs, lam)
        assert all(dominant_rep(rs, v) == lam for v in orb)
        assert orbit_negation_stable(rs, lam)


def test_freudenthal_examples():
    c2 = build_root_system("C", 2)
    assert freudenthal_multiplicity(c2, (2, 0), (1, 1)) == 1
    assert freudenthal_multiplicity(c2, (2, 0), (0, 0)) == 2
    assert freudenthal_multiplicity(c2, (2, 0), (2, 0)) == 1
    assert freudenthal_multiplicity(c2, (2, 0), (H, H)) == 0
    assert freudenthal_multiplicity(c2, (1, 0), (2, 0)) == 0


def test_weyl_dimension_examples():
    c2 = build_root_system("C", 2)
    assert weyl_dimension(c2, (1, 0)) == 4
    assert weyl_dimension(c2, (2, 0)) == 10
    assert weyl_dimension(c2, (0, 0)) == 1
    # classical dimensions of the standard representations
    for t, r, d in [("B", 3, 7), ("C", 3, 6), ("D", 4, 8), ("A", 1, 2)]:
        rs = build_root_system(t, r)
        assert weyl_dimension(rs, rs.omega(1)) == d


@pytest.mark.parametrize("tr", SYSTEMS)
def test_freudenthal_totals(tr):
    rs = rs_of(tr)
    for c in itertools.product(range(4), repeat=rs.rank):
        w = tuple(sum((ci * f[j] for ci, f in zip(c, rs.fundamental_weights)), Fraction(0))
                  for j in range(rs.dim))
        d = weyl_dimension(rs, w)
        if d > 500:
            continue
        tab = multiplicity_table(rs, w)
        assert tab.total == d
        assert tab.mults[weight(w)] == 1
        assert all(m > 0 for m in tab.mults.values())


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SYSTEMS), st.data())
def test_weight_multiplicities_are_weyl_invariant(tr, data):
    rs = rs_of(tr)
    k = data.draw(st.integers(1, 3))
    tab = multiplicity_table(rs, rs.k_omega1(k))
    ch = tab.character()
    v = data.draw(st.sampled_from(sorted(ch)))
    for u in weyl_orbit(rs, v):
        assert ch[u] == ch[v]


def test_tensor_square_examples():
    c2 = build_root_system("C", 2)
    assert dict(tensor_square_decompose(c2, (1, 0))) == {(2, 0): 1, (1, 1): 1, (0, 0): 1}
    b2 = build_root_system("B", 2)
    parts = tensor_square_decompose(b2, (1, 0))
    assert dict(parts) == {(2, 0): 1, (1, 1): 1, (0, 0): 1}
    assert sorted(weyl_dimension(b2, w) for w in parts) == [1, 10, 14]
    a1 = build_root_system("A", 1)
    assert dict(tensor_square_decompose(a1, a1.omega(1))) == {a1.k_omega1(2): 1, (0, 0): 1}


def test_a4_algebraic_values():
    assert a4_algebraic(build_root_system("C", 2), (1, 0)) == 3
    assert a4_algebraic(build_root_system("B", 2), (1, 0)) == 3
    assert a4_algebraic(build_root_system("C", 3), (1, 0, 0)) == 3
    a1 = build_root_system("A", 1)
    assert a4_algebraic(a1, a1.omega(1)) == 2


def test_a4_agrees_with_weyl_quadrature():
    pairs = [(("A", 1), GroupSpec("Sp", 1)), (("C", 2), GroupSpec("Sp", 2)),
             (("C", 3), GroupSpec("Sp", 3)), (("B", 2), GroupSpec("SO", 5))]
    for tr, spec in pairs:
        rs = rs_of(tr)
        assert abs(a4_algebraic(rs, rs.omega(1)) - trace_moment_weyl(spec, 4).value) < 1e-8


def test_length_sets():
    a1 = build_root_system("A", 1)
    for k in (1, 2, 3):
        assert len(length_set(a1, tensor_square_decompose(a1, a1.k_omega1(k)))) == k + 1
    c2 = build_root_system("C", 2)
    assert length_set(c2, tensor_square_decompose(c2, (1, 0))) == {4, 2, 0}
    assert length_set(c2, [(0, 0)]) == {0}
    # B2 and C2 name the same algebra but give different norms for omega_1 squares
    b2 = build_root_system("B", 2)
    assert length_set(b2, tensor_square_decompose(b2, b2.omega(2))) != \
        length_set(c2, tensor_square_decompose(c2, c2.omega(1)))


def test_product_length_set():
    assert product_length_set({0, 2}, {0, 2}) == {0, 2, 4}
    assert product_length_set({0}, {1, 5}) == {1, 5}
    assert product_length_set({0, 1, 4}, {0, 1}) == {0, 1, 2, 4, 5}


@settings(max_examples=60, deadline=None)
@given(st.sets(st.fractions(-10, 10), min_size=1, max_size=6),
       st.sets(st.fractions(-10, 10), min_size=1, max_size=6))
def test_sumset_lower_bound(S1, S2):
    assert len(product_length_set(S1, S2)) >= len(S1) + len(S2) - 1


def test_orbit_orthogonality():
    assert orbit_orthogonality_check(build_root_system("C", 3), (1, 0, 0))
    assert orbit_orthogonality_check(build_root_system("C", 2), (1, 1))
    assert not orbit_orthogonality_check(build_root_system("B", 3), (H, H, H))
    assert orbit_orthogonality_check(build_root_system("B", 3), (0, 0, 0))


@pytest.mark.parametrize("tr", SYSTEMS[1:])
def test_multiplicity_one_and_kumar(tr):
    rs = rs_of(tr)
    for k in (1, 2, 3):
        lam = rs.k_omega1(k)
        if k >= 2:
            target = (k - 1, 1) + (0,) * (rs.rank - 2)
            assert freudenthal_multiplicity(rs, lam, target) == 1
        assert kumar_containment(rs, lam).holds


def test_table_export():
    tab = multiplicity_table(build_root_system("C", 2), (2, 0))
    buf = io.StringIO()
    write_table(tab, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# C2")
    assert lines[1] == "2 0 1" and "0 0 2" in lines
