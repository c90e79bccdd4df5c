import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from satotate.ffield import field_make
from satotate.haar import GroupSpec
from satotate.moments import double_factorial_F, power_sum, rn_size
from satotate.measures import (EmpiricalMeasure, convergence_report, gaussian_moment,
                               ks_distance, monodromy_match_report, read_values,
                               sample_branch_tuples, sato_tate_pushforward, traces_measure,
                               write_histogram, write_values)


def test_gaussian_moment():
    assert [gaussian_moment(m) for m in (2, 4, 5)] == [1, 3, 0]
    assert all(gaussian_moment(m) == double_factorial_F(m) for m in range(13))


def test_ks_examples():
    pm = EmpiricalMeasure.point_mass(0.0)
    assert ks_distance(pm) == pytest.approx(0.5)
    assert ks_distance(pm, pm) == 0
    assert ks_distance(pm, EmpiricalMeasure.point_mass(1.0)) == 1


def test_ks_matches_scipy():
    x = np.random.default_rng(0).normal(size=500) * 1.1
    mu = EmpiricalMeasure.from_values(x)
    assert ks_distance(mu) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)
    y = np.random.default_rng(1).normal(size=300)
    assert ks_distance(mu, EmpiricalMeasure.from_values(y)) == \
        pytest.approx(stats.ks_2samp(x, y).statistic, abs=1e-12)


samples = st.lists(st.integers(-5, 5), min_size=1, max_size=20).map(
    lambda v: EmpiricalMeasure.from_values(np.array(v, dtype=float)))


@settings(max_examples=100, deadline=None)
@given(samples, samples, samples)
def test_ks_is_a_metric(a, b, c):
    assert ks_distance(a, b) == ks_distance(b, a)
    assert ks_distance(a, c) <= ks_distance(a, b) + ks_distance(b, c) + 1e-12
    assert 0 <= ks_distance(a, b) <= 1


def test_exhaustive_traces_q5():
    s = field_make(5)
    mu = traces_measure(s, 3)
    assert mu.total_mass == pytest.approx(1.0)
    T = np.rint(mu.values * math.sqrt(5)).astype(int)
    counts = np.rint(mu.weights * 60).astype(int)
    assert counts.sum() == 60 and int(np.dot(T, counts)) == 0
    assert mu.moment(2) == pytest.approx(power_sum(s, 3, 2).sum / (60 * 5))


@pytest.mark.parametrize("p,n", [(5, 3), (7, 4), (11, 3), (11, 4), (13, 4)])
def test_moments_match_power_sums(p, n):
    s = field_make(p)
    mu = traces_measure(s, n)
    T = np.rint(mu.values * math.sqrt(p)).astype(np.int64)
    counts = np.rint(mu.weights * rn_size(p, n)).astype(np.int64)
    for m in range(1, n):
        # the measure uses T; the power sum is taken over -T
        exact = sum(int(c) * int(t) ** m for t, c in zip(T, counts))
        assert exact == (-1) ** m * power_sum(s, n, m).sum


def test_sampled_mode_deterministic_and_uniform():
    s = field_make(31)
    a = traces_measure(s, 4, "sampled", N=3000, seed=5)
    b = traces_measure(s, 4, "sampled", N=3000, seed=5)
    assert np.array_equal(a.values, b.values)
    tup = sample_branch_tuples(7, 3, 21000, seed=1)
    assert all(len(set(r)) == 3 for r in tup)
    # each of the 210 tuples should appear about 100 times
    _, counts = np.unique(tup[:, 0] * 49 + tup[:, 1] * 7 + tup[:, 2], return_counts=True)
    assert len(counts) == 210
    assert stats.chisquare(counts).pvalue > 1e-4


def test_pushforward_supports_and_moments():
    su2 = sato_tate_pushforward(GroupSpec("SU2"), 20000, seed=0)
    lo, hi = su2.support()
    assert -2 <= lo and hi <= 2
    se = su2.moment_stderr(4)
    assert abs(su2.moment(4) - 2) <= 5 * se
    for g in (2, 3):
        mu = sato_tate_pushforward(GroupSpec("Sp", g), 20000, seed=1)
        lo, hi = mu.support()
        assert -2 * g <= lo and hi <= 2 * g
        assert abs(mu.moment(2) - 1) <= 5 * mu.moment_stderr(2)


def test_quadrature_pushforward():
    mu = sato_tate_pushforward(GroupSpec("SU2"), method="quadrature")
    assert mu.moment(2) == pytest.approx(1, abs=1e-9)
    assert mu.moment(4) == pytest.approx(2, abs=1e-9)
    nz = sato_tate_pushforward(GroupSpec("TorusNormalizerInSU2"), method="quadrature")
    assert nz.moment(4) == pytest.approx(3, abs=1e-9)
    with pytest.raises(ValueError):
        sato_tate_pushforward(GroupSpec("Sp", 2), method="quadrature")


def test_convergence_report_constant_sequence():
    x = stats.norm.ppf((np.arange(2000) + 0.5) / 2000)
    mus = [EmpiricalMeasure.from_values(x) for _ in range(3)]
    rep = convergence_report(mus)
    assert max(rep.distances) < 1e-3 and rep.non_increasing
    with pytest.raises(ValueError):
        convergence_report(mus[:1])


def test_convergence_sp_sequence():
    mus = [sato_tate_pushforward(GroupSpec("Sp", g), 20000, seed=3) for g in (1, 2, 5)]
    rep = convergence_report(mus, keys=[1, 2, 5])
    assert rep.non_increasing
    fourth = [row[4] for row in rep.moments]
    assert abs(fourth[0] - 2) < 0.1 and abs(fourth[1] - 3) < 0.2


def test_monodromy_tiny_field_reports_without_failure():
    rep = monodromy_match_report(field_make(5), 3, N=2000, seed=0)
    assert not rep.asserted and rep.passed
    assert rep.ks > 0.05


def test_serialization_roundtrip(tmp_path):
    mu = traces_measure(field_make(7), 3)
    write_values(mu, tmp_path / "v.txt")
    back = read_values(tmp_path / "v.txt")
    assert np.allclose(back.values, mu.values) and np.allclose(back.weights, mu.weights)
    write_histogram(mu, tmp_path / "h.txt", bins=10)
    h = np.loadtxt(tmp_path / "h.txt")
    assert h.shape == (10, 2) and h[:, 1].sum() == pytest.approx(1.0)
