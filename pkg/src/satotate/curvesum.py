"""Trace sums and point counts of y^2 = (x - a_1)...(x - a_n) over F_q, and
quadratic-character sums of general polynomials with the Weil bound."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .ffield import FieldSpec, Poly, char_table

__all__ = [
    "BranchTuple", "TraceValue", "WeilReport", "branch_tuple", "trace_sum",
    "point_count", "char_sum_poly", "squarefree_factorization",
    "squarefree_decompose", "is_const_times_square", "weil_bound_check",
    "WeilSweep", "monic_polys", "weil_sweep",
]


@dataclass(frozen=True)
class BranchTuple:
    """An ordered tuple of distinct field elements (a point of R_n(F_q))."""

    field: FieldSpec
    a: tuple[int, ...]

    def __post_init__(self):
        if len(self.a) < 1:
            raise ValueError("empty branch tuple")
        if len(set(self.a)) != len(self.a):
            raise ValueError(f"repeated entries in branch tuple {self.a}")
        if any(not 0 <= x < self.field.q for x in self.a):
            raise ValueError("branch tuple entry outside the field")

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def genus(self) -> int:
        return (self.n - 1) // 2

    def poly(self) -> Poly:
        return Poly.from_roots(self.field, self.a)


def branch_tuple(s: FieldSpec, a: Sequence[int], min_n: int = 3) -> BranchTuple:
    if len(a) < min_n:
        raise ValueError(f"need n >= {min_n} branch points, got {len(a)}")
    return BranchTuple(s, tuple(int(x) for x in a))


@dataclass(frozen=True)
class TraceValue:
    T: int
    q: int
    g: int

    @property
    def riemann_bound(self) -> float:
        return 2 * self.g * math.sqrt(self.q)

    @property
    def within_bound(self) -> bool:
        return abs(self.T) <= self.riemann_bound

    @property
    def normalized(self) -> float:
        return self.T / math.sqrt(self.q)


def _as_branch(s: FieldSpec, a) -> BranchTuple:
    if isinstance(a, BranchTuple):
        if a.field != s:
            raise ValueError("branch tuple belongs to another field")
        return a
    return branch_tuple(s, a)


def trace_sum(s: FieldSpec, a) -> TraceValue:
    """T_a = -sum_x chi((x - a_1)...(x - a_n))."""
    b = _as_branch(s, a)
    shift, mul, chi = kernels.field_tables(s)
    T = int(kernels.trace_values(np.array([b.a]), shift, mul, chi)[0])
    return TraceValue(T, s.q, b.genus)


def point_count(s: FieldSpec, a) -> int:
    """|X_a(F_q)| on the projective model with a single point at infinity.

    The value q - T + 1 is cross-checked against a direct count of affine
    solutions (x, y) plus the point at infinity; a mismatch raises.
    """
    b = _as_branch(s, a)
    T = trace_sum(s, b).T
    affine = int(s.square_counts[b.poly().values()].sum())
    direct = affine + 1
    if direct != s.q - T + 1:
        raise ArithmeticError(
            f"point count mismatch for {b.a}: direct {direct}, formula {s.q - T + 1}")
    return direct


def char_sum_poly(s: FieldSpec, P: Poly) -> int:
    """Exact value of sum over x in F_q of chi(P(x))."""
    if P.is_zero():
        raise ValueError("character sum of the zero polynomial")
    return int(char_table(s)[P.values()].sum())


def squarefree_factorization(P: Poly) -> list[tuple[Poly, int]]:
    """Monic pairwise-coprime squarefree factors f_i with P = lead * prod f_i^i.

    Works in characteristic p, where P' can vanish identically on p-th powers.
    """
    if P.is_zero():
        raise ValueError("zero polynomial")
    f = P.monic()
    return [(fac, e) for fac, e in _sff(f) if fac.deg > 0]


def _sff(f: Poly) -> list[tuple[Poly, int]]:
    p = f.field.p
    if f.deg <= 0:
        return []
    out = []
    d = f.derivative()
    if d.is_zero():
        return [(fac, e * p) for fac, e in _sff(f.pth_root())]
    c = f.gcd(d)
    w = f // c
    i = 1
    while not w.is_one():
        y = w.gcd(c)
        fac = w // y
        if fac.deg > 0:
            out.append((fac.monic(), i))
        w = y
        c = c // y
        i += 1
    if not c.is_one():
        out.extend((fac, e * p) for fac, e in _sff(c.monic().pth_root()))
    return out


def squarefree_decompose(s: FieldSpec, P: Poly) -> tuple[Poly, Poly]:
    """Split P = R * Q^2 with R squarefree (carrying the leading constant), Q monic."""
    R = Poly(s, [P.lead])
    Q = Poly(s, [1])
    for fac, e in squarefree_factorization(P):
        if e % 2:
            R = R * fac
        Q = Q * fac ** (e // 2)
    return R, Q


def is_const_times_square(s: FieldSpec, P: Poly):
    """Return (True, c, Q) when P = c Q^2 for a constant c, else (False, None, None)."""
    R, Q = squarefree_decompose(s, P)
    if R.deg == 0:
        return True, R.c[0], Q
    return False, None, None


@dataclass(frozen=True)
class WeilReport:
    value: int
    degree: int
    bound: float
    skipped: bool
    passed: bool

    @property
    def margin(self) -> float:
        return self.bound - abs(self.value)


def weil_bound_check(s: FieldSpec, P: Poly) -> WeilReport:
    """|sum chi(P)| <= (deg P - 1) sqrt(q), skipped for P of the form c Q^2."""
    value = char_sum_poly(s, P)
    bound = (P.deg - 1) * math.sqrt(s.q)
    if is_const_times_square(s, P)[0]:
        return WeilReport(value, P.deg, bound, skipped=True, passed=True)
    return WeilReport(value, P.deg, bound, skipped=False, passed=abs(value) <= bound)


def monic_polys(s: FieldSpec, degree: int):
    """All monic polynomials of the given degree, lower coefficients in lex order."""
    for low in itertools.product(range(s.q), repeat=degree):
        yield Poly(s, tuple(reversed(low)) + (1,))


@dataclass(frozen=True)
class WeilSweep:
    degree: int
    total: int
    skipped: int
    violations: tuple
    worst_margin: float

    @property
    def passed(self) -> bool:
        return not self.violations


def weil_sweep(s: FieldSpec, degree: int, limit: int = 10 ** 6) -> WeilSweep:
    """Weil-bound check over every monic polynomial of one degree."""
    if s.q ** degree > limit:
        raise ValueError(f"{s.q}^{degree} polynomials exceed the sweep limit {limit}")
    skipped, bad, worst = 0, [], math.inf
    total = 0
    for P in monic_polys(s, degree):
        total += 1
        rep = weil_bound_check(s, P)
        if rep.skipped:
            skipped += 1
            continue
        worst = min(worst, rep.margin)
        if not rep.passed:
            bad.append(P.c)
    return WeilSweep(degree, total, skipped, tuple(bad), worst)
