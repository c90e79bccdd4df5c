"""Classical root systems, weight multiplicities and tensor-square decompositions.

Coordinates follow the usual ambient Euclidean realizations: B_n, C_n, D_n in
R^n with roots built from e_i +- e_j (plus e_i or 2e_i), and A_1 in R^2 with the
single positive root e_1 - e_2.  Inner products are the plain Euclidean ones,
so norms are not Killing-normalized.  Weights are tuples of Fractions.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "RootSystemData", "MultiplicityTable", "KumarReport", "build_root_system",
    "weight", "weyl_orbit", "dominant_rep", "is_dominant", "in_weight_lattice",
    "multiplicity_table", "freudenthal_multiplicity", "weyl_dimension",
    "tensor_square_decompose", "length_set", "product_length_set",
    "orbit_orthogonality_check", "a4_algebraic", "kumar_containment",
    "orbit_negation_stable", "write_table",
]

MAX_RANK = 6
TENSOR_DIM_CAP = 10 ** 4

Weight = tuple  # tuple[Fraction, ...]


def weight(coords: Iterable) -> Weight:
    """Coerce ints, floats with exact binary value, or strings like "1/2" to a weight."""
    return tuple(Fraction(c) for c in coords)


def _dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _add(u, v, c=1) -> Weight:
    return tuple(a + c * b for a, b in zip(u, v))


def _unit(n, i, c=1):
    return tuple(Fraction(c) if j == i else Fraction(0) for j in range(n))


@dataclass(frozen=True)
class RootSystemData:
    type: str
    rank: int
    dim: int  # ambient dimension
    simple_roots: tuple
    positive_roots: tuple
    fundamental_weights: tuple
    rho: Weight
    _gram_inv: tuple = field(repr=False, compare=False, default=())

    @property
    def name(self) -> str:
        return f"{self.type}{self.rank}"

    def omega(self, i: int) -> Weight:
        """Fundamental weight omega_i, 1-based."""
        return self.fundamental_weights[i - 1]

    def k_omega1(self, k: int) -> Weight:
        return tuple(k * c for c in self.omega(1))

    def coroot_pairing(self, lam, alpha) -> Fraction:
        return 2 * _dot(lam, alpha) / _dot(alpha, alpha)

    def simple_coords(self, v) -> list[Fraction] | None:
        """Coefficients of v in the simple-root basis, or None off the root span."""
        b = [_dot(v, a) for a in self.simple_roots]
        c = [sum((gi * bj for gi, bj in zip(row, b)), Fraction(0)) for row in self._gram_inv]
        back = tuple(Fraction(0) for _ in range(self.dim))
        for ci, a in zip(c, self.simple_roots):
            back = _add(back, a, ci)
        return c if back == tuple(v) else None

    def precedes(self, mu, lam) -> bool:
        """mu <= lam in the dominance order: lam - mu is a nonnegative integer root combination."""
        c = self.simple_coords(_add(lam, mu, -1))
        return c is not None and all(x.denominator == 1 and x >= 0 for x in c)

    def height(self, v) -> Fraction:
        return _dot(v, self.rho)


def _invert(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def build_root_system(type_: str, rank: int) -> RootSystemData:
    """A_1, B_n (n >= 2), C_n (n >= 2) or D_n (n >= 3), with rank <= 6."""
    t = type_.upper()
    half = Fraction(1, 2)
    if t == "A":
        if rank != 1:
            raise ValueError("only A1 is supported in type A")
        alpha = (Fraction(1), Fraction(-1))
        simple, pos = (alpha,), (alpha,)
        fund = ((half, -half),)
        n = 2
    else:
        lo = {"B": 2, "C": 2, "D": 3}.get(t)
        if lo is None:
            raise ValueError(f"unsupported root system type {type_!r}")
        if not lo <= rank <= MAX_RANK:
            raise ValueError(f"{t}{rank}: rank must lie in [{lo}, {MAX_RANK}]")
        n = rank
        e = [_unit(n, i) for i in range(n)]
        pos = []
        for i, j in itertools.combinations(range(n), 2):
            pos += [_add(e[i], e[j], -1), _add(e[i], e[j])]
        if t == "B":
            pos += e
        elif t == "C":
            pos += [_unit(n, i, 2) for i in range(n)]
        simple = [_add(e[i], e[i + 1], -1) for i in range(n - 1)]
        simple.append({"B": e[n - 1], "C": _unit(n, n - 1, 2),
                       "D": _add(e[n - 2], e[n - 1])}[t])
        partial = [tuple(Fraction(int(j <= i)) for j in range(n)) for i in range(n)]
        fund = list(partial)
        if t == "B":
            fund[n - 1] = tuple(half for _ in range(n))
        elif t == "D":
            fund[n - 2] = tuple(half if j < n - 1 else -half for j in range(n))
            fund[n - 1] = tuple(half for _ in range(n))
        simple, pos, fund = tuple(simple), tuple(pos), tuple(fund)
    rho = tuple(sum((a[k] for a in pos), Fraction(0)) / 2 for k in range(n))
    gram = [[_dot(a, b) for b in simple] for a in simple]
    rs = RootSystemData(t, rank, n, simple, pos, fund, rho, tuple(map(tuple, _invert(gram))))
    _validate(rs)
    return rs


def _validate(rs: RootSystemData) -> None:
    expect = {"A": 1, "B": rs.rank ** 2, "C": rs.rank ** 2, "D": rs.rank * (rs.rank - 1)}[rs.type]
    if len(rs.positive_roots) != expect:
        raise AssertionError(f"{rs.name}: {len(rs.positive_roots)} positive roots")
    for i, a in enumerate(rs.simple_roots):
        if rs.coroot_pairing(rs.rho, a) != 1:
            raise AssertionError(f"{rs.name}: <rho, alpha_{i + 1}^vee> != 1")
        for j, w in enumerate(rs.fundamental_weights):
            if rs.coroot_pairing(w, a) != (i == j):
                raise AssertionError(f"{rs.name}: fundamental weights not dual to coroots")


# -- Weyl group ----------------------------------------------------------------

def _reflect(v, a) -> Weight:
    return _add(v, a, -2 * _dot(v, a) / _dot(a, a))


def in_weight_lattice(rs: RootSystemData, lam) -> bool:
    lam = weight(lam)
    if len(lam) != rs.dim:
        return False
    if rs.type == "A" and sum(lam) != 0:
        return False
    return all(rs.coroot_pairing(lam, a).denominator == 1 for a in rs.simple_roots)


def is_dominant(rs: RootSystemData, lam) -> bool:
    return all(_dot(lam, a) >= 0 for a in rs.simple_roots)


def dominant_rep(rs: RootSystemData, lam) -> Weight:
    v = weight(lam)
    while True:
        for a in rs.simple_roots:
            if _dot(v, a) < 0:
                v = _reflect(v, a)
                break
        else:
            return v


def weyl_orbit(rs: RootSystemData, lam) -> set:
    """Full W-orbit, generated by simple reflections."""
    start = weight(lam)
    seen = {start}
    todo = [start]
    while todo:
        v = todo.pop()
        for a in rs.simple_roots:
            w = _reflect(v, a)
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def orbit_negation_stable(rs: RootSystemData, lam) -> bool:
    orb = weyl_orbit(rs, lam)
    return all(tuple(-c for c in v) in orb for v in orb)


# -- multiplicities ---------------------------------------------------------------

@dataclass
class MultiplicityTable:
    """Multiplicities of the dominant weights of the irreducible module V_omega."""

    rs: RootSystemData
    highest: Weight
    mults: dict  # dominant weight -> multiplicity
    orbit_sizes: dict

    @property
    def total(self) -> int:
        return sum(m * self.orbit_sizes[w] for w, m in self.mults.items())

    def get(self, lam) -> int:
        lam = weight(lam)
        if not in_weight_lattice(self.rs, lam):
            return 0
        return self.mults.get(dominant_rep(self.rs, lam), 0)

    def character(self) -> dict:
        """All weights with multiplicity."""
        out = {}
        for w, m in self.mults.items():
            for v in weyl_orbit(self.rs, w):
                out[v] = m
        return out

    def records(self) -> list[tuple[Weight, int]]:
        return sorted(self.mults.items(), key=lambda kv: -self.rs.height(kv[0]))


def _dominant_weights_below(rs: RootSystemData, omega: Weight) -> list:
    found = {omega}
    todo = [omega]
    while todo:
        mu = todo.pop()
        for a in rs.positive_roots:
            nu = _add(mu, a, -1)
            if nu not in found and is_dominant(rs, nu) and rs.precedes(nu, omega):
                found.add(nu)
                todo.append(nu)
    return sorted(found, key=lambda v: -rs.height(v))


_TABLES: dict = {}


def multiplicity_table(rs: RootSystemData, omega) -> MultiplicityTable:
    """Freudenthal recursion over the dominant weights, from the top down.

    m(lam) * (|omega+rho|^2 - |lam+rho|^2) = 2 sum_{a>0} sum_{i>=1} m(lam + i a) <lam + i a, a>
    """
    omega = weight(omega)
    if not (in_weight_lattice(rs, omega) and is_dominant(rs, omega)):
        raise ValueError(f"{omega} is not a dominant integral weight of {rs.name}")
    key = (rs.type, rs.rank, omega)
    if key in _TABLES:
        return _TABLES[key]
    dom = _dominant_weights_below(rs, omega)
    top = _add(omega, rs.rho)
    top_norm = _dot(top, top)
    omega_norm = _dot(omega, omega)
    mults = {omega: 1}
    for lam in dom[1:]:
        acc = Fraction(0)
        for a in rs.positive_roots:
            mu = _add(lam, a)
            while _dot(mu, mu) <= omega_norm:
                m = mults.get(dominant_rep(rs, mu), 0)
                if m:
                    acc += m * _dot(mu, a)
                mu = _add(mu, a)
        lr = _add(lam, rs.rho)
        val = 2 * acc / (top_norm - _dot(lr, lr))
        if val.denominator != 1 or val < 0:
            raise ArithmeticError(f"non-integral multiplicity {val} at {lam}")
        if val:
            mults[lam] = int(val)
    table = MultiplicityTable(rs, omega, mults, {w: len(weyl_orbit(rs, w)) for w in mults})
    _TABLES[key] = table
    return table


def freudenthal_multiplicity(rs: RootSystemData, omega, lam) -> int:
    """Multiplicity of lam in V_omega (0 off the weight lattice or outside the module)."""
    return multiplicity_table(rs, omega).get(lam)


def weyl_dimension(rs: RootSystemData, omega) -> int:
    omega = weight(omega)
    shifted = _add(omega, rs.rho)
    d = Fraction(1)
    for a in rs.positive_roots:
        d *= _dot(shifted, a) / _dot(rs.rho, a)
    if d.denominator != 1:
        raise ArithmeticError(f"Weyl dimension {d} is not an integer")
    return int(d)


# -- tensor squares and length sets -----------------------------------------------------

def _as_int_array(weights, scale=2):
    return np.array([[int(c * scale) for c in w] for w in weights], dtype=np.int64)


def tensor_square_decompose(rs: RootSystemData, lam) -> Counter:
    """Highest weights (with multiplicities) of V_lam (x) V_lam.

    The dominant part of the product character is computed, then the highest
    remaining weight is repeatedly stripped off with its full multiplicity table.
    """
    lam = weight(lam)
    d = weyl_dimension(rs, lam)
    if d > TENSOR_DIM_CAP:
        raise ValueError(f"dim V = {d} exceeds the cap {TENSOR_DIM_CAP}")
    char = multiplicity_table(rs, lam).character()
    ws = list(char)
    arr = _as_int_array(ws)
    mult = np.array([char[w] for w in ws], dtype=np.int64)
    simple = _as_int_array(rs.simple_roots, scale=1)
    remaining = Counter()
    for i in range(len(ws)):
        s = arr[i] + arr
        dom = np.all(s @ simple.T >= 0, axis=1)
        for row, m in zip(s[dom], mult[dom]):
            remaining[tuple(Fraction(int(c), 2) for c in row)] += int(m) * int(mult[i])
    out = Counter()
    while remaining:
        top = max(remaining, key=rs.height)
        c = remaining[top]
        if c < 0:
            raise ArithmeticError("negative multiplicity while stripping constituents")
        out[top] = c
        for w, m in multiplicity_table(rs, top).mults.items():
            remaining[w] -= c * m
            if remaining[w] == 0:
                del remaining[w]
    if sum(m * weyl_dimension(rs, w) for w, m in out.items()) != d * d:
        raise ArithmeticError("tensor-square dimensions do not add up")
    return out


def a4_algebraic(rs: RootSystemData, lam) -> int:
    """Sum of squared multiplicities in the tensor square."""
    return sum(m * m for m in tensor_square_decompose(rs, lam).values())


def length_set(rs: RootSystemData, constituents) -> set:
    """Norms <mu, mu> of the constituent highest weights."""
    return {_dot(weight(mu), weight(mu)) for mu in constituents}


def product_length_set(S1: Iterable, S2: Iterable) -> set:
    """Sumset S1 + S2, the length set of an outer tensor product."""
    S1, S2 = set(S1), set(S2)
    out = {x + y for x in S1 for y in S2}
    if S1 and S2 and len(out) < len(S1) + len(S2) - 1:
        raise ArithmeticError("sumset smaller than |S1| + |S2| - 1")
    return out


def orbit_orthogonality_check(rs: RootSystemData, lam) -> bool:
    """True iff any two orbit elements are equal up to sign or orthogonal."""
    orb = list(weyl_orbit(rs, lam))
    for u, v in itertools.combinations(orb, 2):
        if _dot(u, v) != 0 and u != tuple(-c for c in v):
            return False
    return True


@dataclass(frozen=True)
class KumarReport:
    lam: Weight
    checked: int
    missing: tuple

    @property
    def holds(self) -> bool:
        return not self.missing


def kumar_containment(rs: RootSystemData, lam) -> KumarReport:
    """Every dominant representative of lam + w lam must occur in the tensor square."""
    lam = weight(lam)
    constituents = tensor_square_decompose(rs, lam)
    targets = {dominant_rep(rs, _add(lam, w_lam)) for w_lam in weyl_orbit(rs, lam)}
    missing = tuple(sorted(t for t in targets if t not in constituents))
    return KumarReport(lam, len(targets), missing)


def _fmt(w) -> str:
    return " ".join(str(c) for c in w)


def write_table(table: MultiplicityTable, fh) -> None:
    """Text records: weight coordinates then multiplicity, one dominant weight per line."""
    fh.write(f"# {table.rs.name} highest {_fmt(table.highest)} dim {table.total}\n")
    for w, m in table.records():
        fh.write(f"{_fmt(w)} {m}\n")
