"""Exact moment sums over R_n(F_q).

Every chunk worker reduces its slice of ranked tuples to a histogram of trace
values; the histograms are merged by exact integer addition and power sums are
evaluated from the merged histogram with Python integers.  Results therefore do
not depend on the number of chunks, the number of threads or their scheduling.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from . import __version__, kernels
from .curvesum import BranchTuple
from .ffield import FieldSpec, Poly, char_table, field_make

__all__ = [
    "BudgetError", "ChunkSpec", "MomentReport", "SetPartition", "FibreSandwich",
    "DEFAULT_BUDGET", "double_factorial_F", "set_partitions", "pair_partitions",
    "mobius", "rn_size", "enumerate_Rn", "trace_histogram", "power_sum",
    "power_sum_from_histogram", "chunk_record", "merge_chunk_records",
    "partition_sum", "inclusion_exclusion_sum", "power_sum_by_partitions",
    "fibre_power_moment",
]

#: default cap on tuple-field operations (|R_n| * q * n) for exhaustive sums
DEFAULT_BUDGET = 10 ** 10


class BudgetError(RuntimeError):
    pass


def double_factorial_F(m: int) -> int:
    """(m-1)!! for even m, 0 for odd m."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m % 2:
        return 0
    out = 1
    for j in range(m - 1, 0, -2):
        out *= j
    return out


@dataclass(frozen=True)
class SetPartition:
    """A partition of {1, ..., n} into disjoint nonempty blocks."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        elems = [x for b in self.blocks for x in b]
        if any(not b for b in self.blocks):
            raise ValueError("empty block")
        if sorted(elems) != list(range(1, len(elems) + 1)):
            raise ValueError(f"blocks {self.blocks} do not partition 1..{len(elems)}")

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self):
        return len(self.blocks)


def set_partitions(n: int) -> Iterator[SetPartition]:
    """All set partitions of {1..n} (restricted growth strings order)."""
    if n == 0:
        yield SetPartition(())
        return

    def rec(i, labels, nblocks):
        if i == n:
            blocks = [[] for _ in range(nblocks)]
            for elem, lab in enumerate(labels, start=1):
                blocks[lab].append(elem)
            yield SetPartition(tuple(tuple(b) for b in blocks))
            return
        for lab in range(nblocks + 1):
            labels.append(lab)
            yield from rec(i + 1, labels, max(nblocks, lab + 1))
            labels.pop()

    yield from rec(0, [], 0)


def pair_partitions(m: int) -> list[SetPartition]:
    """All perfect matchings of {1..m}."""
    if m % 2:
        raise ValueError("perfect matchings need an even m")
    if m > 12:
        raise BudgetError("pair_partitions is capped at m <= 12")

    def rec(rest):
        if not rest:
            yield ()
            return
        first = rest[0]
        for j in range(1, len(rest)):
            for tail in rec(rest[1:j] + rest[j + 1:]):
                yield ((first, rest[j]),) + tail

    return [SetPartition(b) for b in rec(tuple(range(1, m + 1)))]


def mobius(pi: SetPartition) -> int:
    """Mobius function mu(0, pi) on the partition lattice."""
    out = 1
    for b in pi.blocks:
        out *= (-1) ** (len(b) - 1) * math.factorial(len(b) - 1)
    return out


def rn_size(q: int, n: int) -> int:
    """|R_n(F_q)| = q (q-1) ... (q-n+1)."""
    if n > q:
        return 0
    return math.perm(q, n)


@dataclass(frozen=True)
class ChunkSpec:
    """Contiguous slice ``chunk_id`` of ``chunk_count`` over ranks [0, total)."""

    total: int
    chunk_id: int = 0
    chunk_count: int = 1

    def __post_init__(self):
        if self.chunk_count < 1 or not 0 <= self.chunk_id < self.chunk_count:
            raise ValueError(f"invalid chunk {self.chunk_id} of {self.chunk_count}")

    @property
    def start(self) -> int:
        return self.total * self.chunk_id // self.chunk_count

    @property
    def stop(self) -> int:
        return self.total * (self.chunk_id + 1) // self.chunk_count

    def __len__(self):
        return self.stop - self.start

    @classmethod
    def split(cls, total: int, count: int) -> list["ChunkSpec"]:
        return [cls(total, i, count) for i in range(count)]


def enumerate_Rn(s: FieldSpec, n: int, chunk: ChunkSpec | None = None,
                 batch: int = 4096) -> Iterator[BranchTuple]:
    """Yield R_n(F_q) in lexicographic order (or the given contiguous slice)."""
    if n < 3:
        raise ValueError("n must be >= 3")
    total = rn_size(s.q, n)
    if chunk is None:
        chunk = ChunkSpec(total)
    elif chunk.total != total:
        raise ValueError("chunk was built for a different range")
    for lo in range(chunk.start, chunk.stop, batch):
        hi = min(lo + batch, chunk.stop)
        for row in kernels.unrank(np.arange(lo, hi, dtype=np.int64), s.q, n):
            yield BranchTuple(s, tuple(int(x) for x in row))


def _check_budget(s: FieldSpec, n: int, budget: int | None) -> None:
    cost = rn_size(s.q, n) * s.q * n
    if budget is not None and cost > budget:
        raise BudgetError(f"|R_{n}(F_{s.q})| * q * n = {cost} exceeds budget {budget}")


def _chunk_counts(s: FieldSpec, n: int, chunk: ChunkSpec) -> Counter:
    shift, mul, chi = kernels.field_tables(s)
    raw = kernels.trace_counts(chunk.start, len(chunk), n, shift, mul, chi)
    return Counter({int(t) - s.q: int(c) for t, c in enumerate(raw) if c})


def trace_histogram(s: FieldSpec, n: int, chunks: int = 1, threads: int = 1,
                    budget: int | None = DEFAULT_BUDGET) -> Counter:
    """Counter mapping each trace value T to the number of a in R_n(F_q) with T_a = T."""
    _check_budget(s, n, budget)
    specs = ChunkSpec.split(rn_size(s.q, n), chunks)
    kernels.field_tables(s)  # build shared tables before fanning out
    if threads <= 1:
        parts = [_chunk_counts(s, n, c) for c in specs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _chunk_counts(s, n, c), specs))
    total = Counter()
    for part in parts:
        total.update(part)
    return total


def power_sum_from_histogram(hist, m: int) -> int:
    """sum over a of (-T_a)^m, exactly."""
    return sum(c * (-t) ** m for t, c in hist.items())


@dataclass(frozen=True)
class MomentReport:
    q: int
    n: int
    m: int
    sum: int
    tuples: int

    @property
    def predicted(self) -> int:
        """F(m) q^{n + m/2}; zero for odd m."""
        if self.m % 2:
            return 0
        return double_factorial_F(self.m) * self.q ** (self.n + self.m // 2)

    @property
    def scale(self) -> float:
        return float(self.q) ** (self.n + self.m / 2)

    @property
    def ratio(self) -> Fraction | float:
        if self.m % 2 == 0:
            return Fraction(self.sum, self.q ** (self.n + self.m // 2))
        return self.sum / self.scale

    @property
    def deviation(self) -> float:
        return abs(float(self.ratio) - double_factorial_F(self.m))

    @property
    def in_proposition_range(self) -> bool:
        """The leading-term estimate is only claimed for m < n."""
        return self.m < self.n

    @property
    def genus(self) -> int:
        return (self.n - 1) // 2

    def riemann_envelope(self) -> float:
        """(2g sqrt q)^m * |R_n|, the per-tuple Riemann bound summed."""
        return (2 * self.genus * math.sqrt(self.q)) ** self.m * self.tuples

    def as_dict(self) -> dict:
        return {
            "q": self.q, "n": self.n, "m": self.m,
            "sum": str(self.sum), "sum_float": float(self.sum),
            "predicted": str(self.predicted), "predicted_float": float(self.predicted),
            "ratio": float(self.ratio), "deviation": self.deviation,
            "tuples": self.tuples,
            "in_proposition_range": self.in_proposition_range,
        }


def power_sum(s: FieldSpec, n: int, m: int, chunks: int = 1, threads: int = 1,
              budget: int | None = DEFAULT_BUDGET) -> MomentReport:
    hist = trace_histogram(s, n, chunks=chunks, threads=threads, budget=budget)
    return MomentReport(s.q, n, m, power_sum_from_histogram(hist, m), rn_size(s.q, n))


# -- out-of-process chunks ---------------------------------------------------

def _field_key(s: FieldSpec) -> dict:
    return {"p": s.p, "k": s.k, "modulus": list(s.modulus) if s.modulus else None}


def chunk_record(s: FieldSpec, n: int, m: int, chunk_id: int, chunk_count: int,
                 budget: int | None = DEFAULT_BUDGET) -> dict:
    """Partial power sum of one chunk, as a JSON-serializable record."""
    _check_budget(s, n, budget)
    spec = ChunkSpec(rn_size(s.q, n), chunk_id, chunk_count)
    hist = _chunk_counts(s, n, spec)
    partial = power_sum_from_histogram(hist, m)
    g = (n - 1) // 2
    envelope = (2 * g * math.sqrt(s.q)) ** m * len(spec)
    return {
        "version": __version__, **_field_key(s), "n": n, "m": m,
        "chunk_id": chunk_id, "chunk_count": chunk_count,
        "start": spec.start, "stop": spec.stop,
        "partial_sum": str(partial),
        "within_riemann_envelope": abs(partial) <= envelope,
    }


def write_records(records: Iterable[dict], path) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_records(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def merge_chunk_records(records: list[dict]) -> MomentReport:
    """Combine chunk records of one logical run into the full power sum."""
    if not records:
        raise ValueError("no chunk records")
    key_fields = ("version", "p", "k", "modulus", "n", "m", "chunk_count")
    key = {f: records[0][f] for f in key_fields}
    for rec in records:
        bad = [f for f in key_fields if rec[f] != key[f]]
        if bad:
            raise ValueError(f"chunk {rec['chunk_id']} does not match run on {bad}")
    ids = [rec["chunk_id"] for rec in records]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        raise ValueError(f"duplicate chunk ids {dup}")
    missing = sorted(set(range(key["chunk_count"])) - set(ids))
    if missing:
        raise ValueError(f"missing chunk ids {missing}")
    s = field_make(key["p"], key["k"], tuple(key["modulus"]) if key["modulus"] else None)
    total = rn_size(s.q, key["n"])
    for rec in records:
        spec = ChunkSpec(total, rec["chunk_id"], key["chunk_count"])
        if (rec["start"], rec["stop"]) != (spec.start, spec.stop):
            raise ValueError(f"chunk {rec['chunk_id']} covers the wrong range")
    partial = sum(int(rec["partial_sum"]) for rec in records)
    return MomentReport(s.q, key["n"], key["m"], partial, total)


# -- partition-lattice oracle -------------------------------------------------

def partition_sum(s: FieldSpec, pi: SetPartition, P: Poly) -> int:
    """S_pi = sum over the diagonal V_pi(F_q) of chi(P(a_1) ... P(a_n)).

    Each block carries one free variable, so the sum factors into
    prod over blocks b of sum_x chi(P(x))^|b|.
    """
    v = char_table(s)[P.values()].astype(np.int64)
    return _partition_sum_from_values(v, pi)


def _power_sums(v: np.ndarray) -> tuple[int, int]:
    # chi values lie in {-1, 0, 1}: odd powers sum to sum(v), even powers to #nonzero
    return int(v.sum()), int(np.count_nonzero(v))


def _partition_sum_from_values(v: np.ndarray, pi: SetPartition) -> int:
    odd, even = _power_sums(v)
    out = 1
    for b in pi.blocks:
        out *= odd if len(b) % 2 else even
    return out


def _ie_from_values(v: np.ndarray, parts: list[tuple[int, SetPartition]]) -> int:
    odd, even = _power_sums(v)
    total = 0
    for mu, pi in parts:
        term = mu
        for b in pi.blocks:
            term *= odd if len(b) % 2 else even
        total += term
    return total


def _weighted_partitions(n: int) -> list[tuple[int, SetPartition]]:
    if n > 8:
        raise BudgetError("inclusion-exclusion is capped at n <= 8")
    return [(mobius(pi), pi) for pi in set_partitions(n)]


def inclusion_exclusion_sum(s: FieldSpec, n: int, P: Poly) -> int:
    """sum over a in R_n(F_q) of chi(P(a_1)...P(a_n)) via Mobius inversion."""
    v = char_table(s)[P.values()].astype(np.int64)
    return _ie_from_values(v, _weighted_partitions(n))


def power_sum_by_partitions(s: FieldSpec, n: int, m: int) -> int:
    """sum over R_n of (-T_a)^m, expanded over (x_1..x_m) and inclusion-exclusion.

    Uses (-T_a)^m = sum_x chi((-1)^{mn}) chi(prod_i P_x(a_i)) with
    P_x(y) = prod_j (y - x_j).  Independent of the trace kernels.
    """
    chi = char_table(s).astype(np.int64)
    shift = kernels.field_tables(s)[0]  # shift[x, y] = y - x
    parts = _weighted_partitions(n)
    sign = int(chi[s.from_int(-1)]) ** ((m * n) % 2)
    total = 0
    # only the multiset {x_j} matters; weight each by its number of orderings
    for xs in _multisets(s.q, m):
        v = np.ones(s.q, dtype=np.int64)
        for x in xs:
            v *= chi[shift[x]]
        total += _multinomial(xs) * _ie_from_values(v, parts)
    return sign * total


def _multisets(q: int, m: int) -> Iterator[tuple[int, ...]]:
    from itertools import combinations_with_replacement
    return combinations_with_replacement(range(q), m)


def _multinomial(xs: tuple[int, ...]) -> int:
    out = math.factorial(len(xs))
    for c in Counter(xs).values():
        out //= math.factorial(c)
    return out


# -- fibre powers -------------------------------------------------------------

@dataclass(frozen=True)
class FibreSandwich:
    lower: Decimal
    middle: int
    upper: Decimal
    base_sum: int

    @property
    def holds(self) -> bool:
        return self.lower <= self.middle <= self.upper


def _falling(x: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= x - i
    return out


def fibre_power_moment(s: FieldSpec, n_branch: int, n_pts: int, k: int,
                       hist: Counter | None = None,
                       budget: int | None = DEFAULT_BUDGET) -> FibreSandwich:
    """Sum of T_a^{2k} over Y_{2g+2,n}(F_q) sandwiched by the Riemann bound.

    The middle term counts ordered n_pts-tuples of distinct points on the
    curve, N_a (N_a - 1) ... (N_a - n_pts + 1) with N_a = q + 1 - T_a.
    Bounds are evaluated in 50-digit decimal arithmetic.
    """
    g = (n_branch - 1) // 2
    q = s.q
    if q + 1 - 2 * g * math.sqrt(q) - n_pts <= 0:
        raise ValueError("need q + 1 - 2g sqrt(q) - n_pts > 0")
    if hist is None:
        hist = trace_histogram(s, n_branch, budget=budget)
    base = sum(c * t ** (2 * k) for t, c in hist.items())
    middle = sum(c * t ** (2 * k) * _falling(q + 1 - t, n_pts) for t, c in hist.items())
    with localcontext() as ctx:
        ctx.prec = 50
        root = Decimal(q).sqrt()
        lower = (Decimal(q + 1 - n_pts) - 2 * g * root) ** n_pts * base
        upper = (Decimal(q + 1 - n_pts) + 2 * g * root) ** n_pts * base
    return FibreSandwich(lower, middle, upper, base)
