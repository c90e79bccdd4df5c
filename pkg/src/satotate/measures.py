"""Empirical trace measures, the Gaussian reference and Kolmogorov-Smirnov distances.

Curve traces are normalized to T/sqrt(q) when a measure is built, so curve,
Haar and Gaussian measures all live on the same scale.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from . import kernels
from .ffield import FieldSpec
from .haar import GroupSpec, _components, sample_traces, stable_moment
from .moments import DEFAULT_BUDGET, BudgetError, double_factorial_F, rn_size, trace_histogram

__all__ = [
    "EmpiricalMeasure", "ConvergenceReport", "MonodromyReport", "traces_measure",
    "sample_branch_tuples", "gaussian_moment", "ks_distance", "sato_tate_pushforward",
    "convergence_report", "monodromy_match_report", "write_values", "write_histogram",
    "read_values",
]

KS_COEF = 1.36  # 95% two-sided Kolmogorov quantile


@dataclass
class EmpiricalMeasure:
    """A finitely supported probability measure: sorted values with weights."""

    values: np.ndarray
    weights: np.ndarray
    tag: str = "synthetic"
    samples: int = 0  # number of draws behind the measure; 0 when exact

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if v.shape != w.shape or v.ndim != 1 or len(v) == 0:
            raise ValueError("values and weights must be equal-length non-empty vectors")
        if not np.all(np.isfinite(v)) or np.any(w < 0):
            raise ValueError("values must be finite and weights nonnegative")
        order = np.argsort(v, kind="stable")
        self.values, self.weights = v[order], w[order] / w.sum()

    @classmethod
    def from_values(cls, values, tag="synthetic") -> "EmpiricalMeasure":
        values = np.asarray(values, dtype=float)
        return cls(values, np.ones(len(values)), tag, len(values))

    @classmethod
    def point_mass(cls, x: float = 0.0) -> "EmpiricalMeasure":
        return cls(np.array([x]), np.array([1.0]), f"point({x})")

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def moment(self, m: int) -> float:
        return float(np.dot(self.weights, self.values ** m))

    def moment_stderr(self, m: int) -> float:
        """Standard error of the moment for a sampled measure (0 when exact)."""
        if not self.samples:
            return 0.0
        var = self.moment(2 * m) - self.moment(m) ** 2
        return math.sqrt(max(var, 0.0) / self.samples)

    def moments(self, top: int = 6) -> dict:
        return {m: self.moment(m) for m in range(1, top + 1)}

    def cdf(self, x) -> np.ndarray:
        cw = np.cumsum(self.weights)
        idx = np.searchsorted(self.values, x, side="right")
        return np.where(idx > 0, cw[np.maximum(idx - 1, 0)], 0.0)

    def support(self) -> tuple[float, float]:
        pos = self.values[self.weights > 0]
        return float(pos[0]), float(pos[-1])

    def histogram(self, bins=50, range_=None):
        mass, edges = np.histogram(self.values, bins=bins, range=range_, weights=self.weights)
        return edges, mass


def gaussian_moment(m: int) -> int:
    """m-th moment of the standard normal, F(m)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return double_factorial_F(m)


def ks_distance(mu: EmpiricalMeasure, ref="std_normal") -> float:
    """sup |F_mu - F_ref|, exact for step CDFs.

    Against a continuous CDF the sup is attained at a jump, on one side or the
    other; between two empirical measures it is attained on the merged support.
    """
    if isinstance(ref, str):
        if ref != "std_normal":
            raise ValueError(f"unknown reference {ref!r}")
        # collapse ties so each jump is handled once
        xs, start = np.unique(mu.values, return_index=True)
        mass = np.add.reduceat(mu.weights, start)
        after = np.cumsum(mass)
        before = after - mass
        F = ndtr(xs)
        return float(max(np.max(after - F), np.max(F - before), 0.0))
    pts = np.union1d(mu.values, ref.values)
    return float(np.max(np.abs(mu.cdf(pts) - ref.cdf(pts))))


# -- curve traces ------------------------------------------------------------------------

def sample_branch_tuples(q: int, n: int, N: int, seed: int = 0, batch: int = 1 << 15) -> np.ndarray:
    """N uniform points of R_n(F_q) by rejection on distinctness (deterministic in seed)."""
    if n > q:
        raise ValueError("n exceeds the field size")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    out, have = [], 0
    while have < N:
        draw = rng.integers(0, q, size=(batch, n), dtype=np.int32)
        srt = np.sort(draw, axis=1)
        ok = np.all(srt[:, 1:] != srt[:, :-1], axis=1)
        good = draw[ok][:N - have]
        out.append(good)
        have += len(good)
    return np.concatenate(out)


def traces_measure(s: FieldSpec, n: int, mode: str = "exhaustive", N: int = 10 ** 5,
                   seed: int = 0, threads: int = 1,
                   budget: int | None = DEFAULT_BUDGET) -> EmpiricalMeasure:
    """Distribution of T_a / sqrt(q) over a in R_n(F_q).

    ``exhaustive`` weights each trace value by its exact count; ``sampled``
    draws N uniform tuples.  Note sum_a T_a^m = (-1)^m times the moment engine's
    power sum, which is taken over (-T_a)^m.
    """
    root = math.sqrt(s.q)
    if mode == "exhaustive":
        hist = trace_histogram(s, n, threads=threads, budget=budget)
        ts = np.array(sorted(hist), dtype=float)
        counts = np.array([hist[int(t)] for t in ts], dtype=float)
        return EmpiricalMeasure(ts / root, counts, f"curve-traces({s.q},{n})")
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if budget is not None and N * s.q * n > budget:
        raise BudgetError(f"N * q * n = {N * s.q * n} exceeds budget {budget}")
    tuples = sample_branch_tuples(s.q, n, N, seed)
    shift, mul, chi = kernels.field_tables(s)
    blocks = [tuples[i:i + 8192] for i in range(0, N, 8192)]
    if threads <= 1:
        parts = [kernels.trace_values(b, shift, mul, chi) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: kernels.trace_values(b, shift, mul, chi), blocks))
    T = np.concatenate(parts).astype(float)
    return EmpiricalMeasure.from_values(T / root, f"curve-traces({s.q},{n},N={N},seed={seed})")


# -- Haar pushforwards ---------------------------------------------------------------------

def sato_tate_pushforward(spec: GroupSpec, N: int = 10 ** 5, seed: int = 0, threads: int = 1,
                          method: str = "monte_carlo", nodes: int = 4096) -> EmpiricalMeasure:
    """Trace distribution of Haar measure (real part for the torus).

    ``quadrature`` discretizes the Weyl density on a uniform grid of ``nodes``
    torus points and is available when every component has rank <= 1.
    """
    if method == "monte_carlo":
        t = sample_traces(spec, N, seed, threads).real
        return EmpiricalMeasure.from_values(t, f"haar({spec.name},{N},seed={seed})")
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    vals, wts = [], []
    for weight, r, density, trace in _components(spec):
        if r > 1:
            raise ValueError(f"quadrature pushforward needs rank <= 1, {spec.name} has {r}")
        if r == 0:
            vals.append(np.array([float(np.real(trace(None)))]))
            wts.append(np.array([weight]))
            continue
        th = (np.arange(nodes) * (2 * np.pi / nodes))[None, :]
        vals.append(np.real(trace(th)).ravel())
        wts.append(weight * density(th).ravel() / nodes)
    return EmpiricalMeasure(np.concatenate(vals), np.clip(np.concatenate(wts), 0, None),
                            f"haar({spec.name},quadrature,{nodes})")


# -- reports ---------------------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    keys: list
    distances: list[float]
    moments: list[dict]
    tolerances: list[float]
    threshold: float | None = None

    @property
    def non_increasing(self) -> bool:
        return all(b <= a + tol for a, b, tol in
                   zip(self.distances, self.distances[1:], self.tolerances[1:]))

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.distances, self.distances[1:]))

    @property
    def below_threshold(self) -> bool:
        return self.threshold is None or self.distances[-1] <= self.threshold

    @property
    def passed(self) -> bool:
        return self.non_increasing and self.below_threshold

    def as_dict(self) -> dict:
        return {
            "keys": list(self.keys), "ks": self.distances, "tolerance": self.tolerances,
            "moments": [{str(k): v for k, v in row.items()} for row in self.moments],
            "threshold": self.threshold, "non_increasing": self.non_increasing,
            "strictly_decreasing": self.strictly_decreasing, "passed": self.passed,
        }


def _ks_tolerance(mu: EmpiricalMeasure) -> float:
    return KS_COEF / math.sqrt(mu.samples) if mu.samples else 0.0


def convergence_report(measures: Sequence[EmpiricalMeasure], ref="std_normal",
                       keys: Sequence | None = None, threshold: float | None = None,
                       top_moment: int = 6) -> ConvergenceReport:
    """KS distance of each measure to ``ref`` plus its moment table.

    The sequence counts as non-increasing when each distance exceeds its
    predecessor by no more than the 95% Kolmogorov band 1.36/sqrt(N) of the
    later measure (zero for exact measures).
    """
    if len(measures) < 2:
        raise ValueError("need at least two measures")
    keys = list(keys) if keys is not None else list(range(len(measures)))
    return ConvergenceReport(
        keys, [ks_distance(mu, ref) for mu in measures],
        [mu.moments(top_moment) for mu in measures],
        [_ks_tolerance(mu) for mu in measures], threshold)


@dataclass
class MonodromyReport:
    q: int
    n: int
    genus: int
    samples: int
    ks: float
    baseline: float
    factor: float
    moment_rows: list = field(default_factory=list)
    asserted: bool = True
    lattice_step: int = 1
    max_atom: float = 0.0
    lattice_ks: float = float("nan")

    @property
    def ks_ok(self) -> bool:
        return self.ks <= self.factor * self.baseline

    @property
    def moments_ok(self) -> bool:
        return all(row["ok"] for row in self.moment_rows)

    @property
    def passed(self) -> bool:
        return (not self.asserted) or (self.ks_ok and self.moments_ok)

    def as_dict(self) -> dict:
        return {
            "q": self.q, "n": self.n, "genus": self.genus, "samples": self.samples,
            "ks": self.ks, "baseline": self.baseline, "threshold": self.factor * self.baseline,
            "ks_ok": self.ks_ok, "moments": self.moment_rows, "moments_ok": self.moments_ok,
            "asserted": self.asserted, "passed": self.passed,
            "lattice_step": self.lattice_step, "max_atom": self.max_atom,
            "lattice_floor": self.max_atom / 2, "lattice_ks": self.lattice_ks,
        }


def monodromy_match_report(s: FieldSpec, n: int, N: int = 10 ** 5, seed: int = 0,
                           threads: int = 1, factor: float = 3.0, min_q: int = 100,
                           budget: int | None = DEFAULT_BUDGET) -> MonodromyReport:
    """Compare sampled curve traces with the Sp(2g) trace pushforward, g = (n-1)//2.

    The KS threshold is ``factor`` times the distance between two independent
    Haar runs of the same size.  Moments m < n are compared with the stable
    values within 5 combined standard errors.  Fields with q < ``min_q`` are
    reported without assertions.
    """
    g = (n - 1) // 2
    if g < 1:
        raise ValueError("need n >= 3 for a positive genus")
    spec = GroupSpec("Sp", g)
    curve = traces_measure(s, n, "sampled", N, seed, threads, budget)
    haar_a = sato_tate_pushforward(spec, N, seed + 1, threads)
    haar_b = sato_tate_pushforward(spec, N, seed + 2, threads)
    rows = []
    for m in range(1, n):
        try:
            target = stable_moment("Sp", g, m)
        except ValueError:
            continue
        se = math.hypot(curve.moment_stderr(m), haar_a.moment_stderr(m))
        val = curve.moment(m)
        rows.append({"m": m, "curve": val, "stable": target, "se": se,
                     "ok": abs(val - target) <= 5 * se})
    step, atom, lks = _lattice_diagnostics(curve, haar_a, s.q)
    return MonodromyReport(s.q, n, g, N, ks_distance(curve, haar_a),
                           ks_distance(haar_a, haar_b), factor, rows, s.q >= min_q,
                           step, atom, lks)


def _lattice_diagnostics(curve: EmpiricalMeasure, haar: EmpiricalMeasure, q: int):
    """Informational: the curve traces sit on a residue class r + step*Z.

    Returns the step, the largest atom of T/sqrt(q) (a KS distance to any
    continuous law is at least half of it) and the KS distance after rounding
    the Haar traces to the same lattice.
    """
    root = math.sqrt(q)
    T = np.rint(curve.values * root).astype(np.int64)
    step = int(np.gcd.reduce(np.abs(T - T[0]))) or 1
    r = int(T[0] % step)
    _, counts = np.unique(T, return_counts=True)
    x = haar.values * root
    snapped = np.rint((x - r) / step) * step + r
    lks = ks_distance(curve, EmpiricalMeasure.from_values(snapped / root))
    return step, float(counts.max() / len(T)), lks


# -- serialization ------------------------------------------------------------------------------

def write_values(mu: EmpiricalMeasure, path) -> None:
    """Sorted value column, with a weight column when the weights are not uniform."""
    uniform = np.allclose(mu.weights, mu.weights[0])
    header = mu.tag if uniform else f"{mu.tag}\nvalue weight"
    data = mu.values if uniform else np.column_stack([mu.values, mu.weights])
    np.savetxt(path, data, fmt="%.17g", header=header)


def read_values(path, tag="file") -> EmpiricalMeasure:
    data = np.loadtxt(path, ndmin=1)
    if data.ndim == 2:
        return EmpiricalMeasure(data[:, 0], data[:, 1], tag)
    return EmpiricalMeasure.from_values(data, tag)


def write_histogram(mu: EmpiricalMeasure, path, bins=50) -> None:
    """Rows of (left bin edge, mass)."""
    edges, mass = mu.histogram(bins)
    np.savetxt(path, np.column_stack([edges[:-1], mass]), fmt="%.17g",
               header=f"{mu.tag}\nleft_edge mass")
