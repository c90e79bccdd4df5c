"""Haar sampling and trace moments of compact groups in their standard representation.

Families: compact symplectic Sp(2g), SO(n), O(n), SU(2), the torus U(1)^n and the
normalizer of the diagonal torus in SU(2).  Moments are computed three ways:
Monte Carlo over Haar samples, Weyl-integration quadrature over the maximal
torus, and the closed forms valid in the stable range.

Monte Carlo samples are partitioned into fixed-size streams, each with its own
counter-based generator keyed by ``(seed, stream id)``, so results do not depend
on the number of threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .moments import double_factorial_F

__all__ = [
    "FAMILIES", "GroupSpec", "MomentEstimate", "OutOfRangeError", "A4Result",
    "group_spec", "haar_sample", "haar_batch", "membership_residual",
    "sample_traces", "trace_moment_mc", "trace_moment_weyl", "weyl_integral",
    "stable_moment", "a4", "a4_finite", "clt_demo", "write_traces", "read_traces",
]

FAMILIES = ("Sp", "SO", "O", "SU2", "TorusPower", "TorusNormalizerInSU2")
_ALIASES = {
    "sp": "Sp", "usp": "Sp", "so": "SO", "o": "O", "su2": "SU2",
    "torus": "TorusPower", "toruspower": "TorusPower", "u1n": "TorusPower",
    "normalizer": "TorusNormalizerInSU2", "torusnormalizerinsu2": "TorusNormalizerInSU2",
}

STREAM_SIZE = 4096
WEYL_TOL = 1e-10


class OutOfRangeError(ValueError):
    """Requested moment order lies outside the stable range of the family."""


@dataclass(frozen=True)
class GroupSpec:
    """A compact group family with its size parameter (g for Sp(2g), n otherwise)."""

    family: str
    size: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unsupported family {self.family!r}")
        if self.family == "Sp" and self.size < 1:
            raise ValueError("Sp(2g) needs g >= 1")
        if self.family in ("SO", "O") and self.size < 2:
            raise ValueError(f"{self.family}(n) needs n >= 2")
        if self.family == "TorusPower" and self.size < 1:
            raise ValueError("U(1)^n needs n >= 1")

    @property
    def dim(self) -> int:
        return {"Sp": 2 * self.size, "SO": self.size, "O": self.size, "SU2": 2,
                "TorusPower": self.size, "TorusNormalizerInSU2": 2}[self.family]

    @property
    def rank(self) -> int:
        if self.family in ("SO", "O"):
            return self.size // 2
        if self.family in ("SU2", "TorusNormalizerInSU2"):
            return 1
        return self.size

    @property
    def self_dual(self) -> bool:
        return self.family != "TorusPower"

    @property
    def name(self) -> str:
        return {"Sp": f"Sp({2 * self.size})", "SO": f"SO({self.size})",
                "O": f"O({self.size})", "SU2": "SU(2)",
                "TorusPower": f"U(1)^{self.size}",
                "TorusNormalizerInSU2": "N_SU(2)(U(1))"}[self.family]


def group_spec(family: str, size: int | None = None) -> GroupSpec:
    fam = _ALIASES.get(family.lower().replace("_", "").replace("-", ""), family)
    if fam in ("SU2", "TorusNormalizerInSU2"):
        return GroupSpec(fam, 1)
    if size is None:
        raise ValueError(f"{fam} needs a size")
    return GroupSpec(fam, size)


@dataclass(frozen=True)
class MomentEstimate:
    order: int
    value: float
    stderr: float
    method: str
    samples: int = 0

    def within(self, target: float, n_se: float = 5.0, floor: float = 0.0) -> bool:
        return abs(self.value - target) <= n_se * self.stderr + floor


# -- sampling -----------------------------------------------------------------

def _rng(seed: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def _complex_gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _sample_su2(rng, count):
    x = rng.standard_normal((count, 4))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    a = x[:, 0] + 1j * x[:, 1]
    b = x[:, 2] + 1j * x[:, 3]
    out = np.empty((count, 2, 2), dtype=complex)
    out[:, 0, 0], out[:, 0, 1] = a, -b.conj()
    out[:, 1, 0], out[:, 1, 1] = b, a.conj()
    return out


def _sigma(v, g):
    """Quaternionic conjugate column: (a; b) -> (-conj b; conj a)."""
    return np.concatenate([-v[:, g:].conj(), v[:, :g].conj()], axis=1)


def _sample_sp(rng, count, g):
    # Gram-Schmidt of Gaussian vectors against the span of earlier columns and
    # their quaternionic conjugates; the output is left-invariant, hence Haar.
    cols, conj_cols = [], []
    for _ in range(g):
        v = _complex_gaussian(rng, (count, 2 * g))
        for _ in range(2):
            for w in cols + conj_cols:
                v = v - w * np.einsum("ij,ij->i", w.conj(), v)[:, None]
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        cols.append(v)
        conj_cols.append(_sigma(v, g))
    return np.stack(cols + conj_cols, axis=2)


def _sample_o(rng, count, n):
    z = rng.standard_normal((count, n, n))
    qm, r = np.linalg.qr(z)
    # the sign fix on diag(R) makes the factorization unique, which is what
    # makes Q Haar-distributed
    qm = qm * np.sign(np.diagonal(r, axis1=1, axis2=2))[:, None, :]
    return qm


def _sample_so(rng, count, n):
    qm = _sample_o(rng, count, n)
    neg = np.linalg.det(qm) < 0
    qm[neg, :, 0] *= -1
    return qm


def haar_batch(spec: GroupSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-distributed matrices of shape (count, dim, dim)."""
    fam = spec.family
    if fam == "SU2":
        return _sample_su2(rng, count)
    if fam == "Sp":
        return _sample_sp(rng, count, spec.size)
    if fam == "SO":
        return _sample_so(rng, count, spec.size)
    if fam == "O":
        m = _sample_so(rng, count, spec.size)
        flip = rng.random(count) < 0.5
        m[flip, :, 0] *= -1
        return m
    if fam == "TorusPower":
        th = rng.uniform(0, 2 * np.pi, (count, spec.size))
        out = np.zeros((count, spec.size, spec.size), dtype=complex)
        idx = np.arange(spec.size)
        out[:, idx, idx] = np.exp(1j * th)
        return out
    if fam == "TorusNormalizerInSU2":
        th = rng.uniform(0, 2 * np.pi, count)
        off = rng.random(count) < 0.5
        e = np.exp(1j * th)
        out = np.zeros((count, 2, 2), dtype=complex)
        out[~off, 0, 0], out[~off, 1, 1] = e[~off], e[~off].conj()
        out[off, 0, 1], out[off, 1, 0] = e[off], -e[off].conj()
        return out
    raise ValueError(f"unsupported family {fam!r}")


def haar_sample(spec: GroupSpec, seed: int = 0, stream: int = 0) -> np.ndarray:
    """One Haar sample drawn from stream ``stream`` of ``seed``."""
    return haar_batch(spec, 1, _rng(seed, stream))[0]


def symplectic_form(g: int) -> np.ndarray:
    J = np.zeros((2 * g, 2 * g))
    J[:g, g:] = np.eye(g)
    J[g:, :g] = -np.eye(g)
    return J


def membership_residual(spec: GroupSpec, M: np.ndarray) -> float:
    """Max-norm violation of the defining equations of the group."""
    d = spec.dim
    res = np.abs(M.conj().T @ M - np.eye(d)).max()
    fam = spec.family
    if fam in ("SO", "O"):
        res = max(res, np.abs(M.imag).max() if np.iscomplexobj(M) else 0.0)
        if fam == "SO":
            res = max(res, abs(np.linalg.det(M) - 1))
        else:
            res = max(res, abs(abs(np.linalg.det(M)) - 1))
    elif fam in ("SU2", "TorusNormalizerInSU2"):
        res = max(res, abs(np.linalg.det(M) - 1))
    elif fam == "Sp":
        J = symplectic_form(spec.size)
        res = max(res, np.abs(M.T @ J @ M - J).max())
    elif fam == "TorusPower":
        res = max(res, np.abs(M - np.diag(np.diagonal(M))).max())
    return float(res)


def _streams(N: int) -> list[tuple[int, int]]:
    return [(i, min(STREAM_SIZE, N - i * STREAM_SIZE))
            for i in range(math.ceil(N / STREAM_SIZE))]


def _stream_traces(spec, seed, stream, count):
    m = haar_batch(spec, count, _rng(seed, stream))
    tr = np.trace(m, axis1=1, axis2=2)
    return tr if spec.family == "TorusPower" else tr.real


def _map_streams(fn, N, threads):
    streams = _streams(N)
    if threads <= 1:
        return [fn(s, c) for s, c in streams]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda sc: fn(*sc), streams))


def sample_traces(spec: GroupSpec, N: int, seed: int = 0, threads: int = 1) -> np.ndarray:
    """Traces of N Haar samples (complex for U(1)^n, real otherwise)."""
    parts = _map_streams(lambda s, c: _stream_traces(spec, seed, s, c), N, threads)
    return np.concatenate(parts)


def trace_moment_mc(spec: GroupSpec, m: int, N: int = 10 ** 5, seed: int = 0,
                    threads: int = 1) -> MomentEstimate:
    """Monte Carlo estimate of E[tr(g)^m] (real part of the trace for U(1)^n).

    Per-stream sums are correctly rounded (``math.fsum``), so the estimate is
    bit-identical for any thread count.
    """
    if N < 1000:
        raise ValueError("Monte Carlo moments need N >= 1000 samples")

    def partial(stream, count):
        x = _stream_traces(spec, seed, stream, count).real ** m
        return math.fsum(x), math.fsum(x * x)

    parts = _map_streams(partial, N, threads)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / N
    var = max(s2 / N - mean * mean, 0.0) * N / (N - 1)
    return MomentEstimate(m, mean, math.sqrt(var / N), "monte_carlo", N)


# -- Weyl integration ---------------------------------------------------------

def _vandermonde_sq(c):
    # prod_{j<k} (2cos t_j - 2cos t_k)^2 over the first axis of c = 2cos(theta)
    out = np.ones(c.shape[1:])
    for j in range(len(c)):
        for k in range(j + 1, len(c)):
            out = out * (c[j] - c[k]) ** 2
    return out


def _sp_density(th):
    g = len(th)
    c = 2 * np.cos(th)
    w = _vandermonde_sq(c) * np.prod(4 * np.sin(th) ** 2, axis=0)
    return w / (2 ** g * math.factorial(g))


def _so_even_density(th):
    r = len(th)
    return _vandermonde_sq(2 * np.cos(th)) / (2 ** (r - 1) * math.factorial(r))


def _so_odd_density(th):
    r = len(th)
    w = _vandermonde_sq(2 * np.cos(th)) * np.prod(4 * np.sin(th / 2) ** 2, axis=0)
    return w / (2 ** r * math.factorial(r))


def _sum2cos(th):
    return np.sum(2 * np.cos(th), axis=0)


# component: (weight, number of angles, density, trace as a function of angles)
Component = tuple[float, int, Callable, Callable]


def _components(spec: GroupSpec) -> list[Component]:
    fam, n = spec.family, spec.size
    if fam in ("Sp", "SU2"):
        return [(1.0, n, _sp_density, _sum2cos)]
    if fam == "TorusPower":
        return [(1.0, n, lambda th: np.ones(th.shape[1:]),
                 lambda th: np.sum(np.exp(1j * th), axis=0))]
    if fam == "TorusNormalizerInSU2":
        return [(0.5, 1, lambda th: np.ones(th.shape[1:]), _sum2cos),
                (0.5, 0, None, lambda th: 0.0)]
    r = n // 2
    if n % 2:
        so = (1.0, r, _so_odd_density, lambda th: 1 + _sum2cos(th))
    else:
        so = (1.0, r, _so_even_density, _sum2cos)
    if fam == "SO":
        return [so]
    if n % 2:
        # O^-(2r+1) = -SO(2r+1)
        minus = (0.5, r, _so_odd_density, lambda th: -1 - _sum2cos(th))
    elif r == 1:
        minus = (0.5, 0, None, lambda th: 0.0)
    else:
        # O^-(2r): eigenvalues +1, -1 and r-1 conjugate pairs distributed as in Sp(2r-2)
        minus = (0.5, r - 1, _sp_density, _sum2cos)
    return [(0.5, so[1], so[2], so[3]), minus]


def _trapezoid(r, density, trace, f, nodes):
    if r == 0:
        return complex(f(np.asarray(trace(None))))
    grid = np.meshgrid(*([np.arange(nodes) * (2 * np.pi / nodes)] * r), indexing="ij")
    th = np.stack(grid)
    return complex(np.mean(density(th) * f(trace(th))))


def weyl_integral(spec: GroupSpec, f: Callable, max_rank: int = 3,
                  tol: float = WEYL_TOL, max_nodes: int = 512) -> float:
    """Haar integral of f(trace) by periodic trapezoid rules on the maximal torus.

    The node count doubles until successive values agree to ``tol``.
    """
    comps = _components(spec)
    if max(c[1] for c in comps) > max_rank:
        raise OutOfRangeError(f"rank of {spec.name} exceeds {max_rank}")
    total = 0j
    for weight, r, density, trace in comps:
        nodes = 16
        prev = _trapezoid(r, density, trace, f, nodes)
        while r:
            nodes *= 2
            cur = _trapezoid(r, density, trace, f, nodes)
            if abs(cur - prev) <= tol:
                prev = cur
                break
            if nodes >= max_nodes:
                raise ArithmeticError("Weyl quadrature did not converge")
            prev = cur
        total += weight * prev
    return total.real if abs(total.imag) < 1e-9 else total


def trace_moment_weyl(spec: GroupSpec, m: int) -> MomentEstimate:
    """E[tr(g)^m] (real part of the trace for U(1)^n) by Weyl integration."""
    value = weyl_integral(spec, lambda t: np.real(t) ** m)
    return MomentEstimate(m, float(value), 0.0, "weyl_quadrature")


# -- closed forms ---------------------------------------------------------------

def stable_range(family: str, size: int, orthogonal_max: int | None = None) -> int:
    """Largest m for which a_m = F(m) is asserted for the family."""
    if family == "Sp":
        return 2 * size + 1
    if family in ("SO", "O"):
        return size - 1 if orthogonal_max is None else orthogonal_max
    raise ValueError(f"no stable formula for {family}")


def stable_moment(family: str, size: int, m: int, orthogonal_max: int | None = None) -> int:
    """(m-1)!! for even m, 0 for odd m, inside the stable range.

    The symplectic range is m <= 2g + 1.  For SO(n)/O(n) the default cut-off
    m <= n - 1 is a convention (SO(n) gains the determinant invariant at m = n);
    pass ``orthogonal_max`` to override it.
    """
    family = group_spec(family, size).family
    top = stable_range(family, size, orthogonal_max)
    if not 0 <= m <= top:
        raise OutOfRangeError(f"m={m} outside the stable range m <= {top} of {family}({size})")
    return double_factorial_F(m)


@dataclass(frozen=True)
class A4Result:
    spec: GroupSpec
    value: float
    method: str
    on_list: bool

    @property
    def equals_three(self) -> bool:
        return abs(self.value - 3) < 1e-8


def _on_classification_list(spec: GroupSpec) -> bool:
    return spec.family in ("Sp", "SO", "O", "TorusNormalizerInSU2")


def a4(spec: GroupSpec) -> A4Result:
    """Fourth Sato-Tate moment, the integral of |tr g|^4 over Haar measure."""
    try:
        value = weyl_integral(spec, lambda t: np.abs(t) ** 4)
        method = "weyl_quadrature"
    except OutOfRangeError:
        if spec.family == "TorusPower":
            value, method = 2 * spec.size ** 2 - spec.size, "component_formula"
        else:
            value, method = stable_moment(spec.family, spec.size, 4), "stable_formula"
    return A4Result(spec, float(value), method, _on_classification_list(spec))


def a4_finite(table: Sequence[tuple[int, object]], order: int | None = None):
    """|G|^-1 sum over classes of size * |trace|^4 for a finite group character.

    Traces may be numbers or strings such as ``"(1+sqrt(5))/2"``; the sum is
    evaluated exactly and returned as a Fraction when rational.
    """
    import sympy

    sizes = [int(s) for s, _ in table]
    if any(s <= 0 for s in sizes):
        raise ValueError("class sizes must be positive")
    total_size = sum(sizes)
    if order is not None and order != total_size:
        raise ValueError(f"class sizes sum to {total_size}, not the group order {order}")
    acc = sympy.Integer(0)
    for size, tr in table:
        t = sympy.nsimplify(tr) if not isinstance(tr, str) else sympy.sympify(tr)
        acc += size * sympy.expand((t * sympy.conjugate(t)) ** 2)
    val = sympy.nsimplify(sympy.simplify(acc / total_size))
    if val.is_Rational:
        return Fraction(int(val.p), int(val.q))
    return float(val)


# -- torus CLT contrast ----------------------------------------------------------

def clt_demo(n: int, N: int = 10 ** 5, seed: int = 0, threads: int = 1) -> dict:
    """Real traces of U(1)^n, unrescaled and rescaled by sqrt(2/n), vs N(0, 1)."""
    from .measures import EmpiricalMeasure, ks_distance

    x = sample_traces(GroupSpec("TorusPower", n), N, seed, threads).real
    z = x * math.sqrt(2 / n)
    raw = EmpiricalMeasure.from_values(x, tag=f"haar(U(1)^{n},{N})")
    scaled = EmpiricalMeasure.from_values(z, tag=f"haar(U(1)^{n},{N}) * sqrt(2/n)")
    return {
        "n": n, "samples": N, "seed": seed,
        "raw_mean": float(x.mean()), "raw_second_moment": float(np.mean(x * x)),
        "raw_ks_to_normal": ks_distance(raw, "std_normal"),
        "rescaled_mean": float(z.mean()), "rescaled_second_moment": float(np.mean(z * z)),
        "rescaled_ks_to_normal": ks_distance(scaled, "std_normal"),
    }


# -- export -------------------------------------------------------------------------

def write_traces(path, traces: np.ndarray, fmt: str = "text") -> None:
    """Write traces as a text column (``re`` or ``re im``) or raw little-endian doubles."""
    traces = np.asarray(traces)
    if fmt == "binary":
        arr = traces.astype("<c16") if np.iscomplexobj(traces) else traces.astype("<f8")
        arr.tofile(path)
    elif fmt == "text":
        if np.iscomplexobj(traces):
            np.savetxt(path, np.column_stack([traces.real, traces.imag]), fmt="%.17g")
        else:
            np.savetxt(path, traces, fmt="%.17g")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_traces(path, fmt: str = "text", complex_values: bool = False) -> np.ndarray:
    if fmt == "binary":
        return np.fromfile(path, dtype="<c16" if complex_values else "<f8")
    data = np.loadtxt(path, ndmin=1)
    if data.ndim == 2:
        return data[:, 0] + 1j * data[:, 1]
    return data
