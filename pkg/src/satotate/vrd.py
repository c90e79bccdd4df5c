"""Chebyshev-based approximate identities showing that Gaussians are VRD.

For m = 2 (mod 4) put E = m^3/4 (an even integer) and

    Q_m(x) = [(1 - x^2/m^4) T_{m-2}(x/m^2)]^E,

whose normalization f = Q_m / I_m on [-m^2, m^2] is an approximate identity.
E reaches the thousands, so every Q_m value is carried as a logarithm.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "C_CONST", "BoundReport", "ConvolutionResult", "check_m", "chebyshev_eval",
    "chebyshev_exact", "qm_log", "qm_eval", "im_integral", "adaptive_simpson",
    "bound_suite", "max_radius", "triangle_bump", "approx_identity_convolve",
    "gaussian_poly_approx",
]

C_CONST = 4 * math.e / 9
RECURRENCE_MAX = 64


def check_m(m: int) -> int:
    if m < 6 or m % 4 != 2:
        raise ValueError(f"m must satisfy m = 2 (mod 4) and m >= 6, got {m}")
    return m


def exponent(m: int) -> int:
    return m ** 3 // 4


def chebyshev_eval(n: int, x):
    """T_n(x) for real x (scalar or array).

    Degrees up to 64 use the three-term recurrence, which is stable both in
    [-1, 1] and outside it; higher degrees use cos(n arccos x) inside and
    cosh(n arccosh |x|) outside.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if n <= RECURRENCE_MAX:
        t0, t1 = np.ones_like(x), x
        if n == 0:
            return t0 if t0.ndim else float(t0)
        for _ in range(n - 1):
            t0, t1 = t1, 2 * x * t1 - t0
        return t1 if t1.ndim else float(t1)
    ax = np.abs(x)
    with np.errstate(invalid="ignore", over="ignore"):
        inside = np.cos(n * np.arccos(np.clip(x, -1, 1)))
        outside = np.cosh(n * np.arccosh(np.maximum(ax, 1))) * np.where(x < 0, (-1) ** n, 1)
    out = np.where(ax <= 1, inside, outside)
    return out if out.ndim else float(out)


def chebyshev_exact(n: int, x: Fraction) -> Fraction:
    """T_n at a rational point by the integer recurrence (test oracle)."""
    t0, t1 = Fraction(1), Fraction(x)
    if n == 0:
        return t0
    for _ in range(n - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1


def _base(m, x):
    x = np.asarray(x, dtype=float)
    return (1 - x * x / m ** 4) * chebyshev_eval(m - 2, x / m ** 2)


def qm_log(m: int, x):
    """log Q_m(x); -inf where Q_m vanishes.  The exponent is even, so Q_m >= 0."""
    check_m(m)
    b = np.abs(_base(m, x))
    with np.errstate(divide="ignore"):
        return exponent(m) * np.log(b)


def qm_eval(m: int, x):
    with np.errstate(over="ignore"):
        return np.exp(qm_log(m, x))


# -- quadrature ---------------------------------------------------------------------

def adaptive_simpson(f: Callable, a: float, b: float, tol: float = 1e-8,
                     breakpoints: Sequence[float] = (), panels: int = 16,
                     max_depth: int = 50, max_intervals: int = 10 ** 6) -> float:
    """Adaptive Simpson rule with a relative tolerance.

    ``f`` must accept arrays.  The interval is first cut at ``breakpoints`` and
    into ``panels`` equal pieces per segment; each panel is then refined until
    the Richardson estimate of its error falls below its share of the budget.
    """
    edges = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    starts = []
    for lo, hi in zip(edges, edges[1:]):
        starts.extend(np.linspace(lo, hi, panels + 1))
    starts = sorted(set(starts))

    def simpson(lo, fl, mid, fm, hi, fh):
        return (hi - lo) * (fl + 4 * fm + fh) / 6

    # crude magnitude estimate for the relative tolerance
    probe = np.linspace(a, b, 2001)
    scale = abs(np.trapezoid(f(probe), probe)) or 1.0
    abs_tol = tol * scale
    total = 0.0
    stack = []
    for lo, hi in zip(starts, starts[1:]):
        mid = (lo + hi) / 2
        fl, fm, fh = f(np.array([lo, mid, hi]))
        stack.append((lo, hi, fl, fm, fh, simpson(lo, fl, mid, fm, hi, fh), 0))
    done = 0
    while stack:
        lo, hi, fl, fm, fh, whole, depth = stack.pop()
        mid = (lo + hi) / 2
        lm, rm = (lo + mid) / 2, (mid + hi) / 2
        flm, frm = f(np.array([lm, rm]))
        left = simpson(lo, fl, lm, flm, mid, fm)
        right = simpson(mid, fm, rm, frm, hi, fh)
        err = left + right - whole
        share = abs_tol * (hi - lo) / (b - a)
        if abs(err) <= 15 * share or depth >= max_depth:
            if depth >= max_depth and abs(err) > 15 * share:
                raise ArithmeticError(f"adaptive Simpson did not converge near x={mid}")
            total += left + right + err / 15
            continue
        done += 1
        if done > max_intervals:
            raise ArithmeticError("adaptive Simpson exceeded its subdivision limit")
        stack.append((lo, mid, fl, flm, fm, left, depth + 1))
        stack.append((mid, hi, fm, frm, fh, right, depth + 1))
    return total


_IM: dict = {}


def im_integral(m: int, tol: float = 1e-8) -> float:
    """I_m, the integral of Q_m over [-m^2, m^2]; must be at least 1/(2 sqrt m)."""
    check_m(m)
    if (m, tol) not in _IM:
        val = adaptive_simpson(lambda x: qm_eval(m, x), -m ** 2, m ** 2, tol=tol,
                               breakpoints=(-2.0, -1.0, 0.0, 1.0, 2.0))
        if val < 1 / (2 * math.sqrt(m)):
            raise ArithmeticError(f"I_{m} = {val} is below 1/(2 sqrt m)")
        _IM[(m, tol)] = val
    return _IM[(m, tol)]


# -- bound suite -------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """Worst point of one inequality chain on its grid.

    ``margin`` is min(rhs - lhs) over the links of the chain; chains involving
    Q_m compare logarithms.
    """

    bound: str
    region: str
    points: int
    worst_x: float
    lhs: float
    rhs: float
    margin: float
    passed: bool
    note: str = ""

    def as_dict(self):
        return asdict(self)


def _report(bound, region, x, links, note="", log_scale=False):
    """links: list of (lhs array, rhs array); the chain holds where every rhs >= lhs."""
    with np.errstate(invalid="ignore"):
        # -inf <= -inf holds (both sides vanish)
        margins = np.stack([np.where(l == r, 0.0, r - l) for l, r in links])
    worst_link = np.min(margins, axis=0)
    i = int(np.argmin(worst_link))
    j = int(np.argmin(margins[:, i]))
    lhs, rhs = links[j][0][i], links[j][1][i]
    if log_scale:
        note = (note + "; " if note else "") + "values are logarithms"
    return BoundReport(bound, region, len(x), float(x[i]), float(lhs), float(rhs),
                       float(worst_link[i]), bool(worst_link[i] >= 0), note)


def _sym_grid(lo, hi, points, open_hi=False):
    half = max(points // 2, 1)
    pos = np.linspace(lo, hi, half + 1)[:-1] if open_hi else np.linspace(lo, hi, half)
    return np.concatenate([-pos[::-1], pos])


def max_radius(m: int) -> float:
    """Support radius below which the outer estimate applies: m^2/(6 sqrt C)."""
    return m ** 2 / (6 * math.sqrt(C_CONST))


def bound_suite(m: int, points: int = 10 ** 4, r_values: Sequence[float] | None = None
                ) -> list[BoundReport]:
    """Check the four inequality chains for Q_m, plus the lower bound on I_m.

    inner       |x| < m/2:   1 - 2x^2/m^2 <= 1 - 2(m-2)^2 (x/m^2)^2 <= T_{m-2}(x/m^2)
                             <= 1 - (m-2)^2/4 (x/m^2)^2 <= 1 - x^2/(16 m^2)
    secondRing  |x| < m/2:   Q_m <= (1 - x^2/(16 m^2))^E <= exp(-m x^2/64)
    thirdRing   m/2 <= |x| <= sqrt(2m^4 - m^2/4):  Q_m <= (1 - x^2/m^4)^E <= exp(-m/16)
    outerRing   |x| >= m^2, r < m^2/(6 sqrt C):  Q_m(x) exp(-(x-r)^2/2) <= C^(-m^4/4)

    Two supplementary reports are informational: ``inner_literal`` checks the
    middle inner term in the form 1 - 2(m-2)^2 (x/2m)^2, and
    ``thirdRing_support`` restricts the third ring to |x| <= m^2.
    """
    check_m(m)
    E = exponent(m)
    n = m - 2
    out = []

    x = _sym_grid(0, m / 2, points, open_hi=True)
    y = x / m ** 2
    T = chebyshev_eval(n, y)
    out.append(_report("inner", "|x| < m/2", x, [
        (1 - 2 * x ** 2 / m ** 2, 1 - 2 * n ** 2 * y ** 2),
        (1 - 2 * n ** 2 * y ** 2, T),
        (T, 1 - n ** 2 / 4 * y ** 2),
        (1 - n ** 2 / 4 * y ** 2, 1 - x ** 2 / (16 * m ** 2)),
    ]))
    literal_mid = 1 - 2 * n ** 2 * (x / (2 * m)) ** 2
    out.append(_report("inner_literal", "|x| < m/2", x, [
        (1 - 2 * x ** 2 / m ** 2, literal_mid), (literal_mid, T)],
        note="informational"))

    lq = qm_log(m, x)
    mid = E * np.log1p(-x ** 2 / (16 * m ** 2))
    out.append(_report("secondRing", "|x| < m/2", x, [
        (lq, mid), (mid, -m * x ** 2 / 64)], log_scale=True))

    top = math.sqrt(2 * m ** 4 - m ** 2 / 4)
    for name, hi, note in (("thirdRing", top, ""), ("thirdRing_support", m ** 2, "informational")):
        x = _sym_grid(m / 2, hi, points)
        lq = qm_log(m, x)
        with np.errstate(divide="ignore"):
            mid = E * np.log(np.abs(1 - x ** 2 / m ** 4))
        out.append(_report(name, f"m/2 <= |x| <= {hi:.6g}", x, [
            (lq, mid), (mid, np.full_like(x, -m / 16))], note=note, log_scale=True))

    # outer ring; past 4 m^2 the log-derivative of Q_m exp(-(x-r)^2/2) is negative
    rmax = max_radius(m)
    if r_values is None:
        r_values = (0.0, rmax / 2, 0.99 * rmax)
    if any(abs(r) >= rmax for r in r_values):
        raise ValueError(f"outer estimate needs |r| < {rmax:.6g}")
    x = _sym_grid(m ** 2, 4 * m ** 2, points)
    lq = qm_log(m, x)
    rhs = np.full_like(x, -(m ** 4 / 4) * math.log(C_CONST))
    links, tight = [], 0
    inter = E * (m * math.log(2) - 2 * m * math.log(m) + m * np.log(np.abs(x)))
    for r in r_values:
        g = -(x - r) ** 2 / 2
        links.append((lq + g, rhs))
        tight += int(np.sum(inter + g > rhs[0]))
    note = f"r in {[round(r, 6) for r in r_values]}"
    if tight:
        note += f"; intermediate bound exceeds the target at {tight} grid points"
    out.append(_report("outerRing", "|x| >= m^2", x, links, note=note, log_scale=True))

    Im = im_integral(m)
    lo = 1 / (2 * math.sqrt(m))
    out.append(BoundReport("Im_lower", "[-m^2, m^2]", 0, 0.0, lo, Im, Im - lo, Im >= lo))
    return out


# -- approximate identity ---------------------------------------------------------------

def triangle_bump(h: float, radius: float = 1.0):
    """Grid x = h*k covering [-radius, radius] and the samples of max(0, 1 - |x|/radius)."""
    k = int(round(radius / h))
    x = h * np.arange(-k, k + 1)
    return x, np.maximum(0.0, 1 - np.abs(x) / radius)


@dataclass
class ConvolutionResult:
    m: int
    x: np.ndarray
    conv: np.ndarray
    g: np.ndarray
    error: float
    weighted_error: float = float("nan")
    tail_log10: float = float("-inf")


def _fft_convolve(a, b):
    n = len(a) + len(b) - 1
    size = 1 << (n - 1).bit_length()
    return np.fft.irfft(np.fft.rfft(a, size) * np.fft.rfft(b, size), size)[:n]


def approx_identity_convolve(m: int, g: np.ndarray, h: float = 2e-3,
                             span: float | None = None) -> ConvolutionResult:
    """Convolve centred samples of g (spacing h) with f = Q_m/I_m on [-m^2, m^2].

    Returns f*g and g on a common grid together with the sup-norm error.  Q_m
    is truncated where it falls below 1e-300 relative to its peak, which only
    drops values under the double-precision floor.
    """
    check_m(m)
    g = np.asarray(g, dtype=float)
    if len(g) % 2 == 0:
        raise ValueError("g must be sampled on a grid centred at 0 (odd length)")
    k = len(g) // 2
    nz = np.nonzero(g)[0]
    radius = h * max(abs(nz[0] - k), abs(nz[-1] - k)) if len(nz) else 0.0
    if radius >= max_radius(m):
        raise ValueError(f"support radius {radius} not below {max_radius(m):.6g}")
    if span is None:
        xs = h * np.arange(-int(m ** 2 / h), int(m ** 2 / h) + 1)
        keep = qm_log(m, xs) > -690
        span = float(np.abs(xs[keep]).max())
    j = int(round(span / h))
    y = h * np.arange(-j, j + 1)
    f = qm_eval(m, y) / im_integral(m)
    conv = _fft_convolve(f, g) * h
    x = h * np.arange(-(j + k), j + k + 1)
    g_full = np.zeros_like(x)
    g_full[j:j + len(g)] = g
    return ConvolutionResult(m, x, conv, g_full, float(np.abs(conv - g_full).max()))


def gaussian_poly_approx(m: int, g: np.ndarray, h: float = 2e-3) -> ConvolutionResult:
    """Gaussian-weighted error of the approximate identity, plus the tail term.

    weighted_error = sup |exp(-x^2/2) ((f*g)(x) - g(x))|, and tail_log10 bounds
    log10 sup |exp(-x^2/2) ((Q_m/I_m) 1_{|y| > m^2}) * g| using max|g| times the
    largest Q_m exp(-x^2/2) product over the support window.
    """
    res = approx_identity_convolve(m, g, h)
    w = np.exp(-res.x ** 2 / 2)
    res.weighted_error = float(np.abs(w * (res.conv - res.g)).max())
    gmax = float(np.abs(g).max()) if len(g) else 0.0
    if gmax == 0:
        res.tail_log10 = float("-inf")
        return res
    k = len(g) // 2
    r = h * k
    ys = np.linspace(m ** 2, 4 * m ** 2, 20001)
    # y > m^2 and |x - y| <= r: the weight exp(-x^2/2) is largest at x = y - r
    lq = qm_log(m, ys) - (np.maximum(ys - r, 0)) ** 2 / 2
    lg = float(lq.max()) + math.log(2 * r * gmax / im_integral(m))
    res.tail_log10 = lg / math.log(10)
    return res
