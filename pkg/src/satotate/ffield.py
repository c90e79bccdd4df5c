"""Arithmetic in finite fields F_q, q = p^k with p odd, and polynomials over them.

Elements are addressed by an integer index.  In a prime field the index is the
residue; in an extension field it is the base-p digit encoding
``c_0 + c_1 p + ... + c_{k-1} p^{k-1}`` of the coefficient vector with respect
to the power basis of ``F_p[t]/(modulus)``.  The same encoding addresses the
lookup tables (character, sum, difference, product) consumed by the kernels.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FieldError", "FieldSpec", "FieldElement", "Poly", "field_make",
    "quad_char", "char_table", "is_prime", "TABLE_CAP", "CHAR_TABLE_CAP",
]

#: largest q for which q x q arithmetic tables are built
TABLE_CAP = 2048
#: largest q for which the length-q character table is built
CHAR_TABLE_CAP = 1 << 24


class FieldError(ValueError):
    """Invalid field parameters or an operation over the wrong field."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The field F_q with q = p^k.

    ``modulus`` holds the coefficients (low to high, monic) of the irreducible
    polynomial defining the extension; it is ``None`` for prime fields.  Build
    instances with :func:`field_make`, which validates the parameters.
    """

    p: int
    k: int = 1
    modulus: tuple[int, ...] | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False,
                         compare=False, hash=False)

    @property
    def q(self) -> int:
        return self.p ** self.k

    @property
    def is_prime_field(self) -> bool:
        return self.k == 1

    def __str__(self) -> str:
        if self.k == 1:
            return f"F_{self.p}"
        return f"F_{self.q} = F_{self.p}[t]/({_poly_str(self.modulus, 't')})"

    # -- encoding -----------------------------------------------------------

    def coeffs(self, x: int) -> tuple[int, ...]:
        """Coefficient vector (length k) of the element with index ``x``."""
        out = []
        for _ in range(self.k):
            x, r = divmod(x, self.p)
            out.append(r)
        return tuple(out)

    def index(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) > self.k:
            raise FieldError(f"coefficient vector longer than k={self.k}")
        x = 0
        for c in reversed(coeffs):
            x = x * self.p + (c % self.p)
        return x

    def from_int(self, n: int) -> int:
        """Index of the image of the integer ``n`` (a prime-field constant)."""
        return n % self.p

    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            return value
        if isinstance(value, (tuple, list)):
            return FieldElement(self, self.index(value))
        return FieldElement(self, self.from_int(int(value)))

    def elements(self) -> range:
        return range(self.q)

    # -- scalar arithmetic on indices ---------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        ca, cb = self.coeffs(a), self.coeffs(b)
        return self.index([x + y for x, y in zip(ca, cb)])

    def neg(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        return self.index([-x for x in self.coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a * b) % self.p
        ca, cb = self.coeffs(a), self.coeffs(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(ca):
            if x:
                for j, y in enumerate(cb):
                    prod[i + j] += x * y
        return self.index(_reduce_mod(prod, self.modulus, self.p))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in " + str(self))
        if self.k == 1:
            return pow(a, -1, self.p)
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def frobenius_root(self, a: int) -> int:
        """The unique p-th root of ``a`` (Frobenius is bijective on F_q)."""
        if self.k == 1:
            return a
        return self.pow(a, self.p ** (self.k - 1))

    # -- tables ---------------------------------------------------------------

    def _coeff_matrix(self) -> np.ndarray:
        idx = np.arange(self.q, dtype=np.int64)
        cols = []
        for _ in range(self.k):
            idx, r = np.divmod(idx, self.p)
            cols.append(r)
        return np.stack(cols, axis=1)

    def _encode(self, cmat: np.ndarray) -> np.ndarray:
        out = np.zeros(cmat.shape[:-1], dtype=np.int64)
        for i in reversed(range(self.k)):
            out = out * self.p + cmat[..., i]
        return out

    def _check_table_cap(self) -> None:
        if self.q > TABLE_CAP:
            raise FieldError(f"q={self.q} exceeds the arithmetic table cap {TABLE_CAP}")

    @property
    def add_table(self) -> np.ndarray:
        if "add" not in self._cache:
            self._check_table_cap()
            if self.k == 1:
                r = np.arange(self.q)
                t = (r[:, None] + r[None, :]) % self.p
            else:
                c = self._coeff_matrix()
                t = self._encode((c[:, None, :] + c[None, :, :]) % self.p)
            self._cache["add"] = _frozen(t.astype(np.int32))
        return self._cache["add"]

    @property
    def neg_table(self) -> np.ndarray:
        if "neg" not in self._cache:
            if self.k == 1:
                t = (-np.arange(self.q)) % self.p
            else:
                t = self._encode((-self._coeff_matrix()) % self.p)
            self._cache["neg"] = _frozen(t.astype(np.int32))
        return self._cache["neg"]

    @property
    def sub_table(self) -> np.ndarray:
        """``sub_table[x, a]`` is the index of x - a."""
        if "sub" not in self._cache:
            self._check_table_cap()
            self._cache["sub"] = _frozen(
                np.ascontiguousarray(self.add_table[:, self.neg_table]))
        return self._cache["sub"]

    @property
    def mul_table(self) -> np.ndarray:
        if "mul" not in self._cache:
            self._check_table_cap()
            if self.k == 1:
                r = np.arange(self.q, dtype=np.int64)
                t = (r[:, None] * r[None, :]) % self.p
            else:
                c = self._coeff_matrix()
                k, p = self.k, self.p
                prod = np.zeros((self.q, self.q, 2 * k - 1), dtype=np.int64)
                for i in range(k):
                    for j in range(k):
                        prod[:, :, i + j] += c[:, None, i] * c[None, :, j]
                prod %= p
                mod = self.modulus
                # reduce t^d for d >= k using t^k = -(mod_0 + ... + mod_{k-1} t^{k-1})
                for d in range(2 * k - 2, k - 1, -1):
                    top = prod[:, :, d].copy()
                    prod[:, :, d] = 0
                    for i in range(k):
                        prod[:, :, d - k + i] -= top * mod[i]
                    prod %= p
                t = self._encode(prod[:, :, :k])
            self._cache["mul"] = _frozen(t.astype(np.int32))
        return self._cache["mul"]

    @property
    def square_counts(self) -> np.ndarray:
        """``square_counts[v]`` = number of y in F_q with y^2 = v."""
        if "sqc" not in self._cache:
            if self.q <= TABLE_CAP:
                sq = np.diagonal(self.mul_table)
            else:
                sq = np.array([self.mul(y, y) for y in range(self.q)])
            self._cache["sqc"] = _frozen(np.bincount(sq, minlength=self.q))
        return self._cache["sqc"]


class FieldElement:
    """Convenience wrapper pairing an index with its field."""

    __slots__ = ("field", "index")

    def __init__(self, fld: FieldSpec, index: int):
        if not 0 <= index < fld.q:
            raise FieldError(f"index {index} out of range for {fld}")
        self.field = fld
        self.index = index

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldError("mixed fields")
            return other.index
        return self.field.from_int(int(other))

    def __add__(self, other):
        return FieldElement(self.field, self.field.add(self.index, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.field, self.field.sub(self.index, self._other(other)))

    def __rsub__(self, other):
        return FieldElement(self.field, self.field.sub(self._other(other), self.index))

    def __mul__(self, other):
        return FieldElement(self.field, self.field.mul(self.index, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.field, self.field.div(self.index, self._other(other)))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.index))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.index, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.index))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.index == other.index
        if isinstance(other, int):
            return self.index == self.field.from_int(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.k, self.index))

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.coeffs(self.index)

    def __int__(self):
        return self.index

    def __repr__(self):
        if self.field.k == 1:
            return f"{self.index} (mod {self.field.p})"
        return f"{_poly_str(self.coeffs, 't')} in F_{self.field.q}"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _reduce_mod(prod: list[int], modulus: Sequence[int], p: int) -> list[int]:
    k = len(modulus) - 1
    prod = [c % p for c in prod]
    for d in range(len(prod) - 1, k - 1, -1):
        top = prod[d]
        if top:
            prod[d] = 0
            for i in range(k):
                prod[d - k + i] = (prod[d - k + i] - top * modulus[i]) % p
    return prod[:k]


def _poly_str(coeffs: Sequence[int], var: str = "x") -> str:
    terms = []
    for i in reversed(range(len(coeffs))):
        c = coeffs[i]
        if not c:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}*{mono}")
    return " + ".join(terms) or "0"


class Poly:
    """Polynomial over F_q with coefficients stored as element indices, low to high.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("field", "c")

    def __init__(self, fld: FieldSpec, coeffs: Iterable[int] = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.field = fld
        self.c = tuple(c)

    @classmethod
    def from_roots(cls, fld: FieldSpec, roots: Iterable[int], lead: int = 1) -> "Poly":
        out = cls(fld, [lead])
        for r in roots:
            out = out * cls(fld, [fld.neg(r), 1])
        return out

    @classmethod
    def monomial(cls, fld: FieldSpec, d: int, coeff: int = 1) -> "Poly":
        return cls(fld, [0] * d + [coeff])

    @property
    def deg(self) -> int:
        return len(self.c) - 1

    @property
    def lead(self) -> int:
        return self.c[-1] if self.c else 0

    def is_zero(self) -> bool:
        return not self.c

    def is_one(self) -> bool:
        return self.c == (1,)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.field == other.field and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        return f"Poly({_poly_str(self.c)} over F_{self.field.q})"

    def __add__(self, other: "Poly") -> "Poly":
        f = self.field
        n = max(len(self.c), len(other.c))
        a = self.c + (0,) * (n - len(self.c))
        b = other.c + (0,) * (n - len(other.c))
        return Poly(f, [f.add(x, y) for x, y in zip(a, b)])

    def __neg__(self) -> "Poly":
        return Poly(self.field, [self.field.neg(x) for x in self.c])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        f = self.field
        if isinstance(other, int):
            return Poly(f, [f.mul(x, other) for x in self.c])
        if not self.c or not other.c:
            return Poly(f)
        out = [0] * (len(self.c) + len(other.c) - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(other.c):
                    if y:
                        out[i + j] = f.add(out[i + j], f.mul(x, y))
        return Poly(f, out)

    def __pow__(self, e: int) -> "Poly":
        out = Poly(self.field, [1])
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def scale(self, a: int) -> "Poly":
        return self * a

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        f = self.field
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.c)
        inv_lead = f.inv(other.lead)
        dq = len(rem) - len(other.c)
        quo = [0] * max(dq + 1, 0)
        for d in range(dq, -1, -1):
            top = rem[d + other.deg]
            if top:
                t = f.mul(top, inv_lead)
                quo[d] = t
                for i, y in enumerate(other.c):
                    rem[d + i] = f.sub(rem[d + i], f.mul(t, y))
        return Poly(f, quo), Poly(f, rem)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * self.field.inv(self.lead)

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def derivative(self) -> "Poly":
        f = self.field
        return Poly(f, [f.mul(c, f.from_int(i)) for i, c in enumerate(self.c)][1:])

    def pth_root(self) -> "Poly":
        """Return R with R^p == self; requires self to be a polynomial in x^p."""
        f, p = self.field, self.field.p
        if any(c for i, c in enumerate(self.c) if i % p):
            raise ValueError("not a p-th power")
        return Poly(f, [f.frobenius_root(self.c[i]) for i in range(0, len(self.c), p)])

    def __call__(self, x: int) -> int:
        f = self.field
        acc = 0
        for c in reversed(self.c):
            acc = f.add(f.mul(acc, x), c)
        return acc

    def values(self) -> np.ndarray:
        """Values at every field element, indexed by element index."""
        f = self.field
        if f.q <= TABLE_CAP:
            xs = np.arange(f.q)
            acc = np.zeros(f.q, dtype=np.int64)
            mul, add = f.mul_table, f.add_table
            for c in reversed(self.c):
                acc = add[mul[acc, xs], c]
            return acc
        return np.array([self(x) for x in range(f.q)], dtype=np.int64)


def _irreducible_over_prime(fp: FieldSpec, f: Poly) -> bool:
    """Rabin's test for a monic f over the prime field ``fp``."""
    k = f.deg
    if k <= 0:
        return False
    if k == 1:
        return True
    x = Poly.monomial(fp, 1)

    def x_pow_p_pow(i: int) -> Poly:
        r = x
        for _ in range(i):
            r = _powmod(r, fp.p, f)
        return r

    if not (x_pow_p_pow(k) - x) % f == Poly(fp):
        return False
    for r in _prime_divisors(k):
        h = x_pow_p_pow(k // r) - x
        if not h.gcd(f).is_one():
            return False
    return True


def _powmod(base: Poly, e: int, mod: Poly) -> Poly:
    out = Poly(base.field, [1])
    base = base % mod
    while e:
        if e & 1:
            out = (out * base) % mod
        base = (base * base) % mod
        e >>= 1
    return out


def _prime_divisors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@functools.lru_cache(maxsize=None)
def field_make(p: int, k: int = 1, modulus: tuple[int, ...] | None = None) -> FieldSpec:
    """Construct and validate F_{p^k}.

    ``modulus`` gives the defining polynomial's coefficients low to high
    (monic, length k + 1).  When omitted for k > 1 the first irreducible monic
    polynomial in the order of its base-p encoded lower coefficients is used.
    """
    if not isinstance(p, int) or not is_prime(p):
        raise FieldError(f"p={p} is not prime")
    if p == 2:
        raise FieldError("characteristic 2 is not supported")
    if k < 1:
        raise FieldError(f"extension degree k={k} must be >= 1")
    fp = FieldSpec(p)
    if k == 1:
        if modulus is not None and len(modulus) != 2:
            raise FieldError("a modulus for k=1 must have degree 1")
        return fp
    if modulus is not None:
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus must be monic of degree {k}")
        if not _irreducible_over_prime(fp, Poly(fp, modulus)):
            raise FieldError(f"modulus {_poly_str(modulus)} is reducible over F_{p}")
        return FieldSpec(p, k, modulus)
    for code in range(p ** k):
        cand = tuple(_digits(code, p, k)) + (1,)
        if _irreducible_over_prime(fp, Poly(fp, cand)):
            return FieldSpec(p, k, cand)
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")  # unreachable


def _digits(n: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        n, r = divmod(n, p)
        out.append(r)
    return out


def quad_char(s: FieldSpec, x) -> int:
    """Quadratic character extended by zero: 0, 1 (nonzero square) or -1."""
    if isinstance(x, FieldElement):
        x = x.index
    if x == 0:
        return 0
    if "chi" in s._cache:
        return int(s._cache["chi"][x])
    e = s.pow(x, (s.q - 1) // 2)
    return 1 if e == 1 else -1


def char_table(s: FieldSpec, cap: int | None = None) -> np.ndarray:
    """``table[x] = quad_char(s, x)`` for every element index, as int8."""
    cap = CHAR_TABLE_CAP if cap is None else cap
    if s.q > cap:
        raise FieldError(f"q={s.q} exceeds the character table cap {cap}")
    if "chi" not in s._cache:
        t = np.full(s.q, -1, dtype=np.int8)
        if s.k == 1:
            ys = np.arange(1, s.p, dtype=np.int64)
            t[(ys * ys) % s.p] = 1
        elif s.q <= TABLE_CAP:
            t[np.diagonal(s.mul_table)[1:]] = 1
        else:
            t[[s.mul(y, y) for y in range(1, s.q)]] = 1
        t[0] = 0
        s._cache["chi"] = _frozen(t)
    return s._cache["chi"]
