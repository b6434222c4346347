"""Exact combinatorial kernel.

Unsigned Stirling numbers of the first kind ``s(n, j)``, Stirling numbers of
the second kind ``S(n, k)``, Lah numbers, binomials, generalized harmonic
numbers and a small truncated power series type over ``Fraction``.

Exact integers are plain Python ``int`` and exact ratios are
``fractions.Fraction`` (always in lowest terms with a positive denominator).

Rows of both Stirling triangles are memoized.  Rows up to ``DENSE_ROWS`` are
kept contiguously; larger rows are built on demand by sweeping the recurrence
from the last dense row and kept in a small LRU cache, so memory stays bounded.
Requests above ``MAX_N`` raise :class:`ResourceError`.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, ResourceError

__all__ = [
    "MAX_N",
    "DENSE_ROWS",
    "SeriesPoly",
    "binomial",
    "exact_str",
    "factorial",
    "harmonic",
    "lah_number",
    "parse_exact",
    "rising_factorial",
    "series_coefficient",
    "stirling_first",
    "stirling_first_prefix",
    "stirling_first_row",
    "stirling_second",
    "stirling_second_row",
]

MAX_N = 5000
DENSE_ROWS = 320
_LRU_ROWS = 6


def _check_int(name, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise DomainError(f"{name} must be an integer, got {value!r}")


def _check_cap(n):
    if n > MAX_N:
        raise ResourceError(f"n={n} exceeds the Stirling memo cap MAX_N={MAX_N}")


def _next_first(prev: tuple, n: int) -> tuple:
    # s(n+1, j) = n s(n, j) + s(n, j-1)
    return tuple(n * a + b for a, b in zip(prev + (0,), (0,) + prev))


def _next_second(prev: tuple, n: int) -> tuple:
    # S(n+1, j) = j S(n, j) + S(n, j-1)
    return tuple(j * a + b for j, (a, b) in enumerate(zip(prev + (0,), (0,) + prev)))


class _Triangle:
    """Row memo for one Stirling triangle, safe for concurrent readers."""

    def __init__(self, step):
        self._step = step
        self._rows: list[tuple] = [(1,)]
        self._big: OrderedDict[int, tuple] = OrderedDict()
        self._lock = threading.Lock()

    def row(self, n: int) -> tuple:
        _check_cap(n)
        rows = self._rows
        if n < len(rows):
            return rows[n]
        if n <= DENSE_ROWS:
            with self._lock:
                while len(self._rows) <= n:
                    m = len(self._rows) - 1
                    self._rows.append(self._step(self._rows[m], m))
            return self._rows[n]
        with self._lock:
            if n in self._big:
                self._big.move_to_end(n)
                return self._big[n]
            start = max((m for m in self._big if m < n), default=None)
        if start is None:
            m, cur = DENSE_ROWS, self.row(DENSE_ROWS)
        else:
            m, cur = start, self._big[start]
        while m < n:
            cur = self._step(cur, m)
            m += 1
        with self._lock:
            self._big[n] = cur
            while len(self._big) > _LRU_ROWS:
                self._big.popitem(last=False)
        return cur


_FIRST = _Triangle(_next_first)
_SECOND = _Triangle(_next_second)


def stirling_first_row(n: int) -> tuple:
    """Return ``(s(n,0), ..., s(n,n))`` for the unsigned first kind."""
    _check_int("n", n)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return _FIRST.row(n)


def stirling_second_row(n: int) -> tuple:
    """Return ``(S(n,0), ..., S(n,n))``."""
    _check_int("n", n)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return _SECOND.row(n)


def _check_pair(n, j):
    _check_int("n", n)
    _check_int("j", j)
    if n < 0 or j < 0 or j > n:
        raise DomainError(f"need 0 <= j <= n, got n={n}, j={j}")


def stirling_first(n: int, j: int) -> int:
    """Unsigned Stirling number of the first kind (permutations of n with j cycles).

    >>> stirling_first(4, 2)
    11
    """
    _check_pair(n, j)
    return _FIRST.row(n)[j]


@lru_cache(maxsize=4096)
def _second_explicit(n: int, k: int) -> int:
    # inclusion-exclusion, used past the dense rows
    total = sum((-1) ** (k - i) * math.comb(k, i) * i**n for i in range(k + 1))
    return total // math.factorial(k)


def stirling_second(n: int, j: int) -> int:
    """Stirling number of the second kind (partitions of n items into j blocks).

    >>> stirling_second(4, 2)
    7
    """
    _check_pair(n, j)
    if n <= DENSE_ROWS:
        return _SECOND.row(n)[j]
    _check_cap(n)
    return _second_explicit(n, j)


@lru_cache(maxsize=16)
def stirling_first_prefix(n: int, jmax: int) -> tuple:
    """Return ``(s(n,0), ..., s(n,jmax))`` by a column-limited sweep.

    Costs O(n * jmax) big-integer operations and never builds the full row,
    which makes point masses of ``Lah(n, k)`` near the lower end of the
    support reachable for n far beyond ``MAX_N``.
    """
    _check_int("n", n)
    _check_int("jmax", jmax)
    if n < 0 or jmax < 0:
        raise DomainError("n and jmax must be nonnegative")
    if n * (jmax + 1) > 50_000_000:
        raise ResourceError(f"prefix sweep n={n}, jmax={jmax} is too large")
    if n <= DENSE_ROWS:
        row = _FIRST.row(n)
        return tuple(row[j] if j <= n else 0 for j in range(jmax + 1))
    cur = [1] + [0] * jmax
    for m in range(n):
        nxt = [m * cur[0]]
        nxt.extend(m * cur[j] + cur[j - 1] for j in range(1, jmax + 1))
        cur = nxt
    return tuple(cur)


def factorial(n: int) -> int:
    """``n!`` with a domain check."""
    _check_int("n", n)
    if n < 0:
        raise DomainError(f"factorial of negative {n}")
    return math.factorial(n)


def binomial(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n`` (n >= 0)."""
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


def rising_factorial(x, n: int):
    """``x (x+1) ... (x+n-1)`` evaluated exactly for int or Fraction ``x``."""
    out = Fraction(1) if isinstance(x, Fraction) else 1
    for i in range(n):
        out *= x + i
    return out


def lah_number(n: int, k: int) -> int:
    """Lah number ``L(n,k) = (n!/k!) binom(n-1, k-1)``.

    For moderate ``n`` and when assertions are enabled, the closed form is
    compared against ``sum_j s(n,j) S(j,k)``.

    >>> lah_number(4, 2)
    36
    """
    _check_int("n", n)
    _check_int("k", k)
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")
    value = math.factorial(n) // math.factorial(k) * math.comb(n - 1, k - 1)
    if __debug__ and n <= 64:
        row = stirling_first_row(n)
        assert value == sum(row[j] * stirling_second(j, k) for j in range(k, n + 1))
    return value


@lru_cache(maxsize=1024)
def harmonic(n: int, m: int = 1) -> Fraction:
    """Generalized harmonic number ``H_n^{(m)} = sum_{l<=n} l^{-m}``.

    >>> harmonic(3, 2)
    Fraction(49, 36)
    """
    _check_int("n", n)
    _check_int("m", m)
    if m < 1:
        raise DomainError(f"harmonic order m must be >= 1, got {m}")
    if n < 0:
        raise DomainError(f"harmonic index n must be >= 0, got {n}")
    if n == 0:
        return Fraction(0)
    # common denominator summation beats repeated Fraction normalization
    den = 1
    for ell in range(1, n + 1):
        den = den * ell**m // math.gcd(den, ell**m)
    return Fraction(sum(den // ell**m for ell in range(1, n + 1)), den)


def exact_str(x) -> str:
    """Serialize an exact integer or ratio as ``"p"`` or ``"p/q"``."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(int(x))
    raise TypeError(f"not an exact scalar: {x!r}")


def parse_exact(text: str):
    """Inverse of :func:`exact_str`; integers come back as ``int``."""
    value = Fraction(text.strip())
    return value.numerator if value.denominator == 1 else value


@dataclass(frozen=True)
class SeriesPoly:
    """Power series ``c_0 + c_1 x + ... + c_N x^N`` truncated at order ``N``.

    Coefficients are exact ``Fraction``.  All operations keep the truncation
    order of the operands (the smaller one for binary operations).
    """

    coeffs: tuple
    order: int

    def __post_init__(self):
        cs = tuple(Fraction(c) for c in self.coeffs[: self.order + 1])
        cs = cs + (Fraction(0),) * (self.order + 1 - len(cs))
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def constant(cls, c, order: int) -> "SeriesPoly":
        return cls((c,), order)

    @classmethod
    def log_one_minus_inv(cls, order: int) -> "SeriesPoly":
        """``log(1/(1-x)) = sum_{i>=1} x^i / i``."""
        return cls((0,) + tuple(Fraction(1, i) for i in range(1, order + 1)), order)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i <= self.order else Fraction(0)

    def _coerce(self, other):
        if isinstance(other, SeriesPoly):
            return other
        return SeriesPoly.constant(other, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        return SeriesPoly(tuple(self[i] + other[i] for i in range(n + 1)), n)

    __radd__ = __add__

    def __neg__(self):
        return SeriesPoly(tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SeriesPoly):
            c = Fraction(other)
            return SeriesPoly(tuple(c * a for a in self.coeffs), self.order)
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            if a[i]:
                ai = a[i]
                for j in range(n + 1 - i):
                    if b[j]:
                        out[i + j] += ai * b[j]
        return SeriesPoly(tuple(out), n)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise DomainError("negative series powers are not supported")
        result = SeriesPoly.constant(1, self.order)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def reflect(self) -> "SeriesPoly":
        """Composition with ``x -> -x``."""
        return SeriesPoly(tuple(c if i % 2 == 0 else -c for i, c in enumerate(self.coeffs)), self.order)

    def exp(self) -> "SeriesPoly":
        """``exp(f)`` for a series with zero constant term."""
        if self.coeffs[0] != 0:
            raise DomainError("exp needs a zero constant term for exact coefficients")
        g = self.coeffs
        f = [Fraction(1)]
        for m in range(1, self.order + 1):
            f.append(sum(i * g[i] * f[m - i] for i in range(1, m + 1)) / m)
        return SeriesPoly(tuple(f), self.order)


def series_coefficient(k: int, t, n: int) -> Fraction:
    """``[x^n] ((1-x)^{-t} - 1)^k`` by exact truncated series arithmetic.

    ``(1-x)^{-t}`` is built as ``exp(t log(1/(1-x)))``.  Returns 0 when
    ``n < k`` since the series starts at ``x^k``.
    """
    _check_int("k", k)
    _check_int("n", n)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if n < k:
        return Fraction(0)
    t = Fraction(t)
    base = (SeriesPoly.log_one_minus_inv(n) * t).exp() - 1
    return (base**k)[n]

