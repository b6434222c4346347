"""Exact Lah distribution.

``Lah(n, k)`` lives on ``{k, ..., n}`` with mass ``s(n,j) S(j,k) / L(n,k)``.
Everything here is exact (``Fraction``) unless a function name says
otherwise (``*_mp`` helpers return mpmath numbers, ``*_float`` return floats).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from . import bigcomb as bc
from .errors import DomainError, NumericalError, ResourceError

__all__ = [
    "LahParams",
    "LahPmfTable",
    "cdf",
    "check_log_concavity",
    "conic_face_volume_sum",
    "expectation",
    "expectation_float",
    "factorial_moment",
    "second_factorial_moment_closed",
    "gen_poly_eval",
    "laplace_mp",
    "mode",
    "parity_mass",
    "pmf",
    "pmf_prefix_mp",
    "pmf_table",
    "poly_zeros",
    "variance",
]

# 50-digit Euler-Mascheroni constant
EULER_GAMMA_50 = "0.57721566490153286060651209008240243104215933593992"

TABLE_MAX_N = 2000
CONIC_MAX_N = 14
ZEROS_MAX_N = 300


@dataclass(frozen=True)
class LahParams:
    """Validated pair ``(n, k)`` with ``1 <= k <= n``."""

    n: int
    k: int

    def __post_init__(self):
        for name in ("n", "k"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise DomainError(f"{name} must be an integer, got {v!r}")
        if not 1 <= self.k <= self.n:
            raise DomainError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")

    @property
    def support(self) -> range:
        return range(self.k, self.n + 1)


def _params(n, k) -> LahParams:
    return n if isinstance(n, LahParams) else LahParams(n, k)


@lru_cache(maxsize=256)
def _weights(n: int, k: int) -> tuple:
    """Integer weights ``s(n,j) S(j,k)`` for ``j = k..n``."""
    if n > TABLE_MAX_N:
        raise ResourceError(f"full pmf table capped at n <= {TABLE_MAX_N}, got n={n}")
    row = bc.stirling_first_row(n)
    return tuple(row[j] * bc.stirling_second(j, k) for j in range(k, n + 1))


@dataclass(frozen=True)
class LahPmfTable:
    """All masses of ``Lah(n, k)``; ``masses[i]`` is the mass at ``j = k + i``."""

    params: LahParams
    masses: tuple

    def __getitem__(self, j: int) -> Fraction:
        i = j - self.params.k
        return self.masses[i] if 0 <= i < len(self.masses) else Fraction(0)

    def items(self):
        return zip(self.params.support, self.masses)

    def floats(self) -> list[float]:
        return [float(m) for m in self.masses]

    def rows(self) -> list[dict]:
        return [
            {"j": j, "mass_p": m.numerator, "mass_q": m.denominator, "mass_float": float(m)}
            for j, m in self.items()
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["j", "mass_p", "mass_q", "mass_float"], lineterminator="\n")
        w.writeheader()
        for r in self.rows():
            w.writerow({**r, "mass_float": repr(r["mass_float"])})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.params.n, "k": self.params.k,
             "masses": {str(j): bc.exact_str(m) for j, m in self.items()}},
            indent=2,
        )


@lru_cache(maxsize=256)
def _table(n: int, k: int) -> LahPmfTable:
    w = _weights(n, k)
    total = bc.lah_number(n, k)
    return LahPmfTable(LahParams(n, k), tuple(Fraction(x, total) for x in w))


def pmf_table(n, k=None) -> LahPmfTable:
    """Full exact pmf table of ``Lah(n, k)``."""
    p = _params(n, k)
    return _table(p.n, p.k)


def pmf(n, k, j: int) -> Fraction:
    """Exact mass ``P[Lah(n,k) = j]``; zero outside the support.

    Up to ``TABLE_MAX_N`` the full table is used.  Beyond it a single mass is
    computed from a column-limited Stirling sweep, which is affordable when
    ``j`` is small.
    """
    p = _params(n, k)
    if not p.k <= j <= p.n:
        return Fraction(0)
    if p.n <= TABLE_MAX_N:
        return _table(p.n, p.k)[j]
    s = bc.stirling_first_prefix(p.n, j)[j]
    big_s = bc.stirling_second(j, p.k)
    total = math.factorial(p.n) // math.factorial(p.k) * math.comb(p.n - 1, p.k - 1)
    return Fraction(s * big_s, total)


def cdf(n, k, j: int) -> Fraction:
    """Exact ``P[Lah(n,k) <= j]``."""
    p = _params(n, k)
    if j < p.k:
        return Fraction(0)
    if j >= p.n:
        return Fraction(1)
    t = _table(p.n, p.k)
    return sum(t.masses[: j - p.k + 1], Fraction(0))


def parity_mass(n, k, top: int) -> Fraction:
    """Exact ``P[Lah(n,k) in {top, top-2, top-4, ...}]``."""
    p = _params(n, k)
    if top < p.k:
        return Fraction(0)
    w = _weights(p.n, p.k)
    hi = min(top, p.n)
    if (top - hi) % 2:
        hi -= 1
    num = sum(w[j - p.k] for j in range(hi, p.k - 1, -2))
    return Fraction(num, bc.lah_number(p.n, p.k))


def gen_poly_eval(n, k, t, method: str = "pmf-sum") -> Fraction:
    """``P_{n,k}(t) = E t^{Lah(n,k)}`` for rational ``t``.

    ``pmf-sum`` sums the exact masses, ``coeff`` extracts
    ``[x^n]((1-x)^{-t} - 1)^k`` from truncated series and ``gamma-sum``
    expands the alternating binomial sum of rising factorials.  All three give
    the same rational.
    """
    p = _params(n, k)
    t = Fraction(t)
    b = math.comb(p.n - 1, p.k - 1)
    if method == "pmf-sum":
        w = _weights(p.n, p.k)
        num = sum((wj * t ** (p.k + i) for i, wj in enumerate(w)), Fraction(0))
        return num / bc.lah_number(p.n, p.k)
    if method == "coeff":
        return bc.series_coefficient(p.k, t, p.n) / b
    if method == "gamma-sum":
        nf = math.factorial(p.n)
        acc = Fraction(0)
        for m in range(1, p.k + 1):
            term = math.comb(p.k, m) * bc.rising_factorial(t * m, p.n)
            acc += term if (p.k - m) % 2 == 0 else -term
        return acc / (nf * b)
    raise DomainError(f"unknown method {method!r}; use pmf-sum, coeff or gamma-sum")


def _expectation_sums(n: int, k: int) -> tuple[Fraction, Fraction]:
    pre = Fraction(math.factorial(n), math.factorial(k - 1))
    top = n - k + 1
    den = math.lcm(*range(1, top + 1))
    pos = sum(math.comb(n - i, k - 1) * (den // i) for i in range(1, top + 1))
    alt = sum((-1) ** (i + 1) * math.comb(n, k + i - 1) * (den // i) for i in range(1, top + 1))
    return pre * Fraction(pos, den), pre * Fraction(alt, den)


def expectation(n, k=None) -> Fraction:
    """Exact ``E Lah(n,k)`` from the two binomial sums (checked against each other).

    When the pmf table is affordable the result is also checked against
    ``sum_j j pmf(j)``.
    """
    p = _params(n, k)
    a, b = _expectation_sums(p.n, p.k)
    if a != b:
        raise NumericalError(f"expectation sums disagree at {p}")
    value = a / bc.lah_number(p.n, p.k)
    if p.n <= 400:
        direct = sum((j * m for j, m in _table(p.n, p.k).items()), Fraction(0))
        if direct != value:
            raise NumericalError(f"expectation disagrees with the pmf at {p}")
    return value


def expectation_float(n: int, k: int) -> float:
    """Float evaluation of the positive binomial sum for very large ``n``.

    Uses ``E = k sum_i (1/i) binom(n-i,k-1)/binom(n-1,k-1)`` with the binomial
    ratio built as a running product, so n of order 1e7 is cheap.
    """
    import numpy as np

    p = _params(n, k)
    i = np.arange(1, p.n - p.k + 2, dtype=float)
    # ratio_i = prod_{m=1}^{i-1} (n-k-m+1)/(n-m)
    steps = (p.n - p.k - i[:-1] + 1) / (p.n - i[:-1])
    ratio = np.concatenate(([1.0], np.cumprod(steps)))
    return float(p.k * np.sum(ratio / i))


def factorial_moment(n, k, m: int) -> Fraction:
    """Exact ``E[X(X-1)...(X-m+1)]`` for ``X ~ Lah(n,k)`` from the double sum."""
    p = _params(n, k)
    if m < 1:
        raise DomainError(f"moment order must be >= 1, got {m}")
    if m > p.n:
        return Fraction(0)
    nn, kk = p.n, p.k
    inner_cache = {}
    total = Fraction(0)
    for i in range(1, nn - kk + 2):
        c = math.comb(nn - i, kk - 1)
        if not c:
            continue
        inner = Fraction(0)
        for q in range(1, min(kk, m) + 1):
            r = i + q - 1
            if r < m:
                continue
            key = (r, q)
            if key not in inner_cache:
                inner_cache[key] = Fraction(
                    bc.stirling_second(m, q) * bc.stirling_first(r, m),
                    math.factorial(kk - q) * math.factorial(r),
                )
            inner += inner_cache[key]
        total += c * inner
    total *= math.factorial(nn) * math.factorial(m)
    return total / bc.lah_number(nn, kk)


def second_factorial_moment_closed(n, k=None) -> Fraction:
    """Second factorial moment from the harmonic-number closed form."""
    p = _params(n, k)
    nn, kk = p.n, p.k
    acc = Fraction(0)
    h = Fraction(0)
    for i in range(1, nn - kk + 2):
        h += Fraction(1, i)
        acc += math.comb(nn - i, kk - 1) * (h * (1 + i * kk) / (i * (i + 1)) - Fraction(1, i * i))
    acc *= Fraction(2 * math.factorial(nn), math.factorial(kk - 1))
    return acc / bc.lah_number(nn, kk)


def variance(n, k=None) -> Fraction:
    """Exact variance ``E X(X-1) + E X - (E X)^2``."""
    p = _params(n, k)
    mean = expectation(p)
    second = factorial_moment(p, None, 2)
    if second != second_factorial_moment_closed(p):
        raise NumericalError(f"second factorial moment routes disagree at {p}")
    return second + mean - mean * mean


def _digamma_int(k: int) -> mpmath.mpf:
    with mpmath.workdps(50):
        h = bc.harmonic(k - 1, 1)
        return -mpmath.mpf(EULER_GAMMA_50) + mpmath.mpf(h.numerator) / h.denominator


def mode(n, k=None) -> tuple[list[int], tuple[int, int]]:
    """Exact set of maximizers and the predicted pair ``(floor x, ceil x)``.

    ``x = k log n - k psi(k) - 1/2`` with ``psi(k) = -gamma + H_{k-1}``.
    """
    p = _params(n, k)
    w = _weights(p.n, p.k)
    top = max(w)
    argmax = [p.k + i for i, x in enumerate(w) if x == top]
    with mpmath.workdps(50):
        x = p.k * mpmath.log(p.n) - p.k * _digamma_int(p.k) - mpmath.mpf(1) / 2
        pair = (int(mpmath.floor(x)), int(mpmath.ceil(x)))
    return argmax, pair


def check_log_concavity(n, k=None) -> tuple[bool, int | None]:
    """Exact scan of ``pmf(i)^2 >= pmf(i-1) pmf(i+1)``; returns the first failure."""
    p = _params(n, k)
    w = _weights(p.n, p.k)
    for i in range(1, len(w) - 1):
        if w[i] * w[i] < w[i - 1] * w[i + 1]:
            return False, p.k + i
    return True, None


def is_unimodal(n, k=None) -> bool:
    """Nondecreasing then nonincreasing masses."""
    p = _params(n, k)
    w = _weights(p.n, p.k)
    i = 0
    while i + 1 < len(w) and w[i + 1] >= w[i]:
        i += 1
    return all(w[m + 1] <= w[m] for m in range(i, len(w) - 1))


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def conic_face_volume_sum(n: int, k: int, j: int) -> Fraction:
    """Brute-force sum over compositions of the convolved cycle laws.

    For each composition ``(i_1, ..., i_k)`` of ``n`` the per-block
    polynomials ``sum_j s(i,j)/i! t^j`` are multiplied and the ``t^j``
    coefficients are summed over all compositions.
    """
    p = _params(n, k)
    if p.n > CONIC_MAX_N:
        raise ResourceError(f"composition enumeration capped at n <= {CONIC_MAX_N}")
    if not p.k <= j <= p.n:
        raise DomainError(f"need k <= j <= n, got j={j}")
    blocks = {
        i: [Fraction(c, math.factorial(i)) for c in bc.stirling_first_row(i)]
        for i in range(1, p.n - p.k + 2)
    }
    total = Fraction(0)
    for cuts in itertools.combinations(range(1, p.n), p.k - 1):
        edges = (0,) + cuts + (p.n,)
        poly = [Fraction(1)]
        for a, b in zip(edges, edges[1:]):
            poly = _poly_mul(poly, blocks[b - a])
        total += poly[j] if j < len(poly) else 0
    return total


def poly_zeros(n, k=None, precision_bits: int = 53, max_iter: int = 1000) -> list[complex]:
    """Nonzero complex roots of ``P_{n,k}`` by Aberth iteration in mpmath.

    ``P_{n,k}(t) = t^k Q(t)`` with ``deg Q = n - k``; the roots of ``Q`` are
    returned as Python complex numbers sorted by real part, with imaginary
    parts below the output precision set to zero.  The iteration
    runs at four times the requested precision, plus the dynamic range of the
    coefficients in bits (the integer roots make ``Q`` as ill-conditioned as
    a Wilkinson polynomial), on coefficients normalized by their largest
    magnitude.  Every root is then validated by a relative residual test and
    the integer roots ``-1, ..., -floor((n-1)/k)`` are checked to appear.
    """
    p = _params(n, k)
    if p.n > ZEROS_MAX_N:
        raise ResourceError(f"poly_zeros capped at n <= {ZEROS_MAX_N}")
    deg = p.n - p.k
    if deg == 0:
        return []
    w = _weights(p.n, p.k)
    spread = max(w).bit_length() - min(w).bit_length()
    work_bits = 4 * precision_bits + spread
    with mpmath.workprec(work_bits):
        scale = max(w)
        # coefficients of Q, highest degree first, normalized
        coeffs = [mpmath.mpf(x) / scale for x in reversed(w)]
        roots = _aberth(coeffs, _rising_factorial_start(p.n, p.k), work_bits, precision_bits, max_iter)
        tol = mpmath.mpf(2) ** (-precision_bits // 2)
        for z in roots:
            val = mpmath.polyval(coeffs, z)
            size = mpmath.polyval([abs(c) for c in coeffs], abs(z))
            if abs(val) > tol * size:
                raise NumericalError(f"root {z} failed the residual check", partial=roots)
        out = []
        for z in roots:
            # imaginary parts below the output precision are rounding residue
            if abs(z.imag) <= abs(z) * mpmath.mpf(2) ** -precision_bits:
                z = mpmath.mpc(z.real, 0)
            out.append(complex(z))
        out.sort(key=lambda c: (c.real, c.imag))
    for z in range(1, (p.n - 1) // p.k + 1):
        if min(abs(r + z) for r in out) > 1e-6 * z:
            raise NumericalError(f"integer root {-z} not found", partial=out)
    return out


def _rising_factorial_start(n: int, k: int) -> list[complex]:
    """Aberth starting points ``-i/k`` for ``i = k..n-1``, nudged off the axis.

    For large ``|t|`` the polynomial is dominated by the rising factorial
    ``(kt)(kt+1)...(kt+n-1)``, whose nonzero roots are ``-i/k``; there are
    exactly ``n - k`` of them from ``i = k`` on.
    """
    return [complex(-i / k, 1.0 if i % 2 else -1.0) for i in range(k, n)]


def _aberth(coeffs: list, start: list, work_bits: int, out_bits: int, max_iter: int) -> list:
    deg = len(coeffs) - 1
    lead = coeffs[0]
    monic = [c / lead for c in coeffs]
    z = [mpmath.mpc(c) for c in start]
    dmonic = [c * (deg - i) for i, c in enumerate(monic[:-1])]
    eps = mpmath.mpf(2) ** (-(out_bits + 8))
    done = [False] * deg
    for _ in range(max_iter):
        moved = False
        for i in range(deg):
            if done[i]:
                continue
            zi = z[i]
            pv = mpmath.polyval(monic, zi)
            dv = mpmath.polyval(dmonic, zi)
            if pv == 0:
                done[i] = True
                continue
            ratio = pv / dv
            s = mpmath.fsum(1 / (zi - z[j]) for j in range(deg) if j != i)
            step = ratio / (1 - ratio * s)
            z[i] = zi - step
            if abs(step) <= eps * max(abs(z[i]), 1):
                done[i] = True
            else:
                moved = True
        if not moved:
            return z
    raise NumericalError(f"Aberth iteration did not converge in {max_iter} sweeps", partial=z)


def laplace_mp(n: int, k: int, z, dps: int = 40):
    """``E exp(z Lah(n,k))`` in mpmath from the rising-factorial sum.

    Works for complex ``z`` and any ``n``; the alternating sum over ``m`` is
    evaluated with ``dps`` digits plus a guard proportional to ``k``.
    """
    p = _params(n, k)
    with mpmath.workdps(dps + p.k):
        t = mpmath.exp(z)
        acc = mpmath.mpf(0)
        for m in range(1, p.k + 1):
            term = mpmath.binomial(p.k, m) * mpmath.rf(t * m, p.n) / mpmath.factorial(p.n)
            acc += term if (p.k - m) % 2 == 0 else -term
        out = acc / mpmath.binomial(p.n - 1, p.k - 1)
    return +out


def pmf_prefix_mp(n: int, k: int, jmax: int, dps: int = 50) -> list:
    """Masses ``P[Lah(n,k) = j]`` for ``j <= jmax`` in mpmath, for huge ``n``.

    Uses ``s(n,j)/n! = (1/n) [t^{j-1}] exp(sum_r (-1)^{r+1} H_{n-1}^{(r)} t^r/r)``
    with ``H^{(r)}`` from digamma and Hurwitz zeta, so the cost does not
    depend on ``n``.  Index ``j`` of the returned list is the mass at ``j``.
    The coefficient recursion cancels about ``log10(1/c)`` digits on a
    coefficient of size ``c``, so the guard digits are raised until they
    cover the smallest coefficient met.
    """
    p = _params(n, k)
    jmax = min(jmax, p.n)
    guard = jmax + 10
    while True:
        with mpmath.workdps(dps + guard):
            cyc, lost = _cycle_prefix(p.n, jmax)
            if lost + 10 <= guard:
                scale = mpmath.factorial(p.k) / mpmath.binomial(p.n - 1, p.k - 1)
                out = [mpmath.mpf(0)] * (jmax + 1)
                for j in range(p.k, jmax + 1):
                    out[j] = cyc[j] * bc.stirling_second(j, p.k) * scale
                break
        guard = lost + 20
    with mpmath.workdps(dps):
        return [+x for x in out]


def _cycle_prefix(n: int, jmax: int) -> tuple[list, int]:
    """``s(n,j)/n!`` for ``j <= jmax`` and the digits the recursion may lose."""
    m1 = n - 1
    g = [mpmath.mpf(0)]
    for r in range(1, jmax):
        if m1 == 0:
            hr = mpmath.mpf(0)
        elif r == 1:
            hr = mpmath.digamma(n) + mpmath.euler
        else:
            hr = mpmath.zeta(r) - mpmath.zeta(r, n)
        g.append((-1) ** (r + 1) * hr / r)
    f = [mpmath.mpf(1)]
    for m in range(1, jmax):
        f.append(mpmath.fsum(i * g[i] * f[m - i] for i in range(1, m + 1)) / m)
    nonzero = [abs(c) for c in f if c != 0]
    lost = int(-mpmath.log10(min(nonzero))) + 1 if nonzero else 0
    return [mpmath.mpf(0)] + [c / n for c in f], max(lost, 0)
