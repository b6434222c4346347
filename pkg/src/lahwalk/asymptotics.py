"""Limit laws, rate functions and the special functions they need.

Floats throughout; exact finite-n oracles come from :mod:`lahwalk.lahdist`.
Every root solve is bracketed (``scipy.optimize.brentq``) and the Lambert W
function is evaluated by our own Halley iteration.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

import mpmath
import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import loggamma

from . import bigcomb as bc
from . import lahdist
from .errors import DomainError, NumericalError

__all__ = [
    "RegimeParams",
    "SaddleRoot",
    "central_clt_params",
    "composition_cov",
    "conditional_gaussian_cov",
    "curve_csv",
    "exact_mean_variance",
    "expectation_asymptotic",
    "h",
    "h_inverse",
    "lambert_w",
    "ldp_constant_k",
    "ldp_explicit_limit",
    "ldp_point_ratio",
    "local_limit_density",
    "local_limit_sup_error",
    "log_h_inverse",
    "mod_poisson_psi",
    "mod_poisson_ratio",
    "phi_alpha",
    "phi_alpha_prime",
    "rate_function",
    "saddle_root",
    "sigma2_argmax",
    "stirling_log_asymptotic",
    "stirling_log_exact",
]

INV_E = math.exp(-1.0)
# 1/e = INV_E + INV_E_LO to about 35 digits
INV_E_LO = -1.2428753672788363e-17
# W around the branch point in p = +-sqrt(2 (1 + e x))
_BRANCH_SERIES = (
    -1.0, 1.0, -1 / 3, 11 / 72, -43 / 540, 769 / 17280, -221 / 8505,
    680863 / 43545600, -1963 / 204120, 226287557 / 37623398400,
)
SMALL_ALPHA = 0.01
LARGE_ALPHA = 0.99


@dataclass(frozen=True)
class RegimeParams:
    """Asymptotic parameters; ``regime`` is constant-k, intermediate or central."""

    alpha: float | None = None
    beta: float | None = None
    delta: float | None = None
    rho: float | None = None
    t: float | None = None
    x: float | None = None
    c: float | None = None
    regime: str = "central"

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "rho"):
            v = getattr(self, name)
            if v is not None and not 0 < v < 1:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        if self.regime == "central" and self.alpha is not None and self.beta is not None:
            if not self.alpha < self.beta:
                raise DomainError("central regime needs alpha < beta")
        if self.regime not in ("constant-k", "intermediate", "central"):
            raise DomainError(f"unknown regime {self.regime!r}")


@dataclass(frozen=True)
class SaddleRoot:
    """Root ``r(t)`` in ``(0,1)`` of the implicit cumulant equation."""

    t: float
    r: float
    alpha: float

    @property
    def residual(self) -> float:
        e = math.exp(self.t)
        return math.expm1((e + 1) * math.log1p(-self.r)) + self.r * (1 + self.alpha * e)


# ---------------------------------------------------------------- Lambert W


def lambert_w(branch: str, x: float) -> float:
    """Real Lambert W on branch ``"W0"`` or ``"Wm1"`` by Halley iteration."""
    x = float(x)
    if branch not in ("W0", "Wm1"):
        raise DomainError(f"unknown branch {branch!r}")
    lo = -INV_E
    if x < lo and x < lo * (1 + 4e-16):
        raise DomainError(f"{branch} undefined below -1/e, got {x}")
    if branch == "Wm1" and x >= 0:
        raise DomainError(f"Wm1 needs -1/e <= x < 0, got {x}")
    if x == 0.0:
        return 0.0
    # x + 1/e in two pieces: the first sum is exact near the branch point
    q = max(2.0 * math.e * ((x + INV_E) + INV_E_LO), 0.0)
    sign = 1.0 if branch == "W0" else -1.0
    if q < 1e-3:
        p = sign * math.sqrt(q)
        w = 0.0
        for c in reversed(_BRANCH_SERIES):
            w = w * p + c
        return w
    if branch == "W0":
        if x < 1.0:
            w = math.log1p(x) if x > -0.25 else -1 + sign * math.sqrt(q)
        else:
            lx = math.log(x)
            w = lx - math.log(lx) if lx > 1 else lx
    else:
        if x > -0.25:
            l1 = math.log(-x)
            l2 = math.log(-l1)
            w = l1 - l2 + l2 / l1
        else:
            w = -1 - math.sqrt(q)
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1
        step = f / (ew * wp1 - (w + 2) * f / (2 * wp1))
        w -= step
        if abs(step) <= 4e-16 * max(1.0, abs(w)):
            break
    return w


# ------------------------------------------------------------------- h, h^-1


def h(x: float) -> float:
    """``h(x) = -x log x / (1 - x)`` with ``h(1) = 1``."""
    if x <= 0:
        raise DomainError(f"h needs x > 0, got {x}")
    if x == 1:
        return 1.0
    u = x - 1.0
    return x * math.log1p(u) / u


def _h_prime(x: float) -> float:
    u = x - 1.0
    if abs(u) < 1e-5:
        return 0.5 - u / 6
    return (u - math.log1p(u)) / (u * u)


def _small_v(z: float) -> float:
    """Small root ``v < 1`` of ``v e^{-v} = z e^{-z}`` for large ``z``, in log space."""
    logv = math.log(z) - z
    for _ in range(60):
        new = math.log(z) - z + math.exp(logv)
        if abs(new - logv) <= 1e-16 * abs(new):
            return new
        logv = new
    return logv


def log_h_inverse(z: float) -> float:
    """``log h^{-1}(z)``, finite even when ``h^{-1}(z)`` overflows."""
    if z <= 0:
        raise DomainError(f"h_inverse needs z > 0, got {z}")
    if z > 30:
        return math.log(z) - _small_v(z)
    return math.log(h_inverse(z))


def h_inverse(z: float) -> float:
    """Inverse of :func:`h`, via Lambert W then a bracketed Newton polish."""
    if z <= 0:
        raise DomainError(f"h_inverse needs z > 0, got {z}")
    if z == 1:
        return 1.0
    if z > 30:
        return math.exp(log_h_inverse(z))
    arg = -z * math.exp(-z)
    if z > 1:
        x = -z / lambert_w("W0", arg)
        lo, hi = 1.0, math.inf
    else:
        x = -z / lambert_w("Wm1", arg)
        lo, hi = 0.0, 1.0
    for _ in range(4):
        f = h(x) - z
        step = f / _h_prime(x)
        nxt = x - step
        if not lo < nxt < hi:
            break
        x = nxt
        if abs(step) <= 1e-16 * x:
            break
    return x


# --------------------------------------------------------- phi_alpha and I


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _implicit(r: float, e: float, alpha: float) -> float:
    # (1-r)^{e+1} - 1 + r(1 + alpha e), rewritten to avoid cancellation
    if r >= 1.0:
        return alpha * e
    return (1 - r) * math.expm1(e * math.log1p(-r)) + alpha * e * r


def saddle_root(alpha: float, t: float) -> SaddleRoot:
    """Nonzero root ``r(t) in (0,1)``; bracketed by ``F(0+) < 0 < F(1)``."""
    _check_alpha(alpha)
    e = math.exp(t)
    # keep e*lo a normal float so F(lo) ~ -(1-alpha) e lo is resolved
    lo = 1e-300 if e >= 1 else 1e-250 / e
    if not _implicit(lo, e, alpha) < 0 < _implicit(1.0, e, alpha):
        raise NumericalError(f"implicit equation not bracketed at alpha={alpha}, t={t}")
    r = brentq(_implicit, lo, 1.0, args=(e, alpha), xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return SaddleRoot(t, r, alpha)


def phi_alpha(alpha: float, t: float) -> float:
    """Limiting cumulant function ``lim (1/n) log E exp(t Lah(n, alpha n))``."""
    r = saddle_root(alpha, t).r
    e = math.exp(t)
    return (
        2 * alpha * math.log(alpha)
        + (1 - alpha) * math.log1p(-alpha)
        + (alpha - 1) * math.log(r)
        + alpha * t
        - alpha * (e + 1) * math.log1p(-r)
    )


def phi_alpha_prime(alpha: float, t: float) -> float:
    """Derivative of :func:`phi_alpha` by implicit differentiation of ``r(t)``."""
    r = saddle_root(alpha, t).r
    e = math.exp(t)
    lg = math.log1p(-r)
    pow_e = math.exp(e * lg)
    f_r = -math.expm1(e * lg) + alpha * e - e * pow_e
    f_t = e * (1 - r) * pow_e * lg + alpha * e * r
    dr = -f_t / f_r
    return (alpha - 1) * dr / r + alpha - alpha * e * lg + alpha * (e + 1) * dr / (1 - r)


def _entropy(alpha: float) -> float:
    return -alpha * math.log(alpha) - (1 - alpha) * math.log1p(-alpha)


def _rate_closed(alpha: float, beta: float) -> float:
    if beta == alpha:
        ha = h_inverse(alpha)
        return math.log1p(-ha) - alpha * math.log(-math.log(ha)) + _entropy(alpha)
    if beta == 1:
        lb = log_h_inverse(1 / alpha)
        return -alpha * (lb + math.log(-math.expm1(-lb))) + math.log(lb) + _entropy(alpha)
    lb = log_h_inverse(beta / alpha)
    ha = h_inverse(beta)
    return (
        -alpha * (lb + math.log(-math.expm1(-lb)))
        + math.log1p(-ha)
        + beta * math.log(-lb / math.log(ha))
        + _entropy(alpha)
    )


def _rate_legendre(alpha: float, beta: float) -> float:
    lo, hi = -40.0, 40.0
    f = lambda t: phi_alpha_prime(alpha, t) - beta  # noqa: E731
    while f(lo) > 0:
        lo *= 2
        if lo < -1e4:
            raise NumericalError("Legendre search window exhausted on the left")
    while f(hi) < 0:
        hi *= 2
        if hi > 320:
            raise NumericalError("Legendre search window exhausted on the right")
    t = brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return beta * t - phi_alpha(alpha, t)


def rate_function(alpha: float, beta: float, method: str = "closed") -> float:
    """Large deviation rate ``I_alpha(beta)`` of ``Lah(n, alpha n)/n``.

    ``closed`` uses the explicit formula in terms of ``h^{-1}``; ``legendre``
    maximizes the concave map ``t -> beta t - phi_alpha(t)`` by solving
    ``phi_alpha'(t) = beta`` on an expanding bracket.  Outside
    ``[alpha, 1]`` the rate is ``+inf``.
    """
    _check_alpha(alpha)
    if beta < alpha or beta > 1:
        return math.inf
    if method == "closed":
        return _rate_closed(alpha, beta)
    if method == "legendre":
        if beta in (alpha, 1.0):
            raise DomainError("the Legendre route is only defined inside (alpha, 1)")
        return _rate_legendre(alpha, beta)
    raise DomainError(f"unknown method {method!r}")


def rate_derivative(alpha: float, beta: float) -> float:
    """``dI/dbeta = log(-log h^{-1}(beta/alpha) / log h^{-1}(beta))``."""
    return math.log(-log_h_inverse(beta / alpha) / math.log(h_inverse(beta)))


def central_clt_params(alpha: float) -> tuple[float, float]:
    """Drift ``h(alpha)`` and variance ``sigma^2(alpha)`` of the central CLT."""
    _check_alpha(alpha)
    la = math.log(alpha)
    q = 1 - alpha
    var = -(alpha / q + alpha * (alpha + 1) * la / q**2 + alpha**2 * la**2 / q**3)
    return h(alpha), var


def sigma2_argmax() -> float:
    """Location of the maximum of ``sigma^2`` on ``(0, 1)``."""
    res = minimize_scalar(
        lambda a: -central_clt_params(a)[1], bounds=(0.01, 0.99), method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x)


def stirling_log_asymptotic(kind: str, alpha: float) -> float:
    """Limit of ``(1/n) log((k!/n!) s(n,k))`` (first) or ``... S(n,k)`` (second)."""
    _check_alpha(alpha)
    if kind == "first":
        ha = h_inverse(alpha)
        return -math.log1p(-ha) + alpha * math.log(-math.log(ha))
    if kind == "second":
        lb = log_h_inverse(1 / alpha)
        return alpha * (lb + math.log(-math.expm1(-lb))) - math.log(lb)
    raise DomainError(f"kind must be 'first' or 'second', got {kind!r}")


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def stirling_log_exact(kind: str, n: int, k: int) -> float:
    """Exact finite-n counterpart of :func:`stirling_log_asymptotic`."""
    num = bc.stirling_first(n, k) if kind == "first" else bc.stirling_second(n, k)
    return _log_fraction(Fraction(math.factorial(k) * num, math.factorial(n))) / n


def ldp_explicit_limit(alpha: float, beta: float) -> float:
    """``lim (1/n) log P[Lah = beta n]`` assembled from the Stirling limits."""
    first = stirling_log_asymptotic("first", beta)
    second = beta * stirling_log_asymptotic("second", alpha / beta)
    return -_entropy(alpha) + first + second


# ------------------------------------------------------- constant-k regime


def mod_poisson_psi(k: int, z: complex) -> complex:
    """Mod-Poisson limit ``Gamma(k) / Gamma(k e^z)`` on ``cos(Im z) > 0``."""
    z = complex(z)
    if math.cos(z.imag) <= 0:
        raise DomainError(f"z={z} outside the domain cos(Im z) > 0")
    return complex(np.exp(loggamma(k) - loggamma(k * np.exp(z))))


def mod_poisson_ratio(n: int, k: int, z: float) -> float:
    """Finite-n ratio ``E e^{z Lah(n,k)} / exp(k log n (e^z - 1))``."""
    with mpmath.workdps(40):
        num = lahdist.laplace_mp(n, k, z)
        den = mpmath.exp(k * mpmath.log(n) * (mpmath.exp(z) - 1))
        return float(num / den)


def local_limit_density(n: int, k: int, m: float, centering: str = "asymptotic") -> float:
    """Gaussian approximation to ``P[Lah(n,k) = m]``."""
    if not n > k:
        raise DomainError("local limit needs n > k")
    if centering == "asymptotic":
        mu = var = k * math.log(n)
    elif centering == "exact":
        mu, var = exact_mean_variance(n, k)
    else:
        raise DomainError(f"unknown centering {centering!r}")
    return math.exp(-((m - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


@lru_cache(maxsize=64)
def exact_mean_variance(n: int, k: int) -> tuple[float, float]:
    """Mean and variance of ``Lah(n, k)`` as floats.

    Exact rationals up to the pmf-table cap; beyond it, 50-digit sums over a
    pmf prefix long enough that the neglected tail is below ``1e-40``.
    """
    if n <= lahdist.TABLE_MAX_N:
        return float(lahdist.expectation(n, k)), float(lahdist.variance(n, k))
    return _prefix_mean_variance(n, k)


def _prefix_mean_variance(n: int, k: int) -> tuple[float, float]:
    lam = k * math.log(n)
    jmax = int(lam + 12 * math.sqrt(lam)) + 2 * k + 40
    while True:
        masses = lahdist.pmf_prefix_mp(n, k, jmax)
        if jmax >= n or masses[-1] < mpmath.mpf(10) ** -40:
            break
        jmax *= 2
    with mpmath.workdps(50):
        m1 = mpmath.fsum(j * m for j, m in enumerate(masses))
        m2 = mpmath.fsum(j * j * m for j, m in enumerate(masses))
        return float(m1), float(m2 - m1 * m1)


def local_limit_sup_error(n: int, k: int, centering: str = "exact") -> float:
    """``sup_m |pmf(m) - density(m)|`` over the support."""
    table = lahdist.pmf_table(n, k)
    if centering == "exact":
        mu, var = exact_mean_variance(n, k)
    else:
        mu = var = k * math.log(n)
    best = 0.0
    for j, m in table.items():
        dens = math.exp(-((j - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
        best = max(best, abs(float(m) - dens))
    return best


def ldp_constant_k(n: int, k: int, x: float, tail: str = "point") -> float:
    """Precise large-deviation asymptotics for fixed ``k``.

    ``point`` approximates ``P[Lah = k x log n]``; ``upper`` approximates
    ``P[Lah >= k x log n]`` (needs ``x > 1``) and ``lower`` approximates
    ``P[Lah <= k x log n]`` (needs ``x < 1``).
    """
    if x <= 0:
        raise DomainError(f"x must be positive, got {x}")
    ln = math.log(n)
    expo = -k * (x * math.log(x) - x + 1) * ln
    val = math.exp(expo + loggamma(k).real - loggamma(k * x).real) / math.sqrt(2 * math.pi * k * x * ln)
    if tail == "point":
        return val
    if tail == "upper":
        if x <= 1:
            raise DomainError("upper tail needs x > 1")
        return val * x / (x - 1)
    if tail == "lower":
        if x >= 1:
            raise DomainError("lower tail needs x < 1")
        return val / (1 - x)
    raise DomainError(f"unknown tail {tail!r}")


def ldp_point_ratio(n: int, k: int, x: float) -> tuple[int, float]:
    """Exact ``P[Lah = j]`` over the point asymptotic at the nearest lattice site.

    ``j = round(k x log n)`` and the formula is evaluated at
    ``x_n = j / (k log n)``.
    """
    j = round(k * x * math.log(n))
    xn = j / (k * math.log(n))
    exact = lahdist.pmf(n, k, j)
    return j, float(exact) / ldp_constant_k(n, k, xn, "point")


def expectation_asymptotic(n: int, k: int, regime: str | None = None) -> float:
    """Leading-order ``E Lah(n, k)``.

    Regime by ``alpha = k/n``: constant-k below 0.01 (``k log(n/k)``), central
    up to 0.99 (``n h(alpha)``), and ``n`` above.  Pass ``regime`` to force one.
    """
    if not 1 <= k <= n:
        raise DomainError("need 1 <= k <= n")
    a = k / n
    if regime is None:
        regime = "constant-k" if a < SMALL_ALPHA else ("central" if a < LARGE_ALPHA else "full")
    if regime in ("constant-k", "intermediate"):
        return k * math.log(n / k)
    if regime == "central":
        return n * h(a)
    if regime == "full":
        return float(n)
    raise DomainError(f"unknown regime {regime!r}")


# ------------------------------------------------- composition covariance


def composition_cov(alpha: float, M: int) -> np.ndarray:
    """Limit covariance of ``(N_j - E N_j)/sqrt(k)``, ``j = 1..M``."""
    _check_alpha(alpha)
    if M < 1:
        raise DomainError("M must be >= 1")
    j = np.arange(1, M + 1, dtype=float)
    p = alpha * (1 - alpha) ** (j - 1)
    a = alpha * j - 1
    return np.diag(p) - np.outer(p, p) - np.outer(p * a, p * a) / (1 - alpha)


def conditional_gaussian_cov(alpha: float, M: int, tail: int = 600) -> np.ndarray:
    """Independent-Gaussian model conditioned on ``sum G_j = 0`` and ``sum j G_j = 0``.

    ``G_j`` has variance ``p_j``; the conditional covariance is the Schur
    complement, computed on a truncation of ``tail`` coordinates and cut to
    the leading ``M x M`` block.
    """
    _check_alpha(alpha)
    j = np.arange(1, tail + 1, dtype=float)
    p = alpha * (1 - alpha) ** (j - 1)
    A = np.vstack([np.ones_like(j), j])
    S = np.diag(p)
    SA = S @ A.T
    cond = S - SA @ np.linalg.solve(A @ SA, SA.T)
    return cond[:M, :M]


def curve_csv(fn: Callable[[float], float], grid: Iterable[float], names=("x", "value")) -> str:
    """Tabulate ``fn`` on ``grid`` as CSV."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(names))
    for x in grid:
        w.writerow([repr(float(x)), repr(float(fn(x)))])
    return buf.getvalue()
