"""Expected face numbers of random-walk hulls and neighborliness thresholds.

``C_{n,d}`` is the convex hull of ``S_0, ..., S_n`` (``n + 1`` points) of a
random walk in ``R^d`` with exchangeable increments in general position.  Its
expected number of ``(k-1)``-faces is

    E f_{k-1}(C_{n,d}) = 2 binom(n+1, k) P[Lah(n+1, k) in {d, d-2, ...}].
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from scipy.optimize import brentq
from scipy.stats import norm

from . import bigcomb as bc
from . import lahdist
from .asymptotics import h_inverse, lambert_w, log_h_inverse
from .errors import DomainError, NumericalError

__all__ = [
    "RHO_STAR",
    "FaceQuery",
    "ThresholdPoint",
    "check_monotonicity_conjecture",
    "constant_k_regime_report",
    "expected_faces",
    "face_ratio",
    "face_table_csv",
    "neighborliness_defect",
    "strong_threshold_rho",
    "strong_threshold_residual",
    "threshold_curve",
    "threshold_csv",
    "weak_threshold_rho",
]

RHO_STAR = 0.3798


@dataclass(frozen=True)
class FaceQuery:
    """``n`` steps (``n + 1`` points), ambient dimension ``d``, faces of dimension ``k - 1``."""

    n: int
    d: int
    k: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.d, int) and isinstance(self.k, int)):
            raise DomainError("n, d, k must be integers")
        if not self.n >= self.d >= self.k >= 1:
            raise DomainError(f"need n >= d >= k >= 1, got n={self.n}, d={self.d}, k={self.k}")


@dataclass(frozen=True)
class ThresholdPoint:
    delta: float
    rho_weak: float
    rho_strong: float


def _faces_direct(n: int, d: int, k: int) -> Fraction:
    row = bc.stirling_first_row(n + 1)
    total = 0
    for j in range(d, k - 1, -2):
        if j <= n + 1:
            total += row[j] * bc.stirling_second(j, k)
    return Fraction(2 * math.factorial(k - 1) * total, math.factorial(n))


def expected_faces(n: int, d: int, k: int) -> Fraction:
    """Exact ``E f_{k-1}(C_{n,d})``, computed by two routes that must agree."""
    q = FaceQuery(n, d, k)
    direct = _faces_direct(q.n, q.d, q.k)
    via_lah = 2 * math.comb(q.n + 1, q.k) * lahdist.parity_mass(q.n + 1, q.k, q.d)
    if direct != via_lah:
        raise NumericalError(f"face formula routes disagree at {q}")
    return direct


def face_ratio(npts: int, d: int, k: int) -> Fraction:
    """``E f_{k-1}(C_{npts-1,d}) / binom(npts, k)`` for a hull of ``npts`` points.

    With ``npts == k`` the hull is a ``(k-1)``-simplex and the ratio is 1 by
    convention (the raw parity formula would give 0 or 2 there).
    """
    if not 1 <= k <= d or npts < k:
        raise DomainError(f"need 1 <= k <= d and npts >= k, got npts={npts}, d={d}, k={k}")
    if npts == k:
        return Fraction(1)
    return 2 * lahdist.parity_mass(npts, k, d)


def neighborliness_defect(npts: int, d: int, k: int) -> Fraction:
    """``binom(npts, k) - E f_{k-1}(C_{npts-1,d})`` for a hull of ``npts`` points.

    Computed as ``2 binom(npts,k) P[Lah(npts,k) in {d+2, d+4, ...}]`` and,
    when ``npts - 1 >= d``, checked against the direct face formula.
    """
    if not 1 <= k <= d or npts < k:
        raise DomainError(f"need 1 <= k <= d and npts >= k, got npts={npts}, d={d}, k={k}")
    top = npts if (npts - d) % 2 == 0 else npts - 1
    upper = lahdist.parity_mass(npts, k, top) - lahdist.parity_mass(npts, k, d) if top > d else Fraction(0)
    defect = 2 * math.comb(npts, k) * upper
    if npts - 1 >= d:
        if defect + expected_faces(npts - 1, d, k) != math.comb(npts, k):
            raise NumericalError("defect and expected faces do not sum to binom(n, k)")
    return defect


# ------------------------------------------------------------- thresholds


def _check_delta(delta):
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def weak_threshold_rho(delta: float) -> float:
    """``rho_weak(delta) = h^{-1}(delta)/delta = -1/W_{-1}(-delta e^{-delta})``."""
    _check_delta(delta)
    return -1.0 / lambert_w("Wm1", -delta * math.exp(-delta))


def _strong_lhs(rho: float) -> float:
    lb = log_h_inverse(1.0 / rho)
    # log(h^{-1}(1/rho) - 1) without overflow
    return -rho * (lb + math.log(-math.expm1(-lb))) + math.log(lb)


def _strong_rhs(delta: float) -> float:
    hd = h_inverse(delta)
    return -math.log1p(-hd) / delta + math.log(-math.log(hd))


def strong_threshold_residual(rho: float, delta: float) -> float:
    """Left side minus right side of the implicit strong-threshold equation."""
    return _strong_lhs(rho) - _strong_rhs(delta)


def strong_threshold_rho(delta: float) -> float:
    """Root in ``(0, rho*)`` of the implicit strong-threshold equation.

    The bracket starts at ``[0.02, rho* + 0.01]``; the lower end halves and the
    upper end grows until a sign change is seen, so monotonicity of the two
    sides is never assumed.
    """
    _check_delta(delta)
    rhs = _strong_rhs(delta)
    f = lambda r: _strong_lhs(r) - rhs  # noqa: E731
    lo, hi = 0.02, RHO_STAR + 0.01
    while f(lo) <= 0 and lo > 1e-12:
        lo /= 2
    while f(hi) >= 0 and hi < 0.999:
        hi = min(0.999, hi + 0.1)
    flo, fhi = f(lo), f(hi)
    if not flo > 0 > fhi:
        raise NumericalError(
            f"no sign change for delta={delta}: f({lo:.3g})={flo:.3g}, f({hi:.3g})={fhi:.3g}"
        )
    return brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=300)


def threshold_curve(deltas) -> list[ThresholdPoint]:
    return [ThresholdPoint(d, weak_threshold_rho(d), strong_threshold_rho(d)) for d in deltas]


def threshold_csv(deltas) -> str:
    """CSV with columns ``delta, rho_weak, rho_strong``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "rho_weak", "rho_strong"])
    for p in threshold_curve(deltas):
        w.writerow([repr(p.delta), repr(p.rho_weak), repr(p.rho_strong)])
    return buf.getvalue()


def face_table_csv(queries) -> str:
    """CSV with columns ``n, d, k, Ef_pq, Ef_float, ratio`` (ratio to ``binom(n+1,k)``)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "d", "k", "Ef_pq", "Ef_float", "ratio"])
    for n, d, k in queries:
        ef = expected_faces(n, d, k)
        w.writerow([n, d, k, bc.exact_str(ef), repr(float(ef)), repr(float(ef / math.comb(n + 1, k)))])
    return buf.getvalue()


# -------------------------------------------------- constant-k regime


def _ratio_large(npts: int, d: int, k: int, dps: int = 50) -> float:
    masses = lahdist.pmf_prefix_mp(npts, k, d, dps)
    with mpmath.workdps(dps):
        s = mpmath.fsum(masses[j] for j in range(d, k - 1, -2))
        return float(2 * s)


def constant_k_regime_report(d: int, k: int, n) -> dict:
    """Classify ``(d, k, n)`` against the constant-k weak threshold.

    ``n`` is the number of points.  ``gamma_hat = log n / d`` is compared with
    ``1/k``; ``c = (k log n - d)/sqrt(d)`` is the critical-window offset and
    ``Phi(-c)`` the Gaussian limit of the face ratio.  The finite ratio
    ``E f_{k-1}(C_{n-1,d}) / binom(n, k)`` is exact for moderate ``n`` and
    evaluated with 50 significant digits from the cycle-count series otherwise.
    """
    n = int(n)
    if not (n > d >= k >= 1):
        raise DomainError(f"need n > d >= k >= 1, got n={n}, d={d}, k={k}")
    log_n = math.log(n)
    gamma_hat = log_n / d
    c = (k * log_n - d) / math.sqrt(d)
    if abs(c) <= 1.0:
        regime = "critical"
    elif gamma_hat < 1 / k:
        regime = "below"
    else:
        regime = "above"
    if n <= lahdist.TABLE_MAX_N:
        exact = face_ratio(n, d, k)
        ratio, method, ratio_pq = float(exact), "exact", bc.exact_str(exact)
    else:
        ratio, method, ratio_pq = _ratio_large(n, d, k), "mp50", None
    return {
        "d": d, "k": k, "n": n,
        "gamma_hat": gamma_hat, "inverse_k": 1 / k,
        "regime": regime, "c": c,
        "limit": float(norm.cdf(-c)),
        "ratio": ratio, "ratio_pq": ratio_pq, "ratio_method": method,
    }


# ------------------------------------------------------- conjecture sweep


@dataclass
class ConjectureReport:
    """Outcome of the monotonicity sweep.

    ``counterexamples`` lists ``(d, k, n, reason)`` where either the expected
    face number decreases at ``n`` or the ratio to
    ``binom(n, k)`` fails to be monotone.  ``directions`` maps ``(d, k)`` to the
    observed direction of the ratio, and ``parity_mismatches`` lists pairs whose
    direction differs from the parity rule (decreasing for even ``d - k``,
    increasing for odd).
    """

    d_max: int
    n_extra: int
    counterexamples: list = field(default_factory=list)
    directions: dict = field(default_factory=dict)
    parity_mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def summary(self) -> dict:
        counts = {}
        for v in self.directions.values():
            counts[v] = counts.get(v, 0) + 1
        return {
            "d_max": self.d_max, "n_extra": self.n_extra,
            "pairs": len(self.directions),
            "counterexamples": [list(c) for c in self.counterexamples],
            "direction_counts": counts,
            "parity_mismatches": len(self.parity_mismatches),
        }


def _direction(seq) -> str:
    up = any(b > a for a, b in zip(seq, seq[1:]))
    down = any(b < a for a, b in zip(seq, seq[1:]))
    if up and down:
        return "non-monotone"
    if up:
        return "nondecreasing"
    if down:
        return "nonincreasing"
    return "constant"


def check_monotonicity_conjecture(d_max: int, n_extra: int) -> ConjectureReport:
    """Exact sweep over ``d <= d_max``, ``k <= d``, ``k <= n <= k + n_extra``."""
    rep = ConjectureReport(d_max, n_extra)
    for d in range(1, d_max + 1):
        for k in range(1, d + 1):
            ns = range(k, k + n_extra + 1)
            ratios = [face_ratio(n, d, k) for n in ns]
            faces = [r * math.comb(n, k) for r, n in zip(ratios, ns)]
            for n, a, b in zip(ns[1:], faces, faces[1:]):
                if b < a:
                    rep.counterexamples.append((d, k, n, "faces decreased"))
            direction = _direction(ratios)
            rep.directions[(d, k)] = direction
            if direction == "non-monotone":
                rep.counterexamples.append((d, k, None, "ratio not monotone"))
            expected = "nonincreasing" if (d - k) % 2 == 0 else "nondecreasing"
            if direction not in (expected, "constant"):
                rep.parity_mismatches.append((d, k, direction))
    return rep
