"""End-to-end acceptance checks.

Each ``check_*`` function returns a :class:`CheckResult`; ``run_all`` runs the
nine of them in order.  Exact checks use rational arithmetic with zero
tolerance, numerical ones use fixed tolerances, and Monte Carlo ones use
fixed seeds so a run is reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import asymptotics as asy
from . import bigcomb as bc
from . import hullmodel, lahdist, sampling, walklab

__all__ = ["CHECKS", "CheckResult", "run_all"]

SEED = 20240601


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number}. {self.name} ({self.seconds:.1f}s): {self.detail}"


def _timed(number, name, budget=None):
    def wrap(fn):
        def run() -> CheckResult:
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            if budget is not None and dt > budget:
                ok, detail = False, f"{detail}; exceeded {budget}s budget"
            return CheckResult(number, name, ok, detail, dt)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed(1, "exact identities", budget=30)
def check_exact_identities():
    failures = []
    pairs = 0
    for n in range(1, 31):
        for k in range(1, n + 1):
            pairs += 1
            row = bc.stirling_first_row(n)
            lah = sum(row[j] * bc.stirling_second(j, k) for j in range(k, n + 1))
            form_a = math.factorial(n - 1) // math.factorial(k - 1) * math.comb(n, k)
            form_b = math.factorial(n) * math.comb(n - 1, k - 1) // math.factorial(k)
            if not lah == form_a == form_b == bc.lah_number(n, k):
                failures.append(("lah", n, k))
            table = lahdist.pmf_table(n, k)
            masses = dict(table.items())
            if sum(masses.values()) != 1:
                failures.append(("norm", n, k))
            if n > k and sum(m for j, m in masses.items() if j % 2 == 0) != Fraction(1, 2):
                failures.append(("parity", n, k))
            direct = sum(j * m for j, m in masses.items())
            s1, s2 = lahdist._expectation_sums(n, k)
            lnk = bc.lah_number(n, k)
            if not s1 / lnk == s2 / lnk == direct:
                failures.append(("mean", n, k))
            for p in (1, 2, 3):
                want = math.factorial(p) * sum(math.comb(j, p) * m for j, m in masses.items())
                if lahdist.factorial_moment(n, k, p) != want:
                    failures.append(("fmoment", n, k, p))
            for z in range(1, (n - 1) // k + 1):
                if lahdist.gen_poly_eval(n, k, -z, "pmf-sum") != 0:
                    failures.append(("zero", n, k, z))
    return not failures, f"{pairs} (n,k) pairs, failures={failures[:5]}"


@_timed(2, "samplers and couplings", budget=120)
def check_samplers():
    handle = sampling.RngHandle(SEED, 2)
    worst = 0.0
    stream = 0
    for n, k in ((12, 3), (12, 8), (20, 1)):
        for method in sampling.METHODS:
            stream += 1
            vals = sampling.sample_lah_batch(n, k, method, 100_000, handle.child(stream))
            worst = max(worst, sampling.tv_distance(vals, n, k))
    aldous_bad = 0
    for r in range(2000):
        fam = sampling.aldous_family(20, handle.child(1000 + r))
        prof = fam.record_profile()
        if np.any(np.diff(prof) < 0):
            aldous_bad += 1
    urn_bad = 0
    for r in range(200):
        path = sampling.polya_urn_path(300, 1 + r % 5, handle.child(5000 + r))
        if any(b < a for a, b in zip(path, path[1:])):
            urn_bad += 1
    ok = worst < 0.01 and aldous_bad == 0 and urn_bad == 0
    return ok, f"max TV={worst:.4f}, Aldous violations={aldous_bad}/2000, urn violations={urn_bad}/200"


@_timed(3, "neighborliness thresholds")
def check_thresholds():
    rw = hullmodel.weak_threshold_rho(0.5)
    rs = hullmodel.strong_threshold_rho(0.5)
    grid = np.linspace(0.05, 0.95, 19)
    res_w = max(abs(asy.h(d * hullmodel.weak_threshold_rho(d)) - d) for d in grid)
    res_s = max(abs(hullmodel.strong_threshold_residual(hullmodel.strong_threshold_rho(d), d)) for d in grid)
    ordered = all(hullmodel.strong_threshold_rho(d) < hullmodel.weak_threshold_rho(d) for d in grid)
    ok = abs(rw - 0.5693) <= 5e-4 and abs(rs - 0.1498) <= 5e-4 and res_w < 1e-10 and res_s < 1e-10 and ordered
    return ok, (
        f"rho_weak(1/2)={rw:.6f}, rho_strong(1/2)={rs:.6f}, "
        f"residuals {res_w:.1e}/{res_s:.1e}, strong<weak on grid: {ordered}"
    )


@_timed(4, "rate function")
def check_rate_function():
    diff = 0.0
    convex = True
    for alpha in (0.2, 0.5):
        betas = np.linspace(alpha + 0.05, 0.95, 16)
        closed = [asy.rate_function(alpha, b, "closed") for b in betas]
        legendre = [asy.rate_function(alpha, b, "legendre") for b in betas]
        diff = max(diff, max(abs(a - b) for a, b in zip(closed, legendre)))
        convex &= bool(np.all(np.diff(closed, 2) > 0))
    zero = max(abs(asy.rate_function(a, asy.h(a))) for a in (0.2, 0.5, 0.7))
    phi0 = max(abs(asy.phi_alpha(a, 0.0)) for a in (0.2, 0.5, 0.7))
    r0 = max(abs(asy.saddle_root(a, 0.0).r - (1 - a)) for a in (0.2, 0.5, 0.7))
    fd = 0.0
    for a in (0.2, 0.5, 0.7):
        mean, var = asy.central_clt_params(a)
        e = 1e-3
        d1 = (asy.phi_alpha(a, e) - asy.phi_alpha(a, -e)) / (2 * e)
        d2 = (asy.phi_alpha_prime(a, e) - asy.phi_alpha_prime(a, -e)) / (2 * e)
        fd = max(fd, abs(d1 - mean), abs(d2 - var))
    arg = asy.sigma2_argmax()
    ok = diff < 1e-8 and zero < 1e-10 and convex and phi0 < 1e-12 and r0 < 1e-12 and fd < 1e-5 and abs(arg - 0.23517) < 1e-4
    return ok, (
        f"closed-vs-Legendre {diff:.1e}, I(h)={zero:.1e}, convex={convex}, "
        f"phi(0)={phi0:.1e}, r(0) err={r0:.1e}, FD err={fd:.1e}, argmax={arg:.6f}"
    )


@_timed(5, "limit-law substitutes")
def check_limit_laws():
    sup = [asy.local_limit_sup_error(n, 2, "exact") * math.sqrt(math.log(n)) for n in (100, 300, 1000)]
    local_ok = sup[0] > sup[1] > sup[2]
    errs = {}
    for z in (0.2, 0.4):
        psi = asy.mod_poisson_psi(2, z).real
        errs[z] = [abs(asy.mod_poisson_ratio(n, 2, z) - psi) for n in (500, 4000)]
    mod_ok = all(a > b for a, b in errs.values())
    n, alpha, t = 400, 0.5, 0.5
    table = lahdist.pmf_table(n, int(alpha * n))
    with mpmath.workdps(30):
        mgf = mpmath.fsum(mpmath.mpf(m.numerator) / m.denominator * mpmath.exp(t * j) for j, m in table.items())
        cum = float(mpmath.log(mgf) / n)
    cum_gap = abs(cum - asy.phi_alpha(alpha, t))
    j, ratio = asy.ldp_point_ratio(10_000, 2, 2.0)
    ok = local_ok and mod_ok and cum_gap < 0.03 and 0.5 <= ratio <= 2
    return ok, (
        f"local sup*sqrt(log n)={[round(s, 4) for s in sup]}, "
        f"mod-Poisson errors {[[round(e, 5) for e in v] for v in errs.values()]}, "
        f"cumulant gap={cum_gap:.4f}, point ratio={ratio:.3f} at j={j}"
    )


@_timed(6, "composition covariance")
def check_composition_cov():
    gap = max(
        float(np.abs(asy.composition_cov(a, 40) - asy.conditional_gaussian_cov(a, 40)).max())
        for a in (0.3, 0.5, 0.7)
    )
    n, k, size, M = 2000, 1000, 100_000, 6
    g = sampling.RngHandle(SEED, 6).generator()
    X = np.vstack([
        sampling.block_counts_batch(sampling.sample_compositions(n, k, 5000, g), M)
        for _ in range(size // 5000)
    ]).astype(float)
    Xc = X - X.mean(axis=0)
    limit = asy.composition_cov(k / n, M)
    worst = 0.0
    for a in range(M):
        for b in range(a, M):
            y = Xc[:, a] * Xc[:, b]
            est = y.mean() * size / (size - 1) / k
            se = y.std(ddof=1) / math.sqrt(size) / k
            worst = max(worst, abs(est - limit[a, b]) / se)
    ok = gap < 1e-10 and worst < 3
    return ok, f"formula vs Schur gap={gap:.1e}, max |z| over {M * (M + 1) // 2} entries={worst:.2f}"


@_timed(7, "hull verification", budget=600)
def check_hulls():
    worst, viol = 0.0, 0
    rows = []
    for d, n in ((2, 10), (3, 5), (3, 8), (4, 8)):
        rep = walklab.monte_carlo_report(walklab.WalkConfig(d, n, trials=2000, seed=SEED))
        z = rep.faces["f0"]["z"]
        worst = max(worst, abs(z))
        viol += len(rep.violations)
        rows.append(f"({d},{n}) z={z:+.2f}")
    exact_bad = [
        n for n in range(3, 41)
        if not (
            hullmodel.expected_faces(n, 3, 1) - hullmodel.expected_faces(n, 3, 2) + hullmodel.expected_faces(n, 3, 3) == 2
            and 2 * hullmodel.expected_faces(n, 3, 2) == 3 * hullmodel.expected_faces(n, 3, 3)
        )
    ]
    ok = worst < 3 and viol == 0 and not exact_bad
    return ok, f"{', '.join(rows)}; per-sample violations={viol}; exact d=3 identity failures={exact_bad}"


@_timed(8, "monotonicity conjecture sweep")
def check_conjecture():
    rep = hullmodel.check_monotonicity_conjecture(20, 60)
    s = rep.summary()
    return rep.ok, (
        f"{s['pairs']} (d,k) pairs, counterexamples={len(rep.counterexamples)}, "
        f"directions={s['direction_counts']}, parity-rule mismatches={s['parity_mismatches']}"
    )


@_timed(9, "conic intrinsic-volume identity")
def check_conic():
    bad = []
    count = 0
    for n in range(1, 13):
        for k in range(1, n + 1):
            for j in range(k, n + 1):
                count += 1
                want = Fraction(math.factorial(k) * bc.stirling_first(n, j) * bc.stirling_second(j, k), math.factorial(n))
                if lahdist.conic_face_volume_sum(n, k, j) != want:
                    bad.append((n, k, j))
    return not bad, f"{count} (n,k,j) triples, mismatches={bad[:5]}"


CHECKS = (
    check_exact_identities,
    check_samplers,
    check_thresholds,
    check_rate_function,
    check_limit_laws,
    check_composition_cov,
    check_hulls,
    check_conjecture,
    check_conic,
)


def run_all(select=None, echo=None) -> list[CheckResult]:
    """Run the checks (all, or the 1-based numbers in ``select``)."""
    out = []
    for i, fn in enumerate(CHECKS, start=1):
        if select and i not in select:
            continue
        r = fn()
        if echo:
            echo(r.line())
        out.append(r)
    return out
