import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lahwalk import asymptotics as A
from lahwalk import lahdist
from lahwalk.errors import DomainError

alphas = st.floats(0.05, 0.95)


# ------------------------------------------------------------ Lambert W, h


def test_lambert_special_values():
    assert A.lambert_w("W0", 0.0) == 0.0
    assert A.lambert_w("W0", -1 / math.e) == pytest.approx(-1, abs=1e-7)
    assert A.lambert_w("Wm1", -1 / math.e) == pytest.approx(-1, abs=1e-7)
    assert A.lambert_w("Wm1", -0.5 * math.exp(-0.5)) == pytest.approx(-1 / 0.569336274, rel=1e-8)
    with pytest.raises(DomainError):
        A.lambert_w("Wm1", 0.1)
    with pytest.raises(DomainError):
        A.lambert_w("W0", -1)


@given(st.floats(-1 / math.e + 1e-12, 1e6))
def test_lambert_w0_round_trip(x):
    w = A.lambert_w("W0", x)
    assert w >= -1
    assert w * math.exp(w) == pytest.approx(x, rel=1e-14, abs=1e-14)


@given(st.floats(-1 / math.e + 1e-12, -1e-300))
def test_lambert_wm1_round_trip(x):
    w = A.lambert_w("Wm1", x)
    assert w <= -1
    assert abs(w * math.exp(w) - x) <= 1e-14 * max(1, abs(x))
    # w e^w has condition number |1 + w| in w, so the round trip is only
    # meaningful where that factor is moderate; elsewhere compare with mpmath
    if abs(1 + w) <= 40:
        assert w * math.exp(w) == pytest.approx(x, rel=1e-14, abs=1e-300)
    # relative condition number of W is 1/|1 + w|
    assert w == pytest.approx(float(mpmath.lambertw(x, -1).real), rel=1e-15 * max(1, 1 / max(abs(1 + w), 1e-8)))


@given(st.floats(-1 / math.e, -1 / math.e + 1e-3))
def test_lambert_near_branch_point(x):
    for branch, k in (("W0", 0), ("Wm1", -1)):
        w = A.lambert_w(branch, x)
        assert w == pytest.approx(float(mpmath.lambertw(x, k).real), rel=1e-15 * max(1, 1 / max(abs(1 + w), 1e-8)))


@given(st.floats(-0.36, 50))
def test_lambert_agrees_with_mpmath(x):
    assert A.lambert_w("W0", x) == pytest.approx(float(mpmath.lambertw(x, 0).real), rel=1e-13, abs=1e-15)


def test_h_values():
    assert A.h(1) == 1
    assert A.h_inverse(1) == 1
    assert A.h(0.5) == pytest.approx(math.log(2), rel=1e-15)


@pytest.mark.parametrize("x", [0.1, 0.5, 0.9, 2, 5])
def test_h_inverse_round_trip(x):
    assert A.h_inverse(A.h(x)) == pytest.approx(x, abs=1e-12)


@given(st.floats(1e-3, 60))
def test_log_h_inverse(z):
    assert math.exp(A.log_h_inverse(z)) == pytest.approx(A.h_inverse(z), rel=1e-10)


# ----------------------------------------------------- cumulant function


@pytest.mark.parametrize("alpha", [round(0.1 * i, 1) for i in range(1, 10)])
def test_phi_at_zero(alpha):
    assert abs(A.phi_alpha(alpha, 0.0)) < 1e-12
    assert A.saddle_root(alpha, 0.0).r == pytest.approx(1 - alpha, abs=1e-12)


@given(alphas, st.floats(-30, 30))
def test_saddle_root_residual(alpha, t):
    root = A.saddle_root(alpha, t)
    assert 0 < root.r < 1
    assert abs(root.residual) < 1e-12


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.7])
def test_phi_derivatives_at_zero(alpha):
    mean, var = A.central_clt_params(alpha)
    e = 1e-5
    d1 = (A.phi_alpha(alpha, e) - A.phi_alpha(alpha, -e)) / (2 * e)
    assert d1 == pytest.approx(-alpha * math.log(alpha) / (1 - alpha), abs=1e-6)
    assert A.phi_alpha_prime(alpha, 0.0) == pytest.approx(mean, abs=1e-12)
    e = 1e-4
    d2 = (A.phi_alpha_prime(alpha, e) - A.phi_alpha_prime(alpha, -e)) / (2 * e)
    assert abs(d2 - var) < 1e-5


@given(alphas, st.floats(-10, 10))
def test_phi_prime_matches_finite_difference(alpha, t):
    e = 1e-6
    fd = (A.phi_alpha(alpha, t + e) - A.phi_alpha(alpha, t - e)) / (2 * e)
    assert A.phi_alpha_prime(alpha, t) == pytest.approx(fd, abs=1e-6)
    assert alpha < A.phi_alpha_prime(alpha, t) < 1


def test_cumulant_vs_exact_finite_n():
    n, alpha, t = 400, 0.5, 0.5
    table = lahdist.pmf_table(n, n // 2)
    with mpmath.workdps(30):
        mgf = mpmath.fsum(mpmath.mpf(m.numerator) / m.denominator * mpmath.exp(t * j) for j, m in table.items())
        finite = float(mpmath.log(mgf)) / n
    assert abs(finite - A.phi_alpha(alpha, t)) < 0.03


# ----------------------------------------------------------- rate function


@pytest.mark.parametrize("alpha", [0.2, 0.5])
def test_rate_closed_vs_legendre(alpha):
    for beta in np.linspace(alpha + 0.05, 0.95, 25):
        a = A.rate_function(alpha, beta, "closed")
        b = A.rate_function(alpha, beta, "legendre")
        assert abs(a - b) < 1e-8


@pytest.mark.parametrize("alpha", [0.1, 0.2, 0.5, 0.8])
def test_rate_vanishes_at_mean(alpha):
    assert abs(A.rate_function(alpha, A.h(alpha))) < 1e-10


def test_rate_outside_support():
    assert A.rate_function(0.5, 0.4) == math.inf
    assert A.rate_function(0.5, 1.01) == math.inf


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_rate_convex_on_grid(alpha):
    betas = np.linspace(alpha + 1e-3, 1 - 1e-3, 200)
    vals = np.array([A.rate_function(alpha, b) for b in betas])
    assert np.all(np.diff(vals, 2) >= -1e-8)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_rate_derivative_sign(alpha):
    m = A.h(alpha)
    for beta in np.linspace(alpha + 0.01, 0.99, 40):
        d = A.rate_derivative(alpha, beta)
        if beta < m - 1e-6:
            assert d < 0
        elif beta > m + 1e-6:
            assert d > 0


@given(st.floats(0.1, 0.9), st.floats(0.01, 0.99))
def test_explicit_ldp_consistency(alpha, frac):
    beta = alpha + (1 - alpha) * frac
    assert A.ldp_explicit_limit(alpha, beta) == pytest.approx(-A.rate_function(alpha, beta), abs=1e-8)


def test_sigma2_values():
    assert A.central_clt_params(0.5)[1] == pytest.approx(0.11854, abs=1e-5)
    assert A.sigma2_argmax() == pytest.approx(0.23517, abs=1e-4)


@given(alphas)
def test_sigma2_positive(alpha):
    assert A.central_clt_params(alpha)[1] > 0


@pytest.mark.parametrize("kind", ["first", "second"])
def test_stirling_log_asymptotics(kind):
    assert abs(A.stirling_log_asymptotic(kind, 0.5) - A.stirling_log_exact(kind, 200, 100)) < 0.02


# ----------------------------------------------------------- constant k


def test_mod_poisson_psi_values():
    assert A.mod_poisson_psi(3, 0) == pytest.approx(1)
    z = 0.4
    assert A.mod_poisson_psi(1, z).real == pytest.approx(1 / math.gamma(math.exp(z)), rel=1e-12)
    with pytest.raises(DomainError):
        A.mod_poisson_psi(2, 2j)


def test_mod_poisson_ratio_close():
    assert A.mod_poisson_ratio(2000, 2, 0.3) == pytest.approx(A.mod_poisson_psi(2, 0.3).real, rel=0.05)


@pytest.mark.parametrize("z", [0.2, 0.4])
def test_mod_poisson_convergence(z):
    psi = A.mod_poisson_psi(2, z).real
    assert abs(A.mod_poisson_ratio(4000, 2, z) - psi) < abs(A.mod_poisson_ratio(500, 2, z) - psi)


def test_local_limit():
    n, k = 1000, 2
    m = k * math.log(n)
    assert A.local_limit_density(n, k, m) == pytest.approx((2 * math.pi * k * math.log(n)) ** -0.5)
    sup = [A.local_limit_sup_error(n, 2) * math.sqrt(math.log(n)) for n in (100, 300, 1000)]
    assert sup[0] > sup[1] > sup[2]


def test_precise_ldp():
    n, k = 10**4, 2
    assert A.ldp_constant_k(n, k, 1.0) == pytest.approx((2 * math.pi * k * math.log(n)) ** -0.5)
    assert A.ldp_constant_k(n, k, 2.0, "upper") == pytest.approx(2 * A.ldp_constant_k(n, k, 2.0))
    j, ratio = A.ldp_point_ratio(n, k, 2.0)
    assert j == round(2 * 2 * math.log(n))
    assert 0.5 <= ratio <= 2
    with pytest.raises(DomainError):
        A.ldp_constant_k(n, k, 0.5, "upper")


def test_expectation_asymptotic():
    assert A.expectation_asymptotic(50, 50) == 50
    assert A.expectation_asymptotic(10**6, 10) == pytest.approx(lahdist.expectation_float(10**6, 10), rel=0.05)
    assert A.expectation_asymptotic(1000, 500) == pytest.approx(1000 * math.log(2))
    assert A.expectation_asymptotic(1000, 500) == pytest.approx(float(lahdist.expectation(1000, 500)), rel=0.02)


# ------------------------------------------------------------- covariance


def test_composition_cov_values():
    c = A.composition_cov(0.5, 5)
    assert c[0, 0] == pytest.approx(0.125, abs=1e-15)
    assert np.allclose(c, c.T)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_composition_cov_schur(alpha):
    assert np.abs(A.composition_cov(alpha, 40) - A.conditional_gaussian_cov(alpha, 40)).max() < 1e-10


@given(alphas)
def test_composition_cov_constraints(alpha):
    # the full covariance kills the constraint directions (1, 1, ...) and (1, 2, ...)
    M = 1500
    c = A.composition_cov(alpha, M)
    j = np.arange(1, M + 1)
    assert np.abs(c @ np.ones(M)).max() < 1e-9
    assert np.abs(c @ j).max() < 1e-8
    assert np.linalg.eigvalsh(c[:10, :10]).min() > -1e-12


def test_curve_csv():
    text = A.curve_csv(lambda x: 2 * x, [0.0, 0.5], names=("a", "b"))
    assert text == "a,b\n0.0,0.0\n0.5,1.0\n"


@pytest.mark.parametrize("n,k", [(50, 1), (300, 3), (400, 6)])
def test_prefix_moments_match_exact(n, k):
    mu, var = A._prefix_mean_variance(n, k)
    assert mu == pytest.approx(float(lahdist.expectation(n, k)), rel=1e-14)
    assert var == pytest.approx(float(lahdist.variance(n, k)), rel=1e-13)


def test_local_limit_exact_centering_beyond_table_cap():
    n, k = 10_000, 3
    mu, var = A.exact_mean_variance(n, k)
    assert mu == pytest.approx(lahdist.expectation_float(n, k), rel=1e-12)
    assert 0 < var < mu
    dens = [A.local_limit_density(n, k, m, "exact") for m in range(80)]
    assert sum(dens) == pytest.approx(1, abs=1e-6)
