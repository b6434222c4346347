import json
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lahwalk import bigcomb as bc
from lahwalk import lahdist as L
from lahwalk.errors import DomainError

from oracles import compositions, lah_pmf_by_records, records

nk_small = st.integers(1, 20).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n)))
nk_mid = st.integers(1, 60).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n)))


# frozen from lah_pmf_by_records(4, 2), i.e. 4! * 3 labelled compositions
PMF_4_2 = {2: Fraction(11, 36), 3: Fraction(1, 2), 4: Fraction(7, 36)}


def test_frozen_pmf_4_2():
    assert dict(L.pmf_table(4, 2).items()) == PMF_4_2


@pytest.mark.parametrize("n,k", [(1, 1), (3, 1), (4, 2), (5, 2), (5, 3), (6, 4), (6, 1)])
def test_pmf_matches_record_enumeration(n, k):
    assert dict(L.pmf_table(n, k).items()) == lah_pmf_by_records(n, k)


def test_reference_examples():
    assert L.pmf(4, 2, 3) == Fraction(1, 2)
    assert L.pmf(3, 1, 2) == Fraction(1, 2)
    assert L.pmf(7, 7, 7) == 1
    assert L.cdf(4, 2, 3) == Fraction(29, 36)
    assert L.cdf(4, 2, 1) == 0 and L.cdf(4, 2, 4) == 1
    assert L.parity_mass(4, 2, 3) == Fraction(1, 2)
    assert L.parity_mass(6, 6, 6) == 1
    assert L.expectation(4, 2) == Fraction(26, 9)
    assert L.expectation(3, 2) == Fraction(5, 2)
    assert L.expectation(9, 9) == 9
    assert L.factorial_moment(4, 2, 1) == Fraction(26, 9)
    assert L.factorial_moment(4, 2, 2) == Fraction(107, 18)
    assert L.factorial_moment(6, 6, 2) == 30
    assert L.variance(4, 2) == Fraction(79, 162)
    assert L.variance(3, 2) == Fraction(1, 4)
    assert L.variance(5, 5) == 0


@pytest.mark.parametrize("method", ["pmf-sum", "coeff", "gamma-sum"])
def test_generating_polynomial_examples(method):
    assert L.gen_poly_eval(4, 2, 1, method) == 1
    assert L.gen_poly_eval(4, 2, -1, method) == 0
    assert L.gen_poly_eval(3, 1, 2, method) == 4


def test_mode_examples():
    assert L.mode(4, 2)[0] == [3]
    assert L.mode(8, 8)[0] == [8]
    argmax, pair = L.mode(100, 1)
    assert pair == (4, 5)
    assert set(argmax) <= {4, 5}


def test_log_concavity_examples():
    assert L.check_log_concavity(4, 2)[0]
    assert L.check_log_concavity(5, 5)[0]
    assert L.check_log_concavity(12, 5)[0]


def test_conic_examples():
    assert L.conic_face_volume_sum(3, 2, 2) == 1
    assert L.conic_face_volume_sum(5, 5, 5) == 1
    assert L.conic_face_volume_sum(4, 2, 3) == Fraction(3, 2)


def _has_root(zs, value, tol=1e-9):
    return any(abs(z - value) < tol for z in zs)


def test_zeros_examples():
    assert _has_root(L.poly_zeros(4, 2), -1)
    z52 = L.poly_zeros(5, 2)
    assert _has_root(z52, -1) and _has_root(z52, -2)
    z71 = L.poly_zeros(7, 1)
    assert len(z71) == 6 and all(_has_root(z71, -i) for i in range(1, 7))


def test_zeros_are_roots():
    n, k = 14, 3
    for z in L.poly_zeros(n, k):
        with mpmath.workdps(40):
            val = sum(float(m) * mpmath.mpc(z) ** j for j, m in L.pmf_table(n, k).items())
        assert abs(val) < 1e-8 * max(1, abs(z)) ** n


@pytest.mark.parametrize("n,k", [(120, 2), (120, 7)])
def test_zeros_vieta_at_scale(n, k):
    zs = L.poly_zeros(n, k)
    assert len(zs) == n - k
    # weights w_i multiply t^(k+i); Q is monic after dividing by w_{n-k}
    w = [bc.stirling_first(n, j) * bc.stirling_second(j, k) for j in range(k, n + 1)]
    assert sum(zs).real == pytest.approx(-w[-2] / w[-1], rel=1e-12)
    assert abs(sum(zs).imag) < 1e-9
    log_prod = math.fsum(math.log(abs(z)) for z in zs)
    assert log_prod == pytest.approx(math.log(w[0]) - math.log(w[-1]), rel=1e-12)


def test_table_serialization():
    t = L.pmf_table(4, 2)
    lines = t.to_csv().splitlines()
    assert lines[0] == "j,mass_p,mass_q,mass_float"
    assert lines[1] == "2,11,36,0.3055555555555556"
    doc = json.loads(t.to_json())
    assert doc["masses"] == {"2": "11/36", "3": "1/2", "4": "7/36"}
    assert t[3] == Fraction(1, 2)


def test_domain_errors():
    for bad in [(0, 1), (3, 0), (3, 4)]:
        with pytest.raises(DomainError):
            L.pmf_table(*bad)
    with pytest.raises(DomainError):
        L.factorial_moment(4, 2, 0)
    with pytest.raises(DomainError):
        L.gen_poly_eval(4, 2, 1, "bogus")


def test_large_n_pmf_uses_series_route():
    n, k = 2500, 2
    exact_prefix = L.pmf_prefix_mp(n, k, 6, dps=60)
    for j in (3, 6):
        assert float(L.pmf(n, k, j)) == pytest.approx(float(exact_prefix[j]), rel=1e-12)


@pytest.mark.parametrize("n,k,jmax", [(40, 1, 9), (60, 3, 60), (120, 2, 10), (400, 20, 150)])
def test_prefix_series_matches_exact(n, k, jmax):
    masses = L.pmf_prefix_mp(n, k, jmax, dps=50)
    table = L.pmf_table(n, k)
    with mpmath.workdps(50):
        for j in range(k, jmax + 1):
            want = mpmath.mpf(table[j].numerator) / table[j].denominator
            assert abs(masses[j] - want) <= mpmath.mpf(10) ** -45 * want


@pytest.mark.parametrize("z", [0.2, -0.7, 1.1])
def test_laplace_matches_exact_sum(z):
    n, k = 30, 4
    want = math.fsum(float(m) * math.exp(z * j) for j, m in L.pmf_table(n, k).items())
    assert float(L.laplace_mp(n, k, z)) == pytest.approx(want, rel=1e-12)


def test_expectation_float_matches_exact():
    assert L.expectation_float(300, 7) == pytest.approx(float(L.expectation(300, 7)), rel=1e-12)


# ------------------------------------------------------------ properties


@given(nk_mid)
def test_normalization(nk):
    assert sum(m for _, m in L.pmf_table(*nk).items()) == 1


@given(nk_mid)
def test_parity_half(nk):
    n, k = nk
    if n > k:
        even = sum(m for j, m in L.pmf_table(n, k).items() if j % 2 == 0)
        assert even == Fraction(1, 2)


@given(nk_small, st.fractions(min_value=-5, max_value=5, max_denominator=7))
def test_three_generating_routes_agree(nk, t):
    n, k = nk
    a = L.gen_poly_eval(n, k, t, "pmf-sum")
    assert a == L.gen_poly_eval(n, k, t, "coeff") == L.gen_poly_eval(n, k, t, "gamma-sum")


@given(nk_mid)
def test_moment_consistency(nk):
    n, k = nk
    table = dict(L.pmf_table(n, k).items())
    mean = sum(j * m for j, m in table.items())
    assert L.expectation(n, k) == mean == L.factorial_moment(n, k, 1)
    fm2 = sum(j * (j - 1) * m for j, m in table.items())
    assert L.factorial_moment(n, k, 2) == fm2 == L.second_factorial_moment_closed(n, k)
    assert L.variance(n, k) == fm2 + mean - mean**2
    fm3 = sum(j * (j - 1) * (j - 2) * m for j, m in table.items())
    assert L.factorial_moment(n, k, 3) == fm3


@given(st.integers(2, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))))
def test_stochastic_monotonicity(nk):
    n, k = nk
    a, b = L.pmf_table(n, k), L.pmf_table(n, k + 1)
    c = L.pmf_table(n + 1, k)
    ca = cb = cc = Fraction(0)
    for j in range(0, n + 2):
        ca += a[j] if k <= j <= n else 0
        cb += b[j] if k + 1 <= j <= n else 0
        cc += c[j] if k <= j <= n + 1 else 0
        assert ca >= cb and ca >= cc


@given(nk_mid)
def test_unimodal(nk):
    n, k = nk
    masses = [m for _, m in L.pmf_table(n, k).items()]
    peak = masses.index(max(masses))
    assert all(x <= y for x, y in zip(masses[:peak], masses[1:peak + 1]))
    assert all(x >= y for x, y in zip(masses[peak:], masses[peak + 1:]))
    assert len(L.mode(n, k)[0]) <= 2
    assert L.is_unimodal(n, k) and L.check_log_concavity(n, k)[0]


@given(st.integers(2, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))))
def test_integer_zeros(nk):
    n, k = nk
    for z in range(1, (n - 1) // k + 1):
        assert L.gen_poly_eval(n, k, -z) == 0


@pytest.mark.parametrize("n", range(1, 9))
def test_conic_identity(n):
    for k in range(1, n + 1):
        for j in range(k, n + 1):
            want = Fraction(math.factorial(k) * bc.stirling_first(n, j) * bc.stirling_second(j, k), math.factorial(n))
            assert L.conic_face_volume_sum(n, k, j) == want


def test_records_oracle_sanity():
    assert records([1, 3, 2, 4]) == 3
    assert list(compositions(4, 2)) == [(1, 3), (2, 2), (3, 1)]
