import math
from pathlib import Path

import numpy as np
import pytest
from sympy import divisors

from sievelab.errors import CapacityError, TableFormatError
from sievelab.hecke import (
    GL2FormData,
    GL3Form,
    SpectralParams,
    convexity_report,
    eisenstein_form,
    eisenstein_lambda,
    euler_factor_check,
    export_eigenvalue_table,
    hecke_eigenvalue,
    ingest_gl2_table,
    load_eigenvalue_table,
    rankin_selberg_partial,
    satake_cusp_proxy,
    synthetic_gl2_form,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def proxy():
    return satake_cusp_proxy(3, 120.0, 100.0)


@pytest.fixture(scope="module")
def eis():
    u = synthetic_gl2_form(11, t_j=17.5, max_prime=200)
    return eisenstein_form(u, t=0.7)


@pytest.fixture(scope="module")
def table_form(proxy, tmp_path_factory):
    path = tmp_path_factory.mktemp("tables") / "proxy.csv"
    export_eigenvalue_table(proxy, 60, 60, path)
    return load_eigenvalue_table(path)


def test_spectral_params_validation():
    good = SpectralParams(mu=(2j, 1j, -3j), T=10.0, V=100.0, tempered=True)
    assert sum(good.mu) == 0
    with pytest.raises(ValueError):
        SpectralParams(mu=(2j, 1j, -2j), T=10.0, V=100.0)
    with pytest.raises(ValueError):
        SpectralParams(mu=(1.0 + 0j, -0.5 + 0j, -0.5 + 0j), T=10.0, V=100.0, tempered=True)
    with pytest.raises(ValueError):
        SpectralParams(mu=(0j, 0j, 0j), T=0.0, V=100.0)
    with pytest.raises(ValueError):
        SpectralParams(mu=(0j, 0j, 0j), T=10.0, V=-1.0)


def test_proxy_determinism_and_box():
    f1 = satake_cusp_proxy(5, 150.0, 100.0)
    f2 = satake_cusp_proxy(5, 150.0, 100.0)
    assert f1.params.mu == f2.params.mu
    for m, n in ((1, 2), (3, 4), (7, 7), (12, 30)):
        assert f1.lam(m, n) == f2.lam(m, n)
    f3 = satake_cusp_proxy(6, 150.0, 100.0)
    assert any(f1.lam(1, n) != f3.lam(1, n) for n in range(2, 10))

    mu = f1.params.mu
    assert sum(mu) == 0  # third offset constructed to cancel exactly
    assert abs(mu[0].imag - 300.0) <= 100.0 / 200
    assert abs(mu[1].imag - 150.0) <= 100.0 / 200
    assert abs(mu[2].imag + 450.0) <= 100.0 / 200
    assert f1.params.tempered
    with pytest.raises(ValueError):
        satake_cusp_proxy(1, 0.5, 100.0)


def test_proxy_satake_unit_modulus(proxy):
    for p in (2, 3, 5, 13, 97):
        a1, a2, a3 = proxy.alpha(p)
        for a in (a1, a2, a3):
            assert abs(abs(a) - 1.0) <= 1e-12
        assert abs(a1 * a2 * a3 - 1.0) <= 1e-12


def test_lambda_basics(proxy):
    assert proxy.lam(1, 1) == 1
    assert hecke_eigenvalue(proxy, 1, 1) == 1
    assert proxy.lam(6, 1) == pytest.approx(proxy.lam(2, 1) * proxy.lam(3, 1), abs=1e-14)
    for p in (2, 3, 5, 7):
        lhs = proxy.lam(p, 1) * proxy.lam(1, p)
        assert lhs == pytest.approx(proxy.lam(p, p) + 1.0, abs=1e-12)


def test_hecke_relation_residual_all_providers(proxy, eis, table_form):
    for form in (proxy, eis, table_form):
        worst = 0.0
        for m in range(1, 61):
            for n in range(1, 61):
                lhs = form.lam(m, 1) * form.lam(1, n)
                rhs = sum(form.lam(m // d, n // d) for d in divisors(math.gcd(m, n)))
                worst = max(worst, abs(lhs - rhs))
        assert worst <= 1e-9, form.provider


def test_eigenvalue_duality(proxy, eis, table_form):
    for form in (proxy, eis, table_form):
        for m in range(1, 41):
            for n in range(1, 41):
                assert abs(form.lam(m, n) - form.lam(n, m).conjugate()) <= 1e-10


def test_budget_and_argument_validation(proxy):
    small = satake_cusp_proxy(8, 100.0, 100.0)
    small.max_index = 50
    with pytest.raises(CapacityError):
        small.lam(51, 1)
    with pytest.raises(CapacityError):
        small.lam_one(51)
    with pytest.raises(ValueError):
        proxy.lam(0, 1)
    with pytest.raises(ValueError):
        proxy.lam(1, -2)


def test_gl3form_constructor_validation():
    params = SpectralParams(mu=(0j, 0j, 0j), T=1.0, V=1.0)
    with pytest.raises(ValueError):
        GL3Form(params, omega=0.0, provider="x", table={(1, 1): 1 + 0j})
    with pytest.raises(ValueError):
        GL3Form(params, omega=1.0, provider="x")
    with pytest.raises(ValueError):
        GL3Form(
            params,
            omega=1.0,
            provider="x",
            table={(1, 1): 1 + 0j},
            prime_power=lambda p, k: 1 + 0j,
        )


def test_gl2_recursion_and_errors():
    u = synthetic_gl2_form(4, t_j=12.0, max_prime=100)
    assert u.lam(1) == 1.0
    for p in (2, 3, 5):
        lp = u.lam(p)
        assert u.lam(p**2) == lp * lp - 1.0
        assert u.lam(p**3) == pytest.approx(lp**3 - 2 * lp, abs=1e-12)
    assert u.lam(12) == pytest.approx(u.lam(4) * u.lam(3), abs=1e-12)
    with pytest.raises(TableFormatError):
        u.lam(101)  # 101 > max_prime, no data
    with pytest.raises(ValueError):
        u.lam(0)
    assert abs(u.lam(2)) <= 2.0  # Sato-Tate style construction


def test_eisenstein_lambda_values():
    u = synthetic_gl2_form(2, t_j=9.0, max_prime=100)
    t = 0.35
    assert eisenstein_lambda(u, t, 1) == 1
    for p in (2, 3, 7):
        want = u.lam(p) * p ** complex(0, -t) + p ** complex(0, 2 * t)
        assert eisenstein_lambda(u, t, p) == pytest.approx(want, abs=1e-14)
    for n in (4, 6, 12, 30, 64):
        worst = max(abs(u.lam(d)) for d in divisors(n))
        bound = len(divisors(n)) * max(1.0, worst)
        assert abs(eisenstein_lambda(u, t, n)) <= bound + 1e-12
    with pytest.raises(ValueError):
        eisenstein_lambda(u, t, 0)


def test_eisenstein_form_matches_divisor_sum(eis):
    u = synthetic_gl2_form(11, t_j=17.5, max_prime=200)
    for n in range(1, 80):
        direct = eisenstein_lambda(u, 0.7, n)
        assert eis.lam_one(n) == pytest.approx(direct, abs=1e-12)
    assert eis.params.tempered
    assert sum(eis.params.mu) == pytest.approx(0, abs=1e-12)


def test_rankin_selberg_partial(proxy, eis):
    assert rankin_selberg_partial(proxy, proxy, 2.0 + 0j, 1) == 1.0
    prev = 0.0
    for cutoff in (1, 2, 4, 8, 16, 32, 64, 128):
        val = rankin_selberg_partial(proxy, proxy, 2.0 + 0j, cutoff)
        assert abs(val.imag) <= 1e-12  # diagonal pairing is real
        assert val.real >= prev - 1e-12
        prev = val.real
    with pytest.raises(ValueError):
        rankin_selberg_partial(proxy, eis, 2.0 + 0j, 0)


def test_rankin_selberg_tail_bound(proxy):
    s = 2.0 + 0j
    c = 64
    small = rankin_selberg_partial(proxy, proxy, s, c)
    big = rankin_selberg_partial(proxy, proxy, s, 2 * c)
    # every extra term has d^3 m^2 n in (c, 2c], modulus <= max|lam|^2 / c^2
    triples = [
        (d, m, n)
        for d in range(1, 2 * c)
        for m in range(1, 2 * c)
        for n in range(1, 2 * c + 1)
        if d**3 <= 2 * c and c < d**3 * m * m * n <= 2 * c
    ]
    peak = max(abs(proxy.lam(m, n)) ** 2 for _, m, n in triples)
    assert abs(big - small) <= len(triples) * peak / c**2


def test_convexity_report(proxy):
    s1, r1 = convexity_report(proxy, 1)
    assert s1 == 1.0 and r1 == 1.0
    s100, _ = convexity_report(proxy, 100)
    s400, _ = convexity_report(proxy, 400)
    assert 1.0 <= s100 <= s400
    with pytest.raises(ValueError):
        convexity_report(proxy, 0)


def test_convexity_pilot_band():
    # pilot-run regression bounds for this exact configuration
    for seed in (1, 2, 6, 9):
        form = satake_cusp_proxy(seed, T=100.0 + 7 * seed, V=100.0)
        _, ratio = convexity_report(form, 10_000)
        assert 5.0 <= ratio <= 300.0, (seed, ratio)


def test_euler_factor_check_same_form():
    u = synthetic_gl2_form(21, t_j=14.0, max_prime=50)
    for p in (2, 3, 5, 7):
        assert euler_factor_check(u, u, 0.4, 0.4, p, 2.0 + 0j) <= 1e-10


def test_euler_factor_check_random_samples():
    rng = np.random.default_rng(0)
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    for _ in range(50):
        u = synthetic_gl2_form(int(rng.integers(1, 50)), max_prime=50)
        u2 = synthetic_gl2_form(int(rng.integers(50, 100)), max_prime=50)
        t = float(rng.uniform(-3, 3))
        t2 = float(rng.uniform(-3, 3))
        p = int(primes[rng.integers(len(primes))])
        assert euler_factor_check(u, u2, t, t2, p, 1.5 + 0.3j) <= 1e-10


def test_euler_factor_check_validation():
    u = synthetic_gl2_form(1, max_prime=50)
    with pytest.raises(ValueError):
        euler_factor_check(u, u, 0.1, 0.1, 5, 0.9 + 0j)
    with pytest.raises(ValueError):
        euler_factor_check(u, u, 0.1, 0.1, 6, 2.0 + 0j)


def test_ingest_gl2_table_fixture():
    forms = ingest_gl2_table(DATA / "gl2_sample.csv")
    assert len(forms) == 2
    first = forms[0]
    assert first.t_j == pytest.approx(13.7797)
    assert first.lam(2) == pytest.approx(1.5493)
    assert first.lam(4) == pytest.approx(1.5493**2 - 1.0)
    assert forms[1].t_j == pytest.approx(17.7386)
    assert forms[1].lam(3) == pytest.approx(0.5298)


def test_ingest_gl2_table_edge_cases(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# nothing but comments\n\n")
    assert ingest_gl2_table(empty) == []

    dup = tmp_path / "dup.csv"
    dup.write_text("t_j,p,lambda\n1.5,2,0.25\n1.5,2,0.75\n")
    with pytest.warns(UserWarning, match="duplicate"):
        forms = ingest_gl2_table(dup)
    assert forms[0].lam(2) == 0.75  # last wins

    bad = tmp_path / "bad.csv"
    bad.write_text("t_j,p,lambda\n1.5,2,0.25\nnot-a-number,2,0.5\n")
    with pytest.raises(TableFormatError, match="line 3"):
        ingest_gl2_table(bad)

    short = tmp_path / "short.csv"
    short.write_text("1.5,2\n")
    with pytest.raises(TableFormatError, match="line 1"):
        ingest_gl2_table(short)

    notprime = tmp_path / "notprime.csv"
    notprime.write_text("1.5,4,0.25\n")
    with pytest.raises(TableFormatError, match="not prime"):
        ingest_gl2_table(notprime)


def test_export_load_roundtrip(proxy, tmp_path):
    path = tmp_path / "lam.csv"
    export_eigenvalue_table(proxy, 12, 12, path)
    loaded = load_eigenvalue_table(path)
    assert loaded.provider == "external_table"
    for m in range(1, 13):
        for n in range(1, 13):
            assert loaded.lam(m, n) == proxy.lam(m, n)  # .17g round-trips
    with pytest.raises(CapacityError):
        loaded.lam(13, 1)
    blank = tmp_path / "blank.csv"
    blank.write_text("m,n,re,im\n")
    with pytest.raises(TableFormatError):
        load_eigenvalue_table(blank)
    torn = tmp_path / "torn.csv"
    torn.write_text("m,n,re,im\n1,1,1.0\n")
    with pytest.raises(TableFormatError, match="line 2"):
        load_eigenvalue_table(torn)


def test_table_missing_pair_raises(tmp_path):
    # a table with a hole: (2, 2) absent but within the index budget
    path = tmp_path / "holey.csv"
    path.write_text("m,n,re,im\n1,1,1,0\n1,2,0.5,0\n2,1,0.5,0\n")
    loaded = load_eigenvalue_table(path)
    assert loaded.lam(1, 2) == 0.5 + 0j
    with pytest.raises(TableFormatError):
        loaded.lam(2, 2)
