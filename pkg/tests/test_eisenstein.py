"""Ring arithmetic checks, mostly against brute-force oracles."""

import math

import pytest

from sievelab.eisenstein import (
    OMEGA,
    ONE,
    RAMIFIED,
    UNITS,
    ZERO,
    EisensteinInt,
    canonical_associate,
    divrem,
    enumerate_by_norm,
    enumerate_classes_by_norm,
    factor,
    gcd,
    is_prime,
    is_primary,
    is_squarefree,
    primary_form,
    split_rational_prime,
    unit_log,
)
from sievelab.errors import RamifiedError


def test_norm_basics():
    assert EisensteinInt(2, 1).norm() == 3
    assert ZERO.norm() == 0
    z = EisensteinInt(1, 1)
    assert z.conj() * z == EisensteinInt(z.norm(), 0)


def test_conj_matches_complex_embedding():
    z = EisensteinInt(5, -3)
    assert complex(z.conj()) == pytest.approx(complex(z).conjugate())
    assert abs(complex(z)) ** 2 == pytest.approx(z.norm())


def test_mul_matches_complex_embedding():
    x = EisensteinInt(3, -2)
    y = EisensteinInt(-1, 4)
    assert complex(x * y) == pytest.approx(complex(x) * complex(y))


def test_int_coercion():
    assert 2 * OMEGA == EisensteinInt(0, 2)
    assert OMEGA + 1 == EisensteinInt(1, 1)
    assert 1 - RAMIFIED == OMEGA


def test_pow():
    assert OMEGA**3 == ONE
    assert RAMIFIED**2 == EisensteinInt(0, -3)  # (1-w)^2 = -3w
    assert EisensteinInt(2, 1) ** 0 == ONE
    with pytest.raises(ValueError):
        OMEGA ** (-1)


def test_units_are_exactly_norm_one():
    norm_one = enumerate_by_norm(1)
    assert sorted((u.a, u.b) for u in norm_one) == sorted(
        (u.a, u.b) for u in UNITS
    )
    assert len(UNITS) == 6


def test_unit_log_roundtrip():
    for u in UNITS:
        s, j = unit_log(u)
        assert (-ONE) ** s * OMEGA**j == u
    with pytest.raises(ValueError):
        unit_log(EisensteinInt(2, 0))


def test_divrem_trivial_cases():
    for z in (ONE, OMEGA, EisensteinInt(4, -7), RAMIFIED):
        assert divrem(z, z) == (ONE, ZERO)
    assert divrem(ZERO, EisensteinInt(3, 1)) == (ZERO, ZERO)
    with pytest.raises(ZeroDivisionError):
        divrem(ONE, ZERO)


def test_divrem_5_over_2():
    # the quotient must beat every other lattice point near 5/2
    x, y = EisensteinInt(5, 0), EisensteinInt(2, 0)
    q, r = divrem(x, y)
    assert x == q * y + r
    assert r.norm() < y.norm()
    best = min(
        (x - EisensteinInt(qa, qb) * y).norm()
        for qa in range(-1, 6)
        for qb in range(-4, 5)
    )
    assert r.norm() == best


def test_divrem_exhaustive_small_norms():
    pts = enumerate_by_norm(200, nonzero=False)
    nonzero = [z for z in pts if not z.is_zero()]
    for y in nonzero:
        ny = y.norm()
        for x in pts:
            q, r = divrem(x, y)
            assert x == q * y + r
            assert r.norm() < ny


def test_primary_form_small_examples():
    assert primary_form(EisensteinInt(2, 0)) == (ONE, EisensteinInt(2, 0))
    assert primary_form(EisensteinInt(-2, 0)) == (-ONE, EisensteinInt(2, 0))
    u, p = primary_form(-ONE)
    assert p == -ONE and u == ONE


def test_primary_uniqueness_exhaustive():
    for z in enumerate_by_norm(5000):
        if z.norm() % 3 == 0:
            with pytest.raises(RamifiedError):
                primary_form(z)
            continue
        hits = [u * z for u in UNITS if is_primary(u * z)]
        assert len(hits) == 1
        u, p = primary_form(z)
        assert u * p == z and p == hits[0]


def test_gcd_examples():
    # gcd with zero returns the canonical associate
    z = EisensteinInt(4, 1)
    assert gcd(z, ZERO) == primary_form(z).primary
    g = gcd(EisensteinInt(3, 0), RAMIFIED)
    assert g.norm() == 3  # associate of 1 - w
    assert gcd(EisensteinInt(2, 0), EisensteinInt(5, 0)) == ONE
    with pytest.raises(ValueError):
        gcd(ZERO, ZERO)


def test_gcd_2_5_against_divisor_scan():
    two, five = EisensteinInt(2, 0), EisensteinInt(5, 0)
    common = [
        d
        for d in enumerate_by_norm(4)
        if divrem(two, d)[1].is_zero() and divrem(five, d)[1].is_zero()
    ]
    assert all(d.is_unit() for d in common)


def test_gcd_divides_both_and_is_maximal():
    pts = [z for z in enumerate_by_norm(60)]
    for x in pts[::7]:
        for y in pts[::11]:
            g = gcd(x, y)
            assert divrem(x, g)[1].is_zero()
            assert divrem(y, g)[1].is_zero()
            # every common divisor divides g
            for d in enumerate_by_norm(g.norm()):
                if divrem(x, d)[1].is_zero() and divrem(y, d)[1].is_zero():
                    assert divrem(g, d)[1].is_zero()


def test_canonical_associate_is_class_invariant():
    for z in enumerate_by_norm(300):
        reps = {canonical_associate(u * z) for u in UNITS}
        assert len(reps) == 1
        rep = reps.pop()
        if z.is_unit():
            assert rep == ONE
        elif z.norm() % 3 != 0:
            assert is_primary(rep)
    assert canonical_associate(EisensteinInt(2, 1)) == RAMIFIED


def test_factor_units_and_ramified():
    f = factor(OMEGA)
    assert f.unit == OMEGA and f.factors == ()
    f3 = factor(EisensteinInt(3, 0))
    assert f3.value() == EisensteinInt(3, 0)
    assert [(p, e) for p, e in f3.factors] == [(RAMIFIED, 2)]


def test_factor_7_splits():
    f = factor(EisensteinInt(7, 0))
    assert f.value() == EisensteinInt(7, 0)
    assert len(f.factors) == 2
    for p, e in f.factors:
        assert e == 1 and p.norm() == 7 and is_primary(p)
    p1, p2 = f.factors[0][0], f.factors[1][0]
    assert all(p1 != u * p2 for u in UNITS)


def test_factor_remultiplies_exhaustive():
    for z in enumerate_by_norm(5000):
        f = factor(z)
        assert f.value() == z
        assert f.unit.is_unit()
        seen = set()
        for p, e in f.factors:
            assert e >= 1
            assert is_prime(p)
            if p.norm() % 3 != 0:
                assert is_primary(p)
            cls = canonical_associate(p)
            assert cls not in seen
            seen.add(cls)


def test_split_rational_prime():
    for p in (7, 13, 31, 103):
        pi = split_rational_prime(p)
        assert pi.norm() == p and is_primary(pi)
    with pytest.raises(ValueError):
        split_rational_prime(5)


def _prime_reps_up_to(bound):
    reps = {}
    for z in enumerate_by_norm(bound):
        if is_prime(z):
            reps.setdefault(canonical_associate(z), None)
    return list(reps)


def test_is_squarefree_against_divisibility_scan():
    primes = _prime_reps_up_to(2000)
    for z in enumerate_by_norm(2000):
        nz = z.norm()
        brute = True
        for p in primes:
            if p.norm() ** 2 > nz:
                break
            if divrem(z, p * p)[1].is_zero():
                brute = False
                break
        assert is_squarefree(z) == brute


def test_is_prime_spot_checks():
    assert is_prime(RAMIFIED)
    assert is_prime(EisensteinInt(2, 0))
    assert is_prime(EisensteinInt(3, 1))  # norm 7
    assert not is_prime(EisensteinInt(7, 0))
    assert not is_prime(ONE)
    assert not is_prime(EisensteinInt(4, 0))


def test_lattice_count_band():
    count = len(enumerate_by_norm(100))
    expected = 2 * math.pi * 100 / math.sqrt(3)
    assert abs(count - expected) <= 30


def test_enumeration_order_and_zero_handling():
    pts = enumerate_by_norm(30)
    keys = [(z.norm(), z.a, z.b) for z in pts]
    assert keys == sorted(keys)
    assert ZERO not in pts
    with_zero = enumerate_by_norm(30, nonzero=False)
    assert ZERO in with_zero and len(with_zero) == len(pts) + 1


def test_enumerate_primary_squarefree_small():
    pts = enumerate_by_norm(9, squarefree_only=True, primary_only=True)
    assert all(is_primary(z) and is_squarefree(z) for z in pts)
    # the class of (1-w)^2 has norm 9 but is neither primary nor squarefree
    assert all(z.norm() % 3 != 0 for z in pts)
    assert EisensteinInt(-1, 0) in pts  # norm-1 representative is -1


def test_primary_enumeration_is_one_per_class():
    prim = enumerate_by_norm(400, primary_only=True)
    full = [z for z in enumerate_by_norm(400) if z.norm() % 3 != 0]
    assert len(prim) * 6 == len(full)
    assert {u * z for z in prim for u in UNITS} == set(full)


def test_class_representatives_cover_everything():
    reps = enumerate_classes_by_norm(500)
    full = enumerate_by_norm(500)
    assert len(reps) * 6 == len(full)
    assert {u * z for z in reps for u in UNITS} == set(full)
    assert all(z.a >= 1 and 0 <= z.b < z.a for z in reps)
