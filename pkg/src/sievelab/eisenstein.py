"""Exact arithmetic in Z[w], w = exp(2*pi*i/3).

An element a + b*w is stored as the integer pair (a, b); everything the
ring needs follows from w*w = -1 - w.  Python integers are unbounded, so
all results stay exact at any size and there is no overflow regime to
guard against.

"Primary" follows the Ireland-Rosen convention: an element coprime to 3
is primary when it is congruent to 2 mod 3, which in coordinates reads
a = 2 (mod 3) and b = 0 (mod 3).  Every associate class coprime to 3
contains exactly one primary element; for the unit class it is -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from sympy import factorint, isprime
from sympy.ntheory.residue_ntheory import sqrt_mod

from .errors import RamifiedError

_SQRT3_2 = math.sqrt(3.0) / 2.0


def _round_half_even(num: int, den: int) -> int:
    """Nearest integer to num/den, ties to the even integer.  den > 0."""
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q % 2 == 1):
        q += 1
    return q


def _coerce(v) -> Optional["EisensteinInt"]:
    if isinstance(v, EisensteinInt):
        return v
    if isinstance(v, int):
        return EisensteinInt(v, 0)
    return None


@dataclass(frozen=True)
class EisensteinInt:
    """a + b*w with integer coordinates."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if not isinstance(self.a, int) or not isinstance(self.b, int):
            raise TypeError("coordinates must be Python ints")

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return EisensteinInt(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return EisensteinInt(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self) -> "EisensteinInt":
        return EisensteinInt(-self.a, -self.b)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b, c, d = self.a, self.b, other.a, other.b
        return EisensteinInt(a * c - b * d, a * d + b * c - b * d)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "EisensteinInt":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are defined")
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "EisensteinInt":
        return EisensteinInt(self.a - self.b, -self.b)

    def norm(self) -> int:
        return self.a * self.a - self.a * self.b + self.b * self.b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def __complex__(self) -> complex:
        return complex(self.a - 0.5 * self.b, _SQRT3_2 * self.b)

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        w = "w" if abs(self.b) == 1 else f"{abs(self.b)}w"
        if self.a == 0:
            return w if self.b > 0 else "-" + w
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {w}"


ZERO = EisensteinInt(0, 0)
ONE = EisensteinInt(1, 0)
OMEGA = EisensteinInt(0, 1)
# the prime above 3; (1 - w)^2 = -3w and it has no primary associate
RAMIFIED = EisensteinInt(1, -1)

UNITS = (
    EisensteinInt(1, 0),
    EisensteinInt(-1, 0),
    EisensteinInt(0, 1),
    EisensteinInt(0, -1),
    EisensteinInt(1, 1),
    EisensteinInt(-1, -1),
)

# unit -> (s, j) with unit = (-1)**s * w**j
_UNIT_LOG = {
    (1, 0): (0, 0),
    (-1, 0): (1, 0),
    (0, 1): (0, 1),
    (0, -1): (1, 1),
    (-1, -1): (0, 2),
    (1, 1): (1, 2),
}


def unit_log(u: EisensteinInt) -> tuple[int, int]:
    """Write a unit as (-1)**s * w**j and return (s, j)."""
    try:
        return _UNIT_LOG[(u.a, u.b)]
    except KeyError:
        raise ValueError(f"{u} is not a unit") from None


def is_primary(z: EisensteinInt) -> bool:
    return z.a % 3 == 2 and z.b % 3 == 0


def divrem(x: EisensteinInt, y: EisensteinInt) -> tuple[EisensteinInt, EisensteinInt]:
    """Euclidean step: q, r with x = q*y + r and norm(r) < norm(y).

    q is the lattice point nearest to x/y, rounding each coordinate of
    x*conj(y)/norm(y) half-to-even.  The fractional part then has both
    coordinates in [-1/2, 1/2], so norm(r) <= (3/4)*norm(y) always.
    """
    n = y.norm()
    if n == 0:
        raise ZeroDivisionError("division by zero in Z[w]")
    t = x * y.conj()
    q = EisensteinInt(_round_half_even(t.a, n), _round_half_even(t.b, n))
    return q, x - q * y


def _exact_div(x: EisensteinInt, y: EisensteinInt) -> EisensteinInt:
    q, r = divrem(x, y)
    if not r.is_zero():
        raise ValueError(f"{y} does not divide {x}")
    return q


class PrimaryForm(NamedTuple):
    unit: EisensteinInt
    primary: EisensteinInt


def primary_form(z: EisensteinInt) -> PrimaryForm:
    """Split z = unit * primary with primary = 2 (mod 3).

    Raises RamifiedError when z shares a factor with 1 - w, since no
    associate of such z can be 2 mod 3.
    """
    if z.is_zero():
        raise ValueError("zero cannot be normalized")
    if z.norm() % 3 == 0:
        raise RamifiedError(f"{z} shares a factor with 1 - w")
    for u in UNITS:
        cand = u * z
        if cand.a % 3 == 2 and cand.b % 3 == 0:
            # cand = u*z and unit inverses are conjugates, so z = conj(u)*cand
            return PrimaryForm(u.conj(), cand)
    raise AssertionError("some associate must be primary")


def canonical_associate(z: EisensteinInt) -> EisensteinInt:
    """Fixed representative of the associate class of z.

    Units map to 1, elements coprime to 3 to their primary associate, and
    in general the ramified part is pulled out as a power of 1 - w.
    """
    if z.is_zero():
        raise ValueError("zero has no canonical associate")
    if z.is_unit():
        return ONE
    t = 0
    w = z
    while w.norm() % 3 == 0:
        w = _exact_div(w, RAMIFIED)
        t += 1
    head = RAMIFIED**t
    if w.is_unit():
        return head
    return head * primary_form(w).primary


def gcd(x: EisensteinInt, y: EisensteinInt) -> EisensteinInt:
    """Greatest common divisor as a canonical associate (1 when coprime)."""
    if x.is_zero() and y.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    while not y.is_zero():
        _, r = divrem(x, y)
        x, y = y, r
    return canonical_associate(x)


@dataclass(frozen=True)
class Factorization:
    """unit * product(prime**exponent), exact.

    Primes coprime to 3 are primary and pairwise distinct; the prime above
    3 is recorded as 1 - w itself since it admits no primary associate.
    """

    unit: EisensteinInt
    factors: tuple[tuple[EisensteinInt, int], ...]

    def value(self) -> EisensteinInt:
        out = self.unit
        for p, e in self.factors:
            out = out * p**e
        return out

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)


def split_rational_prime(p: int) -> EisensteinInt:
    """Primary prime above a rational prime p = 1 (mod 3).

    Uses a root c of c^2 + c + 1 = 0 (mod p); then gcd(p, c - w) is a
    prime of norm p.
    """
    if p % 3 != 1 or not isprime(p):
        raise ValueError("need a rational prime congruent to 1 mod 3")
    r = int(sqrt_mod(-3, p))
    c = (r - 1) * pow(2, -1, p) % p
    pi = gcd(EisensteinInt(p, 0), EisensteinInt(c, -1))
    if pi.norm() != p:
        raise AssertionError(f"splitting {p} failed")
    return pi


def factor(z: EisensteinInt) -> Factorization:
    """Complete factorization, built by factoring norm(z) over Z.

    Rational p = 1 (mod 3) splits into two primary primes, p = 2 (mod 3)
    stays prime, and 3 ramifies as a unit times (1 - w)^2.
    """
    if z.is_zero():
        raise ValueError("cannot factor zero")
    work = z
    parts: list[tuple[EisensteinInt, int]] = []
    for p, e in sorted(factorint(z.norm()).items()):
        if p == 3:
            parts.append((RAMIFIED, e))
            for _ in range(e):
                work = _exact_div(work, RAMIFIED)
        elif p % 3 == 2:
            if e % 2:
                raise AssertionError("inert prime with odd multiplicity in a norm")
            prime = EisensteinInt(p, 0)
            parts.append((prime, e // 2))
            for _ in range(e // 2):
                work = _exact_div(work, prime)
        else:
            pi = split_rational_prime(p)
            pair = sorted(
                (pi, primary_form(pi.conj()).primary), key=lambda v: (v.a, v.b)
            )
            for cand in pair:
                k = 0
                while True:
                    q, r = divrem(work, cand)
                    if not r.is_zero():
                        break
                    work = q
                    k += 1
                if k:
                    parts.append((cand, k))
    if not work.is_unit():
        raise AssertionError(f"leftover nonunit {work} after factoring")
    return Factorization(work, tuple(parts))


def is_prime(z: EisensteinInt) -> bool:
    n = z.norm()
    if n <= 1:
        return False
    if isprime(n):
        return True
    q = math.isqrt(n)
    return q * q == n and q % 3 == 2 and isprime(q)


def is_squarefree(z: EisensteinInt) -> bool:
    if z.is_zero():
        return False
    if z.is_unit():
        return True
    return factor(z).is_squarefree()


def enumerate_by_norm(
    max_norm: int,
    *,
    squarefree_only: bool = False,
    primary_only: bool = False,
    nonzero: bool = True,
) -> list[EisensteinInt]:
    """Lattice points with norm <= max_norm, sorted by (norm, a, b).

    primary_only keeps one representative per associate class, namely the
    primary one, so anything divisible by 1 - w drops out.  The
    squarefree filter runs through factor(); that is fine at desk sizes,
    the large sweeps use a sieve instead.
    """
    if max_norm < 0:
        raise ValueError("max_norm must be nonnegative")
    found: list[EisensteinInt] = []
    bmax = math.isqrt(4 * max_norm // 3) if max_norm else 0
    for b in range(-bmax, bmax + 1):
        disc = 4 * max_norm - 3 * b * b
        if disc < 0:
            continue
        s = math.isqrt(disc)
        for a in range((b - s - 1) // 2, (b + s) // 2 + 2):
            z = EisensteinInt(a, b)
            n = z.norm()
            if n > max_norm:
                continue
            if n == 0:
                if not (nonzero or squarefree_only or primary_only):
                    found.append(z)
                continue
            if primary_only and not (a % 3 == 2 and b % 3 == 0):
                continue
            if squarefree_only and not is_squarefree(z):
                continue
            found.append(z)
    found.sort(key=lambda v: (v.norm(), v.a, v.b))
    return found


def enumerate_classes_by_norm(max_norm: int) -> list[EisensteinInt]:
    """One representative per nonzero associate class, norm <= max_norm.

    The sector a >= 1, 0 <= b < a covers the angle range [0, 60) degrees
    and the six units rotate by multiples of 60, so each class appears
    exactly once.  Ramified classes are included (rep of 1 - w is 2 + w).
    """
    found: list[EisensteinInt] = []
    amax = math.isqrt(4 * max_norm // 3) + 1
    for a in range(1, amax + 1):
        for b in range(a):
            z = EisensteinInt(a, b)
            if z.norm() <= max_norm:
                found.append(z)
    found.sort(key=lambda v: (v.norm(), v.a, v.b))
    return found
