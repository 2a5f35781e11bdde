"""GL(3) Hecke-eigenvalue providers and the relation engine.

Eigenvalues are never solved for: a provider supplies lambda(1, p^k) at
prime powers, one-sided values extend multiplicatively, and the general
lambda(m, n) is assembled through the Mobius divisor sum

    lambda(m, n) = sum over d | gcd(m, n) of
                   mu(d) lambda(m/d, 1) lambda(1, n/d)

with lambda(m, 1) = conj(lambda(1, m)).  Both inversion directions and
the conjugate duality then hold by construction, which is exactly what
the norm certificates downstream rely on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from sympy import divisors, factorint, isprime, mobius

from .errors import CapacityError, TableFormatError

MU_SUM_TOL = 1e-12


@dataclass(frozen=True)
class SpectralParams:
    """Langlands parameter triple with the family height and window."""

    mu: tuple[complex, complex, complex]
    T: float
    V: float
    tempered: bool = False

    def __post_init__(self):
        mu = tuple(complex(z) for z in self.mu)
        object.__setattr__(self, "mu", mu)
        if len(mu) != 3:
            raise ValueError("mu must be a triple")
        if self.T <= 0 or self.V <= 0:
            raise ValueError("T and V must be positive")
        if abs(sum(mu)) > MU_SUM_TOL:
            raise ValueError(f"mu must sum to 0, got {sum(mu)!r}")
        if self.tempered and any(abs(z.real) > MU_SUM_TOL for z in mu):
            raise ValueError("tempered parameters must be purely imaginary")


class GL3Form:
    """Immutable eigenvalue source; caches fill idempotently.

    Exactly one of prime_power (lambda(1, p^k) hook) or table (explicit
    (m, n) -> complex map) backs the form.  Indices past max_index are
    refused instead of silently growing the cache.
    """

    def __init__(
        self,
        params: SpectralParams,
        omega: float,
        provider: str,
        *,
        prime_power: Optional[Callable[[int, int], complex]] = None,
        table: Optional[dict] = None,
        label: Optional[str] = None,
        max_index: int = 1_000_000,
    ):
        if omega <= 0:
            raise ValueError("omega must be positive")
        if (prime_power is None) == (table is None):
            raise ValueError("exactly one of prime_power or table is required")
        self.params = params
        self.omega = float(omega)
        self.provider = provider
        self.label = label if label is not None else provider
        self.max_index = int(max_index)
        self._prime_power = prime_power
        self._table = table
        self._one: dict[int, complex] = {1: 1.0 + 0j}
        self._pp_cache: dict[tuple[int, int], complex] = {}

    def _check_budget(self, *idx: int) -> None:
        for v in idx:
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError("indices must be positive integers")
            if v > self.max_index:
                raise CapacityError(
                    f"index {v} exceeds the cache budget {self.max_index}"
                )

    def lam_one(self, n: int) -> complex:
        """lambda(1, n), multiplicative over prime powers."""
        self._check_budget(n)
        n = int(n)
        if self._table is not None:
            return self.lam(1, n)
        if n not in self._one:
            val = 1.0 + 0j
            for p, k in factorint(n).items():
                key = (p, k)
                if key not in self._pp_cache:
                    self._pp_cache[key] = complex(self._prime_power(p, k))
                val *= self._pp_cache[key]
            self._one[n] = val
        return self._one[n]

    def lam(self, m: int, n: int) -> complex:
        self._check_budget(m, n)
        m, n = int(m), int(n)
        if self._table is not None:
            try:
                return self._table[(m, n)]
            except KeyError:
                raise TableFormatError(
                    f"eigenvalue table holds no entry for ({m}, {n})"
                ) from None
        total = 0j
        for d in divisors(math.gcd(m, n)):
            total += (
                int(mobius(d))
                * self.lam_one(m // d).conjugate()
                * self.lam_one(n // d)
            )
        return total


def hecke_eigenvalue(form: GL3Form, m: int, n: int) -> complex:
    """lambda_F(m, n) through the divisor-sum assembly."""
    return form.lam(m, n)


def _h_sequence(e1: complex, kmax: int) -> list[complex]:
    # h_k for the cubic 1 - e1 x + e2 x^2 - x^3 with e2 = conj(e1), e3 = 1;
    # hard-setting e3 keeps |det| = 1 exact instead of accumulating drift
    e2 = e1.conjugate()
    h = [1.0 + 0j]
    for k in range(1, kmax + 1):
        val = e1 * h[k - 1]
        if k >= 2:
            val -= e2 * h[k - 2]
        if k >= 3:
            val += h[k - 3]
        h.append(val)
    return h


def satake_cusp_proxy(seed: int, T: float, V: float) -> GL3Form:
    """Synthetic tempered form near height T, window V: a stand-in family.

    mu = i(2T + d1, T + d2, -3T + d3) with d1, d2 uniform and d3 chosen so
    the sum is float-exact zero; all three offsets stay inside the box of
    side V/100.  Each prime gets an independent phase theta_p and Satake
    parameters alpha_i = p^(-mu_i theta_p), unit modulus with product 1.
    A model of equidistribution, not a claim of automorphy.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if V <= 0:
        raise ValueError("V must be positive")
    rng = np.random.default_rng([int(seed), 104729])
    d1, d2 = rng.uniform(-V / 400.0, V / 400.0, 2)
    a = 2.0 * T + d1
    b = T + d2
    c = -(a + b)
    params = SpectralParams(
        mu=(complex(0, a), complex(0, b), complex(0, c)),
        T=float(T),
        V=float(V),
        tempered=True,
    )
    imag = (a, b, c)

    def alpha(p: int) -> tuple[complex, complex, complex]:
        theta = float(np.random.default_rng([int(seed), int(p)]).random())
        lp = math.log(p)
        return tuple(complex(np.exp(-1j * im * theta * lp)) for im in imag)

    def prime_power(p: int, k: int) -> complex:
        e1 = sum(alpha(p))
        # lambda(1, p^k) = h_k at the inverse parameters = conj(h_k(alpha))
        return _h_sequence(e1, k)[k].conjugate()

    form = GL3Form(
        params,
        omega=1.0,
        provider="satake_cusp_proxy",
        prime_power=prime_power,
        label=f"proxy{seed}",
    )
    form.alpha = alpha
    return form


@dataclass
class GL2FormData:
    """Hecke data for one SL(2, Z) form: spectral parameter and lambda_j(p)."""

    t_j: float
    lambda_p: dict[int, float]
    source: str = "unknown"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def lam(self, n: int) -> float:
        """lambda_j(n) by the GL(2) recursion and multiplicativity."""
        if n < 1:
            raise ValueError("n must be positive")
        if n == 1:
            return 1.0
        if n not in self._cache:
            val = 1.0
            for p, k in factorint(n).items():
                if p not in self.lambda_p:
                    raise TableFormatError(
                        f"form t_j={self.t_j} has no eigenvalue at prime {p}"
                    )
                lp = self.lambda_p[p]
                prev, cur = 1.0, lp  # lambda(p^0), lambda(p^1)
                for _ in range(k - 1):
                    prev, cur = cur, lp * cur - prev
                val *= cur
            self._cache[n] = val
        return self._cache[n]


def synthetic_gl2_form(
    seed: int, t_j: Optional[float] = None, max_prime: int = 1000
) -> GL2FormData:
    """Sato-Tate-flavored stand-in: lambda_j(p) = 2 cos(theta_p), theta ~ U(0, pi)."""
    if t_j is None:
        t_j = float(10.0 + 90.0 * np.random.default_rng([int(seed), 7919]).random())
    lam = {}
    for p in range(2, max_prime + 1):
        if isprime(p):
            th = float(np.random.default_rng([int(seed), p]).random()) * math.pi
            lam[p] = 2.0 * math.cos(th)
    return GL2FormData(t_j=float(t_j), lambda_p=lam, source=f"synthetic:{seed}")


def eisenstein_lambda(u: GL2FormData, t: float, n: int) -> complex:
    """The induced divisor sum: sum over d1 d2 = n of lambda_j(d1) d1^(-it) d2^(2it)."""
    if n < 1:
        raise ValueError("n must be positive")
    total = 0j
    for d1 in divisors(n):
        d2 = n // d1
        total += u.lam(d1) * complex(d1) ** complex(0, -t) * complex(d2) ** complex(0, 2 * t)
    return total


def eisenstein_form(
    u: GL2FormData, t: float, omega: float = 1.0, max_index: int = 1_000_000
) -> GL3Form:
    """GL(3) form induced from a GL(2) form: mu = (2it, -it + it_j, -it - it_j)."""
    params = SpectralParams(
        mu=(
            complex(0, 2 * t),
            complex(0, -t + u.t_j),
            complex(0, -t - u.t_j),
        ),
        T=max(1.0, 2 * abs(t), abs(t) + abs(u.t_j)),
        V=100.0,
        tempered=True,
    )
    return GL3Form(
        params,
        omega=omega,
        provider="eisenstein_from_gl2",
        prime_power=lambda p, k: eisenstein_lambda(u, t, p**k),
        label=f"eis(t_j={u.t_j:g}, t={t:g})",
        max_index=max_index,
    )


def rankin_selberg_partial(
    form: GL3Form, other: GL3Form, s: complex, cutoff: int
) -> complex:
    """Partial sum of L(s, F x conj(G)) over d^3 m^2 n <= cutoff."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    s = complex(s)
    total = 0j
    d = 1
    while d**3 <= cutoff:
        m = 1
        while d**3 * m * m <= cutoff:
            base = d**3 * m * m
            for n in range(1, cutoff // base + 1):
                total += (
                    form.lam(m, n)
                    * other.lam(m, n).conjugate()
                    * (base * n) ** (-s)
                )
            m += 1
        d += 1
    return total


def convexity_report(form: GL3Form, x: int) -> tuple[float, float]:
    """(sum of |lambda(m, n)|^2 over m^2 n <= x, that sum divided by x)."""
    if x < 1:
        raise ValueError("x must be >= 1")
    total = 0.0
    m = 1
    while m * m <= x:
        for n in range(1, x // (m * m) + 1):
            total += abs(form.lam(m, n)) ** 2
        m += 1
    return total, total / x


def euler_factor_check(
    u: GL2FormData,
    u2: GL2FormData,
    t: float,
    t2: float,
    p: int,
    s: complex,
) -> float:
    """First-order Euler coefficient of the induced pairing, both routes.

    Direct route: lambda(p) conj(lambda'(p)) from the divisor sums.  The
    factored route adds the p^(-s) coefficients of zeta(s - 2it + 2it'),
    L(s + it + 2it', u_j), L(s - 2it - it', u_j'), and the Rankin-Selberg
    factor L(s + it - it', u_j x u_j').  Returns |difference|.
    """
    if complex(s).real <= 1:
        raise ValueError("the coefficient comparison lives in Re(s) > 1")
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    direct = eisenstein_lambda(u, t, p) * eisenstein_lambda(u2, t2, p).conjugate()

    def pz(im: float) -> complex:
        return complex(p) ** complex(0, im)

    lj = u.lam(p)
    lj2 = u2.lam(p)
    factored = (
        pz(2 * t - 2 * t2)
        + lj * pz(-t - 2 * t2)
        + lj2 * pz(2 * t + t2)
        + lj * lj2 * pz(-t + t2)
    )
    return abs(direct - factored)


def ingest_gl2_table(path) -> list[GL2FormData]:
    """Parse a `t_j,p,lambda` CSV (comments with #) into GL(2) forms.

    Rows sharing t_j merge into one form; duplicate (t_j, p) keeps the
    last value with a warning.  Malformed rows fail naming the line.
    """
    buckets: dict[float, dict[int, float]] = {}
    order: list[float] = []
    with open(path, newline="") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.replace(" ", "").lower() == "t_j,p,lambda":
                continue
            parts = [x.strip() for x in line.split(",")]
            if len(parts) != 3:
                raise TableFormatError(
                    f"line {ln}: expected 3 comma-separated fields, got {len(parts)}"
                )
            try:
                tj = float(parts[0])
                p = int(parts[1])
                lam = float(parts[2])
            except ValueError:
                raise TableFormatError(
                    f"line {ln}: could not parse {line!r} as t_j,p,lambda"
                ) from None
            if not isprime(p):
                raise TableFormatError(f"line {ln}: {p} is not prime")
            if tj not in buckets:
                buckets[tj] = {}
                order.append(tj)
            if p in buckets[tj]:
                warnings.warn(
                    f"duplicate eigenvalue for t_j={tj}, p={p} "
                    f"(line {ln}); keeping the last value",
                    stacklevel=2,
                )
            buckets[tj][p] = lam
    return [
        GL2FormData(t_j=tj, lambda_p=buckets[tj], source=str(path)) for tj in order
    ]


def export_eigenvalue_table(
    form: GL3Form, max_m: int, max_n: int, path
) -> None:
    """Write lambda(m, n) on the full index rectangle as `m,n,re,im` CSV."""
    if max_m < 1 or max_n < 1:
        raise ValueError("index bounds must be >= 1")
    with open(path, "w") as fh:
        fh.write("m,n,re,im\n")
        for m in range(1, max_m + 1):
            for n in range(1, max_n + 1):
                v = form.lam(m, n)
                fh.write(f"{m},{n},{v.real:.17g},{v.imag:.17g}\n")


def load_eigenvalue_table(path, omega: float = 1.0, label=None) -> GL3Form:
    """Rebuild a table-backed form from an `m,n,re,im` CSV.

    The spectral parameters of the original form are not stored in the
    table, so the loaded form carries a placeholder triple; only the
    eigenvalues themselves travel through the file.
    """
    table: dict[tuple[int, int], complex] = {}
    with open(path, newline="") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.replace(" ", "").lower() == "m,n,re,im":
                continue
            parts = [x.strip() for x in line.split(",")]
            if len(parts) != 4:
                raise TableFormatError(
                    f"line {ln}: expected 4 comma-separated fields, got {len(parts)}"
                )
            try:
                m = int(parts[0])
                n = int(parts[1])
                val = complex(float(parts[2]), float(parts[3]))
            except ValueError:
                raise TableFormatError(
                    f"line {ln}: could not parse {line!r} as m,n,re,im"
                ) from None
            table[(m, n)] = val
    if not table:
        raise TableFormatError(f"{path}: no eigenvalue rows found")
    params = SpectralParams(mu=(0j, 0j, 0j), T=1.0, V=100.0, tempered=False)
    max_index = max(max(m for m, _ in table), max(n for _, n in table))
    return GL3Form(
        params,
        omega=omega,
        provider="external_table",
        table=table,
        label=label if label is not None else f"table:{path}",
        max_index=max_index,
    )
