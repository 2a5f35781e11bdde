"""Archimedean toolkit: completed gamma factors, functional-equation ratios,
Mellin transforms of smooth bump weights, and separation-of-variables checks.

Everything gamma-related is kept in log scale; magnitudes grow like T^6 and
would overflow double precision if exponentiated eagerly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .hecke import SpectralParams

_LOG_PI = math.log(math.pi)
_LOG_2PI = math.log(2.0 * math.pi)
_LOG2 = math.log(2.0)

# B_{2n} / (2n (2n-1)) for n = 1..8; the asymptotic series below is applied
# only for |z| >= 10 where the n=9 term is < 2e-18 in absolute value.
_STIRLING_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)

_STIRLING_RADIUS = 10.0


def _log_sin_pi(z: complex) -> complex:
    # Valid for Im(z) >= 0 only.  sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z});
    # |e^{2 pi i z}| <= 1 in the upper half plane, so 1 - e^{2 pi i z} stays in
    # the closed right half plane and the principal log below is safe.
    w = cmath.exp(2j * math.pi * z)
    return complex(-_LOG2, 0.5 * math.pi) - 1j * math.pi * z + cmath.log(1.0 - w)


def _log_gamma(z: complex) -> complex:
    """Log-gamma continuation (cut along the nonpositive real axis,
    continuous from above), via Stirling with recurrence shift and
    reflection for Re(z) < 1/2."""
    if z.imag < 0.0:
        return _log_gamma(z.conjugate()).conjugate()
    if z.real < 0.5:
        return _LOG_PI - _log_sin_pi(z) - _log_gamma(1.0 - z)
    shift = 0.0 + 0.0j
    while abs(z) < _STIRLING_RADIUS:
        shift += cmath.log(z)
        z += 1.0
    zi = 1.0 / z
    zi2 = zi * zi
    series = 0.0 + 0.0j
    for coef in reversed(_STIRLING_COEF):
        series = series * zi2 + coef
    series *= zi
    return (z - 0.5) * cmath.log(z) - z + 0.5 * _LOG_2PI + series - shift


def log_gamma_R(s: complex) -> complex:
    """Log of pi^(-s/2) Gamma(s/2), principal (continuation) branch.

    Accurate to about 1e-12 relative for |s| <= 1e4.  The poles of
    Gamma(s/2) sit at the nonpositive even integers; those inputs raise
    ValueError.
    """
    s = complex(s)
    if s.imag == 0.0 and s.real <= 0.0 and (s.real * 0.5).is_integer():
        raise ValueError(f"log_gamma_R pole at s = {s}")
    return -0.5 * s * _LOG_PI + _log_gamma(0.5 * s)


@dataclass(frozen=True)
class GammaRatioSample:
    """One evaluation of the functional-equation gamma ratio, in log scale.

    log_ratio is the log of gamma(s, mu_G, mu_F) / gamma(1-s, mu_F, mu_G);
    q_normalized is |Q^(1/2-s) * ratio| with Q = T^6.  Exponentiation happens
    only on demand.
    """

    s: complex
    muF: SpectralParams
    muG: SpectralParams
    log_ratio: complex
    q_normalized: float

    @property
    def ratio(self) -> complex:
        return cmath.exp(self.log_ratio)


def gamma_ratio(s: complex, muF: SpectralParams, muG: SpectralParams) -> GammaRatioSample:
    """Sum over the nine spectral-parameter pairs of
    log Gamma_R(s + mu_i(G) + conj mu_j(F)) - log Gamma_R(1-s + mu_i(F) + conj mu_j(G)).

    Pole inputs in any factor raise ValueError.
    """
    s = complex(s)
    one_minus_s = 1.0 - s
    total = 0.0 + 0.0j
    for i in range(3):
        for j in range(3):
            num = log_gamma_R(s + muG.mu[i] + muF.mu[j].conjugate())
            den = log_gamma_R(one_minus_s + muF.mu[i] + muG.mu[j].conjugate())
            total += num - den
    t_height = max(muF.T, muG.T)
    log_q = 6.0 * math.log(t_height)
    q_normalized = math.exp((0.5 - s.real) * log_q + total.real)
    return GammaRatioSample(s=s, muF=muF, muG=muG, log_ratio=total, q_normalized=q_normalized)


def _smoothstep(t: float) -> float:
    # C-infinity transition: 0 for t <= 0, 1 for t >= 1.
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    a = math.exp(-1.0 / t)
    b = math.exp(-1.0 / (1.0 - t))
    return a / (a + b)


@dataclass(frozen=True)
class BumpWeight:
    """Smooth nonnegative weight equal to 1 on [1, 2].

    The profile is a plateau over [0, log 2] in u = log x with smoothstep
    ramps of width `ramp` on either side, so the support is
    [exp(-ramp), 2 exp(ramp)].  Larger ramps give faster Mellin decay on
    vertical lines.
    """

    ramp: float = 1.5

    def __post_init__(self) -> None:
        if not self.ramp > 0.0:
            raise ValueError("ramp width must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return (math.exp(-self.ramp), 2.0 * math.exp(self.ramp))

    def log_support(self) -> tuple[float, float]:
        return (-self.ramp, _LOG2 + self.ramp)

    def profile(self, u: float) -> float:
        """Weight as a function of u = log x."""
        lo, hi = self.log_support()
        if u <= lo or u >= hi:
            return 0.0
        rise = _smoothstep((u - lo) / self.ramp)
        fall = _smoothstep((hi - u) / self.ramp)
        return rise * fall

    def __call__(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return self.profile(math.log(x))


def _simpson_step(fn, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = fn(lm)
    frm = fn(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    half = 0.5 * tol
    return _simpson_step(fn, a, m, fa, flm, fm, left, half, depth - 1) + _simpson_step(
        fn, m, b, fm, frm, fb, right, half, depth - 1
    )


def _adaptive_simpson(fn, a: float, b: float, tol: float) -> complex:
    fa = fn(a)
    fb = fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(fn, a, b, fa, fm, fb, whole, tol, 48)


def mellin_weight(w: BumpWeight, s: complex, tol: float = 1e-12) -> complex:
    """Mellin transform of w at s: integral of w(x) x^(s-1) dx.

    In u = log x the integrand is w(e^u) e^(s u) over the compact
    log-support; the interval is pre-split so each panel sees at most
    about half an oscillation period before adaptive Simpson refines it.
    Entire in s.
    """
    s = complex(s)
    lo, hi = w.log_support()

    def integrand(u: float) -> complex:
        return w.profile(u) * cmath.exp(s * u)

    panels = max(4, int(abs(s.imag) * (hi - lo) / 3.0) + 1)
    edges = np.linspace(lo, hi, panels + 1)
    total = 0.0 + 0.0j
    per_panel = tol / panels
    for a, b in zip(edges[:-1], edges[1:]):
        total += _adaptive_simpson(integrand, float(a), float(b), per_panel)
    return total


def _simpson_array(vals: np.ndarray, step: float) -> float:
    # Composite Simpson; len(vals) must be odd.
    return float(step / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-2:2].sum()))


def _second_difference(f: Callable[[float], float], h: float = 1e-4) -> Callable[[float], float]:
    def fpp(x: float) -> float:
        return (f(x - h) - 2.0 * f(x) + f(x + h)) / (h * h)

    return fpp


def function_l1_norms(
    f: Callable[[float], float],
    f2: Optional[Callable[[float], float]] = None,
    window: float = 20.0,
    n: int = 16385,
) -> tuple[float, float]:
    """L1 norms of f and f'' on [-window, window] by composite Simpson.

    When no second-derivative callable is supplied a central second
    difference stands in; fine for the smooth rapidly-decaying inputs this
    module works with.
    """
    if n % 2 == 0:
        n += 1
    if f2 is None:
        f2 = _second_difference(f)
    xs = np.linspace(-window, window, n)
    step = xs[1] - xs[0]
    fv = np.array([abs(f(float(x))) for x in xs])
    gv = np.array([abs(f2(float(x))) for x in xs])
    return _simpson_array(fv, step), _simpson_array(gv, step)


def fourier_l1(f: Callable[[float], float], window: float = 20.0, n: int = 1 << 18) -> float:
    """L1 norm of fhat(y) = integral of f(x) e(-xy) dx, e(t) = exp(2 pi i t).

    Sampled by FFT on [-window, window]; frequencies beyond the FFT range
    are covered by the second-derivative tail bound, so the result is a
    faithful estimate of the full-line norm for window-supported mass.
    """
    dx = 2.0 * window / n
    xs = -window + dx * np.arange(n)
    vals = np.array([f(float(x)) for x in xs], dtype=complex)
    body = dx * np.abs(np.fft.fft(vals)).sum() / (2.0 * window)
    _, l1dd = function_l1_norms(f, window=window)
    y_max = n / (4.0 * window)
    tail = l1dd / (2.0 * math.pi**2 * y_max)
    return float(body + tail)


def separation_check(
    f: Callable[[float], float],
    gammas: Sequence[float],
    deltas: Sequence[float],
    b: Sequence[complex],
    *,
    f2: Optional[Callable[[float], float]] = None,
    window: float = 20.0,
    ymax: float = 6.0,
    ny: int = 4001,
) -> tuple[float, float, bool]:
    """Bilinear separation inequality for a smooth rapidly-decaying f.

    lhs = |sum_{m,n} b_m conj(b_n) f(gamma_m + delta_n)|
    rhs = (||f||_1 + ||f''||_1) * max_y |sum_m b_m e(gamma_m y)| |sum_n conj(b_n) e(delta_n y)|

    with the max taken over a fine grid in y.  The rhs dominates because
    ||fhat||_1 <= ||f||_1 + ||f''||_1 and the lhs is the fhat-weighted
    integral of the two exponential sums.
    """
    gam = np.asarray(gammas, dtype=float)
    dlt = np.asarray(deltas, dtype=float)
    bv = np.asarray(b, dtype=complex)
    if gam.ndim != 1 or gam.shape != dlt.shape or gam.shape != bv.shape:
        raise ValueError("gammas, deltas, b must be 1-d of equal length")

    fmat = np.array([[f(float(g + d)) for d in dlt] for g in gam])
    lhs = abs(complex(bv @ fmat @ bv.conj()))

    l1, l1dd = function_l1_norms(f, f2=f2, window=window)
    ys = np.linspace(-ymax, ymax, ny)
    sum_g = np.abs(np.exp(2j * np.pi * np.outer(ys, gam)) @ bv)
    sum_d = np.abs(np.exp(2j * np.pi * np.outer(ys, dlt)) @ bv.conj())
    grid_max = float(np.max(sum_g * sum_d))
    rhs = (l1 + l1dd) * grid_max
    passed = lhs <= rhs * (1.0 + 1e-6)
    return float(lhs), float(rhs), bool(passed)


def stirling_separator(s: complex, muB: SpectralParams, x: float) -> complex:
    """Product over the nine pairs (i, j) of
    [Gamma_R(s+m+ix)/Gamma_R(s+m)] * [Gamma_R(1-s+m)/Gamma_R(1-s+m+ix)]
    with m = mu_i(B) + conj mu_j(B), evaluated in log space.

    The center point of a spectral box enters only through muB; x carries
    the offsets being separated.  Requires |x| <= 2.
    """
    if abs(x) > 2.0:
        raise ValueError("separator argument must satisfy |x| <= 2")
    s = complex(s)
    one_minus_s = 1.0 - s
    ix = 1j * x
    total = 0.0 + 0.0j
    for mi in muB.mu:
        for mj in muB.mu:
            m = mi + mj.conjugate()
            a = log_gamma_R(s + m + ix)
            bb = log_gamma_R(s + m)
            c = log_gamma_R(one_minus_s + m)
            d = log_gamma_R(one_minus_s + m + ix)
            # grouped so the x = 0 and s = 1/2 cancellations are exact
            total += (a - d) + (c - bb)
    return cmath.exp(total)


def stirling_separator_curvature(
    s: complex, muB: SpectralParams, x: float, h: float = 1e-3
) -> complex:
    """Central second difference of the separator in x."""
    if abs(x) + h > 2.0:
        raise ValueError("curvature stencil must stay inside |x| <= 2")
    f_plus = stirling_separator(s, muB, x + h)
    f_mid = stirling_separator(s, muB, x)
    f_minus = stirling_separator(s, muB, x - h)
    return (f_plus - 2.0 * f_mid + f_minus) / (h * h)
