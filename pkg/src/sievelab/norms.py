"""Operator-norm engine for sieve matrices, the Delta norm chain with
certified dyadic inequalities, and the exponent-chaining optimizer.

The central quantity is Delta = largest eigenvalue of Phi* Phi for a
family-by-index matrix Phi.  The engine runs a 2-dimensional subspace
iteration on that quadratic form and, whenever one side of the matrix is
small enough, cross-validates against a dense Hermitian eigensolver.
Duality (norm of Phi equals norm of the adjoint) is always checked by two
genuinely separate solver runs, never by reusing one Gram matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sympy import divisor_count

from .errors import CapacityError, ConvergenceError

DENSE_CROSSCHECK_DIM = 400
MAX_POWER_ITERATIONS = 10_000


@dataclass(frozen=True, eq=False)
class SieveMatrix:
    """Family-by-index complex matrix.

    entries already carry the row weights (omega^{-1/2} per form);
    row_weights records what was applied so reports can undo it.
    """

    rows: tuple
    cols: tuple
    entries: np.ndarray
    row_weights: np.ndarray

    def __post_init__(self):
        ent = np.ascontiguousarray(self.entries, dtype=np.complex128)
        wts = np.asarray(self.row_weights, dtype=np.float64)
        object.__setattr__(self, "entries", ent)
        object.__setattr__(self, "row_weights", wts)
        if ent.ndim != 2:
            raise ValueError("entries must be a 2d array")
        if ent.shape != (len(self.rows), len(self.cols)):
            raise ValueError("label count does not match entry shape")
        if not np.all(np.isfinite(ent)):
            raise ValueError("entries must be finite")
        if wts.shape != (len(self.rows),) or not np.all(wts > 0):
            raise ValueError("row_weights must be positive, one per row")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def adjoint(self) -> "SieveMatrix":
        return SieveMatrix(
            rows=tuple(self.cols),
            cols=tuple(self.rows),
            entries=self.entries.conj().T,
            row_weights=np.ones(len(self.cols)),
        )


@dataclass(frozen=True)
class NormReport:
    delta: float
    dual_delta: float
    iterations: int
    residual: float
    method: str

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "dual_delta": self.dual_delta,
            "iterations": self.iterations,
            "residual": self.residual,
            "method": self.method,
        }


def _subspace_power(a: np.ndarray, tol: float, seed: int) -> tuple[float, int, float]:
    """Largest eigenvalue of a^H a by 2-block subspace iteration.

    Iterates on the column space (vectors of length a.shape[1]); residual
    is the Ritz residual of the top pair, relative to the Ritz value.
    """
    c = a.shape[1]
    rng = np.random.default_rng(seed)
    block = min(2, c)
    x = rng.standard_normal((c, block)) + 1j * rng.standard_normal((c, block))
    x, _ = np.linalg.qr(x)
    theta = 0.0
    residual = math.inf
    for it in range(1, MAX_POWER_ITERATIONS + 1):
        w = a.conj().T @ (a @ x)
        h = x.conj().T @ w
        h = (h + h.conj().T) / 2
        vals, vecs = np.linalg.eigh(h)
        theta = float(vals[-1])
        y = vecs[:, -1]
        gu = w @ y
        u = x @ y
        rnorm = float(np.linalg.norm(gu - theta * u))
        if theta <= 0:
            # semidefinite form: theta can only vanish for the zero matrix
            if float(np.linalg.norm(w)) == 0.0:
                return 0.0, it, 0.0
            theta = abs(theta)
        residual = rnorm / max(theta, np.finfo(float).tiny)
        if residual <= tol and it >= 3:
            return theta, it, residual
        q, _ = np.linalg.qr(w)
        if q.shape[1] < block:  # pragma: no cover - defensive
            q = np.hstack([q, x[:, : block - q.shape[1]]])
        x = q
    raise ConvergenceError(
        f"subspace iteration hit {MAX_POWER_ITERATIONS} iterations, "
        f"last residual {residual:.3e}"
    )


def _dense_top_eigenvalue(a: np.ndarray) -> float:
    r, c = a.shape
    g = a @ a.conj().T if r <= c else a.conj().T @ a
    g = (g + g.conj().T) / 2
    vals = np.linalg.eigvalsh(g)
    return float(max(vals[-1], 0.0))


def operator_norm_sq(
    phi: SieveMatrix,
    tol: float = 1e-10,
    *,
    seed: int = 7,
    compute_dual: bool = False,
) -> NormReport:
    """Largest eigenvalue of Phi* Phi to relative accuracy tol.

    The subspace iteration result is the reported value; whenever
    min(dims) <= 400 a dense eigensolver recomputes it from the smaller
    Gram matrix and a disagreement raises (the dense route is the oracle).
    With compute_dual the adjoint norm is computed by an independent run
    and the duality invariant is enforced.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = phi.entries
    if a.size == 0:
        raise ValueError("empty matrix")
    delta, iterations, residual = _subspace_power(a, tol, seed)
    method = "power_iteration"
    if min(a.shape) <= DENSE_CROSSCHECK_DIM:
        dense = _dense_top_eigenvalue(a)
        scale = max(dense, 1.0)
        if abs(delta - dense) > max(200 * tol, 1e-8) * scale:
            raise ConvergenceError(
                f"power iteration ({delta!r}) disagrees with dense "
                f"eigensolver ({dense!r})"
            )
        method = "dense_eigen"
    dual = math.nan
    if compute_dual:
        dual, _, _ = _subspace_power(phi.adjoint().entries, tol, seed + 1)
        if abs(delta - dual) > 1e-8 * max(delta, 1.0):
            raise ConvergenceError(
                f"duality violated: {delta!r} vs dual {dual!r}"
            )
    return NormReport(
        delta=delta,
        dual_delta=dual,
        iterations=iterations,
        residual=residual,
        method=method,
    )


def duality_gap(phi: SieveMatrix, tol: float = 1e-10) -> float:
    """|norm(Phi) - norm(Phi*)|, each side from its own solver run."""
    d1 = operator_norm_sq(phi, tol, seed=11).delta
    d2 = operator_norm_sq(phi.adjoint(), tol, seed=23).delta
    return abs(d1 - d2)


def _delta_columns(n: int, kind: str) -> list:
    if kind == "delta1":
        return list(range(n, 2 * n + 1))
    cols = []
    if kind == "delta2":
        m = 1
        while m * m <= 2 * n:
            lo = -(-n // (m * m))  # ceil
            hi = (2 * n) // (m * m)
            for k in range(max(lo, 1), hi + 1):
                cols.append((m, k))
            m += 1
        cols.sort(key=lambda t: (t[0] * t[0] * t[1], t[0], t[1]))
        return cols
    if kind == "delta3":
        d = 1
        while d**3 <= 2 * n:
            m = 1
            while d**3 * m * m <= 2 * n:
                lo = -(-n // (d**3 * m * m))
                hi = (2 * n) // (d**3 * m * m)
                for k in range(max(lo, 1), hi + 1):
                    cols.append((d, m, k))
                m += 1
            d += 1
        cols.sort(key=lambda t: (t[0] ** 3 * t[1] ** 2 * t[2], t[0], t[1], t[2]))
        return cols
    raise ValueError(f"unknown kind {kind!r}")


def build_delta_matrix(
    family: Sequence, n: int, kind: str, max_cols: int = 500_000
) -> SieveMatrix:
    """Matrix behind the Delta norms.

    kind delta1: columns n <= k <= 2n, entries omega^{-1/2} lambda(1,k).
    kind delta2: columns (m,k) with n <= m^2 k <= 2n, entries
    omega^{-1/2} lambda(m,k).  kind delta3: columns (d,m,k) with
    n <= d^3 m^2 k <= 2n and the same entry, independent of d.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not family:
        raise ValueError("family must be nonempty")
    cols = _delta_columns(n, kind)
    if len(cols) > max_cols:
        raise CapacityError(
            f"{kind} at N={n} needs {len(cols)} columns, budget {max_cols}"
        )
    ent = np.empty((len(family), len(cols)), dtype=np.complex128)
    wts = np.empty(len(family))
    for i, form in enumerate(family):
        w = form.omega**-0.5
        wts[i] = w
        if kind == "delta1":
            ent[i] = [w * form.lam(1, k) for k in cols]
        elif kind == "delta2":
            ent[i] = [w * form.lam(m, k) for m, k in cols]
        else:
            ent[i] = [w * form.lam(m, k) for _, m, k in cols]
    labels = tuple(getattr(f, "label", repr(f)) for f in family)
    return SieveMatrix(
        rows=labels, cols=tuple(cols), entries=ent, row_weights=wts
    )


@dataclass(frozen=True)
class Lemma4Certificate:
    lhs: float
    rhs: float
    passed: bool
    terms: tuple  # (R, coefficient, delta2_at_R)

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.passed))


def certify_lemma4(family: Sequence, n: int, tol: float = 1e-10) -> Lemma4Certificate:
    """Delta3(N) against the dyadic Delta2 majorant, explicit constants.

    For m^2 k in a dyadic block [R, 2R) the number of admissible d is at
    most (2N/R)^{1/3} <= 2 (N/R)^{1/3} + 1, so

        Delta3(N) <= sum over R = 2^j <= 2N of (2 (N/R)^{1/3} + 1) Delta2(R)

    holds with what is literally computed here; pass allows 1e-6 slack
    for the eigensolvers.
    """
    lhs = operator_norm_sq(build_delta_matrix(family, n, "delta3"), tol).delta
    rhs = 0.0
    terms = []
    r = 1
    while r <= 2 * n:
        coeff = 2.0 * (n / r) ** (1.0 / 3.0) + 1.0
        d2 = operator_norm_sq(build_delta_matrix(family, r, "delta2"), tol).delta
        rhs += coeff * d2
        terms.append((r, coeff, d2))
        r *= 2
    return Lemma4Certificate(lhs, rhs, lhs <= rhs * (1 + 1e-6), tuple(terms))


@dataclass(frozen=True)
class Lemma5Block:
    x: int
    y: int
    delta1_x: float
    kmax_y: float
    min_bound: float  # min(Y * Delta1(X), X * Delta1(Y)), diagnostic


@dataclass(frozen=True)
class Lemma5Certificate:
    lhs: float
    rhs: float
    passed: bool
    tau_max: int
    swap_roles: bool
    blocks: tuple
    rhs_min_form: float  # tau_max * sum of block min-bounds, diagnostic

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.passed))


def _dyadic_floor(v: int) -> int:
    return 1 << (v.bit_length() - 1)


def certify_lemma5(
    family: Sequence, n: int, swap_roles: bool = False, tol: float = 1e-10
) -> Lemma5Certificate:
    """Delta2(N) against the Delta1 block majorant, explicit constants.

    Chain actually certified: expand lambda(m,k) through the Mobius
    relation, Cauchy over the divisor sum with the exact factor
    tau_max = max tau(gcd(m,k)) over the range, reindex to triples
    (d, m, k) with N <= d^3 m^2 k <= 2N, and split dyadically in
    (Y, X) = (block of d*m, block of k).  Each block is bounded by
    Delta1(X) * max_F sum_{d m in [Y,2Y)} |lambda_F(m,1)|^2.  With
    swap_roles the roles of m and k are exchanged (this relies on
    lambda(m,1) = conj(lambda(1,m))).  The classical min(Y Delta1(X),
    X Delta1(Y)) shape is reported per block as a diagnostic, not
    certified.
    """
    lhs = operator_norm_sq(build_delta_matrix(family, n, "delta2"), tol).delta

    tau_max = 1
    for m, k in _delta_columns(n, "delta2"):
        g = math.gcd(m, k)
        if g > 1:
            tau_max = max(tau_max, int(divisor_count(g)))

    # nonempty dyadic blocks of the reindexed triple sum
    keys = set()
    for d, m, k in _delta_columns(n, "delta3"):
        if swap_roles:
            keys.add((_dyadic_floor(d * k), _dyadic_floor(m)))
        else:
            keys.add((_dyadic_floor(d * m), _dyadic_floor(k)))

    delta1_cache: dict[int, float] = {}

    def delta1(x: int) -> float:
        if x not in delta1_cache:
            delta1_cache[x] = operator_norm_sq(
                build_delta_matrix(family, x, "delta1"), tol
            ).delta
        return delta1_cache[x]

    def kmax(y: int) -> float:
        best = 0.0
        for form in family:
            s = 0.0
            for m in range(1, 2 * y):
                cnt = -(-2 * y // m) - (-(-y // m))
                if cnt <= 0:
                    continue
                if swap_roles:
                    s += cnt * abs(form.lam(1, m)) ** 2
                else:
                    s += cnt * abs(form.lam(m, 1)) ** 2
            best = max(best, s)
        return best

    rhs = 0.0
    rhs_min = 0.0
    blocks = []
    for y, x in sorted(keys):
        d1x = delta1(x)
        km = kmax(y)
        rhs += d1x * km
        mb = min(y * d1x, x * delta1(y))
        rhs_min += mb
        blocks.append(Lemma5Block(x=x, y=y, delta1_x=d1x, kmax_y=km, min_bound=mb))
    rhs *= tau_max
    rhs_min *= tau_max
    return Lemma5Certificate(
        lhs=lhs,
        rhs=rhs,
        passed=lhs <= rhs * (1 + 1e-6),
        tau_max=tau_max,
        swap_roles=swap_roles,
        blocks=tuple(blocks),
        rhs_min_form=rhs_min,
    )


@dataclass(frozen=True)
class ChainResult:
    value: float
    argmax: tuple[float, float]
    closed_form: float

    def __iter__(self):
        return iter((self.value, self.argmax, self.closed_form))


def exponent_chain(t: float, n: float, grid: int = 48) -> ChainResult:
    """Grid maximization of the chained bound against its closed form.

    value = N + (N/T^3) * max over Y^2 X <= T^6/N of
            (T^6/(N X Y^2))^{1/3} * min(Y (T^3 + T^2 X), X (T^3 + T^2 Y)),
    closed_form = N + (T^3 N)^{2/3} + T^5.
    """
    if t < 1 or n < 1:
        raise ValueError("need T >= 1 and N >= 1")
    cap = t**6 / n
    best = 0.0
    arg = (1.0, 1.0)
    if cap >= 1.0:
        xs = np.exp(np.linspace(0.0, math.log(cap), grid))
        for x in xs:
            ymax = math.sqrt(cap / x)
            ys = np.exp(np.linspace(0.0, math.log(max(ymax, 1.0)), grid))
            ys = np.append(ys, ymax)
            for y in ys:
                if y < 1.0 or y * y * x > cap * (1 + 1e-12):
                    continue
                front = (t**6 / (n * x * y * y)) ** (1.0 / 3.0)
                val = front * min(
                    y * (t**3 + t**2 * x), x * (t**3 + t**2 * y)
                )
                if val > best:
                    best = val
                    arg = (float(x), float(y))
    value = n + (n / t**3) * best
    closed = n + (t**3 * n) ** (2.0 / 3.0) + t**5
    return ChainResult(value=value, argmax=arg, closed_form=closed)


def exponent_fit(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(delta) against log(size)."""
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    sizes = [p[0] for p in points]
    deltas = [p[1] for p in points]
    if len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be distinct")
    if min(sizes) <= 0 or min(deltas) <= 0:
        raise ValueError("sizes and deltas must be positive")
    xs = np.log(np.asarray(sizes, dtype=float))
    ys = np.log(np.asarray(deltas, dtype=float))
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)
