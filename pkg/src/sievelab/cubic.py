"""Cubic residue symbols over Z[w] and the sieve matrices built from them.

The symbol (m/n)_3 takes values in {0} union mu_3 and is computed by a
Jacobi-style Euclidean loop: no factoring, just reduction mod n, stripping
the unit and (1 - w) content of the remainder with the supplementary laws,
then swapping the arguments by cubic reciprocity (legal once both are
primary).  power_residue_oracle is the classical prime-modulus character
and serves as the independent ground truth in the tests.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from sympy import primerange

from .eisenstein import (
    OMEGA,
    ONE,
    RAMIFIED,
    EisensteinInt,
    _exact_div,
    divrem,
    enumerate_by_norm,
    enumerate_classes_by_norm,
    gcd,
    is_prime,
    primary_form,
    split_rational_prime,
    unit_log,
)
from .errors import CapacityError, RamifiedError
from .norms import SieveMatrix

_SQRT3_2 = math.sqrt(3.0) / 2.0
# zeta_3**e for e = 0, 1, 2; every symbol value is one of these exact floats
_ZETA = (
    complex(1.0, 0.0),
    complex(-0.5, _SQRT3_2),
    complex(-0.5, -_SQRT3_2),
)


@dataclass(frozen=True)
class CubicSymbolValue:
    """zeta_3**value, or the zero symbol when value is None."""

    value: Optional[int]

    def __post_init__(self):
        if self.value is not None and self.value not in (0, 1, 2):
            raise ValueError("exponent must be None or one of 0, 1, 2")

    @classmethod
    def from_exponent(cls, e: int) -> "CubicSymbolValue":
        return cls(e % 3)

    def is_zero(self) -> bool:
        return self.value is None

    def __mul__(self, other):
        if not isinstance(other, CubicSymbolValue):
            return NotImplemented
        if self.value is None or other.value is None:
            return CubicSymbolValue(None)
        return CubicSymbolValue((self.value + other.value) % 3)

    def conj(self) -> "CubicSymbolValue":
        if self.value is None:
            return self
        return CubicSymbolValue((-self.value) % 3)

    def as_complex(self) -> complex:
        if self.value is None:
            return 0j
        return _ZETA[self.value]


def _unit_exponent(n: EisensteinInt) -> int:
    # (w/n)_3 = w**((N(n)-1)/3), any n coprime to 3
    return ((n.norm() - 1) // 3) % 3


def _ramified_exponent(n: EisensteinInt) -> int:
    # ((1-w)/n)_3 = w**(2(a+1)/3) for primary n = a + bw
    return (2 * ((n.a + 1) // 3)) % 3


def cubic_symbol(m: EisensteinInt, n: EisensteinInt) -> CubicSymbolValue:
    """Cubic residue symbol (m/n)_3, Jacobi-extended over the modulus.

    The modulus must be nonzero and coprime to 3; its unit multiple is
    irrelevant.  Returns the zero value exactly when gcd(m, n) is not a
    unit.
    """
    if n.is_zero():
        raise ValueError("modulus must be nonzero")
    if n.norm() % 3 == 0:
        raise RamifiedError(f"modulus {n} shares a factor with 1 - w")
    n = primary_form(n).primary
    acc = 0
    while True:
        if n.is_unit():
            # n = -1, the empty prime product
            return CubicSymbolValue(acc % 3)
        m = divrem(m, n)[1]
        if m.is_zero():
            return CubicSymbolValue(None)
        while m.norm() % 3 == 0:
            m = _exact_div(m, RAMIFIED)
            acc += _ramified_exponent(n)
        u, m0 = primary_form(m)
        _, j = unit_log(u)
        # (-1/n) = 1 because -1 is a cube, so only the w-power of u counts
        acc += j * _unit_exponent(n)
        if m0.is_unit():
            return CubicSymbolValue(acc % 3)
        m, n = n, m0


def _pow_mod(base: EisensteinInt, exp: int, mod: EisensteinInt) -> EisensteinInt:
    result = ONE
    base = divrem(base, mod)[1]
    while exp:
        if exp & 1:
            result = divrem(result * base, mod)[1]
        base = divrem(base * base, mod)[1]
        exp >>= 1
    return result


def power_residue_oracle(m: EisensteinInt, p: EisensteinInt) -> CubicSymbolValue:
    """Prime-modulus ground truth: m^((N(p)-1)/3) mod p as a cube root of 1.

    Independent of cubic_symbol (modular exponentiation instead of
    reciprocity), which is the whole point.
    """
    if p.norm() % 3 == 0:
        raise RamifiedError("the prime above 3 carries no cubic character")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if divrem(m, p)[1].is_zero():
        return CubicSymbolValue(None)
    r = _pow_mod(m, (p.norm() - 1) // 3, p)
    for k in (0, 1, 2):
        if divrem(r - OMEGA**k, p)[1].is_zero():
            return CubicSymbolValue(k)
    raise AssertionError("cubic character value escaped mu_3")


def lambda_q(q: EisensteinInt, m: EisensteinInt, n: EisensteinInt) -> complex:
    """lambda_q(m, n) = (n/q)_3 * conj((m/q)_3), as an exact table value."""
    return (cubic_symbol(n, q) * cubic_symbol(m, q).conj()).as_complex()


@dataclass(frozen=True)
class CubicSieveConfig:
    M: int
    Q: int
    variant: str = "delta1"

    def __post_init__(self):
        if self.M < 1 or self.Q < 1:
            raise ValueError("M and Q must be >= 1")
        if self.variant not in ("delta1", "delta3"):
            raise ValueError("variant must be delta1 or delta3")


def primary_squarefree_elements(max_norm: int) -> list[EisensteinInt]:
    """One squarefree representative per associate class, norm <= max_norm."""
    return enumerate_by_norm(max_norm, squarefree_only=True, primary_only=True)


def _icbrt(x: int) -> int:
    r = round(x ** (1.0 / 3.0))
    while r**3 > x:
        r -= 1
    while (r + 1) ** 3 <= x:
        r += 1
    return r


def _worker_count() -> int:
    raw = os.environ.get("SIEVELAB_THREADS", "").strip()
    if not raw:
        return 1
    return max(1, int(raw))


def build_cubic_sieve_matrix(
    cfg: CubicSieveConfig, max_cells: int = 20_000_000
) -> SieveMatrix:
    """Sieve matrix over the primary squarefree moduli q with N(q) <= Q.

    variant delta1: one column per primary squarefree n with N(n) <= M,
    entry (n/q)_3.  variant delta3: one column per triple (d, m, n) with
    N(d^3 m^2 n) <= M, d running over all associate classes and m, n
    primary squarefree coprime (that is, mu(mn) != 0); the entry is
    lambda_q(m, n), independent of d.
    """
    rows_q = primary_squarefree_elements(cfg.Q)
    if cfg.variant == "delta1":
        cols = primary_squarefree_elements(cfg.M)
    else:
        sf_cache = primary_squarefree_elements(cfg.M)
        cols = []
        for d in enumerate_classes_by_norm(_icbrt(cfg.M)):
            rem_d = cfg.M // d.norm() ** 3
            for mm in sf_cache:
                if mm.norm() ** 2 > rem_d:
                    break
                rem_m = rem_d // mm.norm() ** 2
                for nn in sf_cache:
                    if nn.norm() > rem_m:
                        break
                    if gcd(mm, nn).is_unit():
                        cols.append((d, mm, nn))
        cols.sort(
            key=lambda t: (
                t[0].norm() ** 3 * t[1].norm() ** 2 * t[2].norm(),
                t[0].a, t[0].b, t[1].a, t[1].b, t[2].a, t[2].b,
            )
        )
    if len(rows_q) * len(cols) > max_cells:
        raise CapacityError(
            f"{cfg.variant} matrix would hold {len(rows_q) * len(cols)} cells, "
            f"budget {max_cells}"
        )
    ent = np.zeros((len(rows_q), len(cols)), dtype=np.complex128)

    def fill_row(i: int) -> None:
        q = rows_q[i]
        if cfg.variant == "delta1":
            for j, nn in enumerate(cols):
                ent[i, j] = cubic_symbol(nn, q).as_complex()
        else:
            cache: dict = {}
            for j, (_, mm, nn) in enumerate(cols):
                key = (mm, nn)
                if key not in cache:
                    cache[key] = (
                        cubic_symbol(nn, q) * cubic_symbol(mm, q).conj()
                    ).as_complex()
                ent[i, j] = cache[key]

    workers = _worker_count()
    if workers > 1 and len(rows_q) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_row, range(len(rows_q))))
    else:
        for i in range(len(rows_q)):
            fill_row(i)
    return SieveMatrix(
        rows=tuple(rows_q),
        cols=tuple(cols),
        entries=ent,
        row_weights=np.ones(len(rows_q)),
    )


def export_matrix(
    mat: SieveMatrix, cfg: CubicSieveConfig, path_base: str
) -> tuple[Path, Path]:
    """Binary dump (row-major complex64) plus a small JSON header."""
    bin_path = Path(str(path_base) + ".bin")
    json_path = Path(str(path_base) + ".json")
    bin_path.write_bytes(mat.entries.astype(np.complex64).tobytes(order="C"))
    header = {
        "M": cfg.M,
        "Q": cfg.Q,
        "variant": cfg.variant,
        "dims": list(mat.entries.shape),
    }
    json_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    return bin_path, json_path


def symbol_exponent_table(q: EisensteinInt) -> np.ndarray:
    """(a + bw / q)_3 for every residue pair, as an int8 array of exponents.

    Entry [a mod D, b mod D] with D = N(q) holds the zeta_3 exponent, or
    -1 for the zero symbol.  D annihilates both coordinates mod q, so the
    table is well defined.  The whole D x D grid is reduced to canonical
    remainders in one vectorized pass whose arithmetic mirrors divrem
    exactly; each distinct remainder costs one scalar cubic_symbol call.
    """
    if q.is_zero() or q.norm() % 3 == 0:
        raise RamifiedError("modulus must be nonzero and coprime to 3")
    d = q.norm()
    ar = np.arange(d, dtype=np.int64)
    aa, bb = np.meshgrid(ar, ar, indexing="ij")
    ca, cb = q.a - q.b, -q.b  # conj(q)
    ta = aa * ca - bb * cb
    tb = aa * cb + bb * ca - bb * cb

    def round_half_even(t):
        q0 = t // d
        r0 = t - q0 * d
        bump = (2 * r0 > d) | ((2 * r0 == d) & (q0 % 2 == 1))
        return q0 + bump

    qa = round_half_even(ta)
    qb = round_half_even(tb)
    rema = aa - (qa * q.a - qb * q.b)
    remb = bb - (qa * q.b + qb * q.a - qb * q.b)
    pts = np.stack([rema.ravel(), remb.ravel()], axis=1)
    uniq, inv = np.unique(pts, axis=0, return_inverse=True)
    vals = np.empty(len(uniq), dtype=np.int8)
    for idx in range(len(uniq)):
        ra, rb = int(uniq[idx, 0]), int(uniq[idx, 1])
        v = cubic_symbol(EisensteinInt(ra, rb), q).value
        vals[idx] = -1 if v is None else v
    return vals[inv.ravel()].reshape(d, d)


def _prime_class_reps(max_norm: int) -> list[EisensteinInt]:
    """One representative per prime class with norm <= max_norm, 3 excluded."""
    reps = []
    for p in primerange(2, max_norm + 1):
        if p % 3 == 1:
            pi = split_rational_prime(p)  # norm p: both classes above p
            reps.append(pi)
            reps.append(primary_form(pi.conj()).primary)
        elif p % 3 == 2 and p * p <= max_norm:
            reps.append(EisensteinInt(p, 0))  # inert: norm p**2
    return reps


def sieve_primary_squarefree(
    max_norm: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All primary squarefree elements with norm <= max_norm, vectorized.

    Returns coordinate arrays (a, b) and the norms, sorted by
    (norm, a, b).  Agrees with enumerate_by_norm(squarefree_only,
    primary_only) but scales to sweep sizes: a boolean grid over the
    primary sublattice a = 2 (mod 3), b = 0 (mod 3) is cleared at every
    multiple of a squared prime.
    """
    if max_norm < 1:
        raise ValueError("max_norm must be >= 1")
    c = math.isqrt(4 * max_norm // 3)
    i_lo, i_hi = -((c + 2) // 3), (c - 2) // 3
    j_lo, j_hi = -(c // 3), c // 3
    ni, nj = i_hi - i_lo + 1, j_hi - j_lo + 1
    grid = np.zeros((ni, nj), dtype=bool)
    jb = (3 * (np.arange(nj, dtype=np.int64) + j_lo))[None, :]
    chunk = max(1, (1 << 22) // max(nj, 1))
    for start in range(0, ni, chunk):
        stop = min(start + chunk, ni)
        ia = (2 + 3 * (np.arange(start, stop, dtype=np.int64) + i_lo))[:, None]
        norm = ia * ia - ia * jb + jb * jb
        grid[start:stop] = norm <= max_norm

    for rep in _prime_class_reps(math.isqrt(max_norm)):
        s = rep * rep
        bound = max_norm // s.norm()
        if bound < 1:
            continue
        kb_max = math.isqrt(4 * bound // 3)
        for kb in range(-kb_max, kb_max + 1):
            disc = 4 * bound - 3 * kb * kb
            if disc < 0:
                continue
            rt = math.isqrt(disc)
            ka = np.arange((kb - rt - 1) // 2, (kb + rt) // 2 + 2, dtype=np.int64)
            keep = ka * ka - ka * kb + kb * kb <= bound
            ka = ka[keep]
            if ka.size == 0:
                continue
            za = s.a * ka - s.b * kb
            zb = s.a * kb + s.b * ka - s.b * kb
            ok = (za + zb) % 3 != 0  # multiples sharing a factor with 3 are not on the grid
            za, zb = za[ok], zb[ok]
            for ua, ub in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)):
                pa = ua * za - ub * zb
                pb = ua * zb + ub * za - ub * zb
                sel = (pa % 3 == 2) & (pb % 3 == 0)
                if not np.any(sel):
                    continue
                grid[(pa[sel] - 2) // 3 - i_lo, pb[sel] // 3 - j_lo] = False

    rows, colidx = np.nonzero(grid)
    a = (2 + 3 * (rows + i_lo)).astype(np.int64)
    b = (3 * (colidx + j_lo)).astype(np.int64)
    del rows, colidx
    norm = a * a - a * b + b * b
    order = np.lexsort((b, a, norm))
    return (
        a[order].astype(np.int32),
        b[order].astype(np.int32),
        norm[order],
    )


@dataclass(frozen=True)
class SweepPoint:
    m: int
    delta: float
    ncols: int


def cubic_gram_sweep(
    q_norm: int, snapshots: Sequence[int], batch: int = 20_000
) -> list[SweepPoint]:
    """Delta1(M, Q) at several M values in a single streaming pass.

    Rows are the primary squarefree moduli with N(q) <= q_norm.  Columns
    (primary squarefree n, sorted by norm) stream through in batches; the
    row-side Gram matrix G = Phi Phi^H accumulates, and its top eigenvalue
    is recorded whenever the stream crosses a requested M.  Entries come
    from the per-q exponent tables, so the matrix is exactly the one
    build_cubic_sieve_matrix would produce, without ever materializing it.
    """
    snaps = sorted({int(s) for s in snapshots})
    if not snaps or snaps[0] < 1:
        raise ValueError("snapshots must be positive integers")
    qs = primary_squarefree_elements(q_norm)
    if not qs:
        raise ValueError("no moduli below the requested Q")
    r = len(qs)
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tables = list(pool.map(symbol_exponent_table, qs))
    else:
        tables = [symbol_exponent_table(q) for q in qs]
    mods = [q.norm() for q in qs]
    lut = np.array([0j, _ZETA[0], _ZETA[1], _ZETA[2]], dtype=np.complex128)

    a, b, norms = sieve_primary_squarefree(snaps[-1])
    gram = np.zeros((r, r), dtype=np.complex128)
    out = []
    pos = 0
    v = np.empty((r, batch), dtype=np.complex128)
    for m in snaps:
        end = int(np.searchsorted(norms, m, side="right"))
        while pos < end:
            stop = min(pos + batch, end)
            k = stop - pos
            ab = a[pos:stop]
            bb = b[pos:stop]
            for i in range(r):
                e = tables[i][ab % mods[i], bb % mods[i]]
                v[i, :k] = lut[e.astype(np.int64) + 1]
            chunkv = v[:, :k]
            gram += chunkv @ chunkv.conj().T
            pos = stop
        sym = (gram + gram.conj().T) / 2
        delta = float(np.linalg.eigvalsh(sym)[-1]) if end else 0.0
        out.append(SweepPoint(m=m, delta=delta, ncols=end))
    return out
