"""Finite-field arithmetic on integer-indexed elements, numpy-first.

Elements of GF(p^m) are represented by integers 0..q-1: the element with
coefficient vector (c0, c1, ..., c_{m-1}) over GF(p) (c0 = constant term) has
index sum(c_i * p**i).  For prime fields this is just the residue.  All
per-element operations accept plain ints or numpy arrays and broadcast.

Multiplication goes through exp/log tables built from a fixed generator, so
construction is O(q) and vectorised products are table gathers.  Extension
moduli come from a baked-in table of classic minimal-weight irreducibles
(x^8+x^4+x^3+x+1 for GF(256), x^3+x+1 for GF(8), ...); every modulus --
baked-in or user-supplied -- is re-verified irreducible at construction time
so a corrupted table can never produce a silently broken field.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import (DivisionByZero, DuplicateEvaluationPoint, NotPrimePower,
                     ReducibleModulus, TooLarge)

MAX_ORDER = 1 << 16

# Lowest-by-integer-encoding monic irreducibles, LSB first (constant term
# first, leading 1 last).  These agree with the usual published tables:
# (2,8) is 0x11B, (2,4) is x^4+x+1, etc.  Verified again on every load.
_BAKED_MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 0, 0, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (2, 8): (1, 1, 0, 1, 1, 0, 0, 0, 1),
    (2, 9): (1, 1, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 10): (1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1),
    (2, 11): (1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 12): (1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 13): (1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 14): (1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 15): (1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 16): (1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 1, 0, 0, 1),
    (3, 5): (1, 2, 0, 0, 0, 1),
    (5, 2): (2, 0, 1),
    (5, 3): (1, 1, 0, 1),
    (7, 2): (1, 0, 1),
    (7, 3): (2, 0, 0, 1),
    (11, 2): (1, 0, 1),
    (13, 2): (2, 0, 1),
}

_TABLE_LIMIT = 1 << 12  # dense q x q tables only below this order


def _factor_prime_power(q: int):
    """Return (p, m) with q == p**m, or None if q is not a prime power."""
    if q < 2:
        return None
    for p in range(2, math.isqrt(q) + 1):
        if q % p == 0:
            m = 0
            while q % p == 0:
                q //= p
                m += 1
            return (p, m) if q == 1 else None
    return (q, 1)  # q itself prime


def _prime_factors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# --- polynomial-over-GF(p) helpers used only during construction ------------

def _pmulmod(a, b, mod, p):
    m = len(mod) - 1
    res = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                res[i + j] = (res[i + j] + ai * bj) % p
    for i in range(len(res) - 1, m - 1, -1):
        c = res[i]
        if c:
            for j in range(m + 1):
                res[i - m + j] = (res[i - m + j] - c * mod[j]) % p
    res = res[:m]
    while res and res[-1] == 0:
        res.pop()
    return res


def _ppowmod(base, e, mod, p):
    r, b = [1], list(base)
    while e:
        if e & 1:
            r = _pmulmod(r, b, mod, p)
        b = _pmulmod(b, b, mod, p)
        e >>= 1
    return r


def _pgcd(a, b, p):
    def trim(x):
        while x and x[-1] == 0:
            x.pop()
        return x

    a, b = trim(list(a)), trim(list(b))
    while b:
        inv = pow(b[-1], p - 2, p)
        while a and len(a) >= len(b):
            c = (a[-1] * inv) % p
            off = len(a) - len(b)
            for j in range(len(b)):
                a[off + j] = (a[off + j] - c * b[j]) % p
            a = trim(a)
        a, b = b, a
    return a


def _is_irreducible(mod, p):
    """Rabin's test for a monic polynomial over GF(p), digits LSB first."""
    m = len(mod) - 1
    if m < 1 or mod[-1] != 1:
        return False
    if m == 1:
        return True
    x = [0, 1]

    def minus_x(poly):
        poly = list(poly) + [0] * max(0, 2 - len(poly))
        poly[1] = (poly[1] - 1) % p
        while poly and poly[-1] == 0:
            poly.pop()
        return poly

    if minus_x(_ppowmod(x, p ** m, mod, p)):
        return False
    for r in _prime_factors(m):
        g = _pgcd(minus_x(_ppowmod(x, p ** (m // r), mod, p)) or [0], mod, p)
        if len(g) != 1:
            return False
    return True


def _smallest_irreducible(p, m):
    """Deterministic fallback for (p, m) pairs missing from the baked table."""
    for low in range(p ** m):
        digits = []
        n = low
        while n:
            digits.append(n % p)
            n //= p
        digits += [0] * (m - len(digits))
        digits.append(1)
        if _is_irreducible(digits, p):
            return tuple(digits)
    raise ReducibleModulus(f"no irreducible of degree {m} over GF({p})?")


class FieldContext:
    """GF(q) with exp/log tables; q = p**m, 2 <= q <= 2**16.

    Not meant to be constructed directly -- use :func:`field_new`, which
    caches contexts per (q, modulus).
    """

    def __init__(self, q: int, modulus=None):
        pm = _factor_prime_power(q)
        if pm is None or q < 2:
            raise NotPrimePower(f"{q} is not a prime power in [2, 2^16]")
        if q > MAX_ORDER:
            raise TooLarge(f"field order {q} exceeds 2^16")
        self.q = q
        self.p, self.m = pm

        if self.m == 1:
            if modulus is not None:
                raise ReducibleModulus("prime fields take no modulus")
            self.modulus = None
        else:
            if modulus is None:
                modulus = _BAKED_MODULI.get((self.p, self.m))
                if modulus is None:
                    modulus = _smallest_irreducible(self.p, self.m)
            modulus = tuple(int(c) % self.p for c in modulus)
            if len(modulus) != self.m + 1 or modulus[-1] != 1:
                raise ReducibleModulus(
                    f"modulus must be monic of degree {self.m}, got {modulus}")
            if not _is_irreducible(list(modulus), self.p):
                raise ReducibleModulus(f"{modulus} is reducible over GF({self.p})")
            self.modulus = modulus

        self._build_add()
        self._build_mul()
        self._mul_table = None
        self._add_outer = None

    # -- construction internals ----------------------------------------

    def _build_add(self):
        q, p, m = self.q, self.p, self.m
        if m == 1 or p == 2:
            self._digits = None
            self._pows = None
        else:
            idx = np.arange(q, dtype=np.int64)
            pows = p ** np.arange(m, dtype=np.int64)
            self._digits = (idx[:, None] // pows[None, :]) % p  # (q, m)
            self._pows = pows

    def _raw_mul_int(self, a: int, b: int) -> int:
        """Schoolbook product of two element indices (construction only)."""
        p, m = self.p, self.m
        if m == 1:
            return (a * b) % self.q
        da = [(a // p ** i) % p for i in range(m)]
        db = [(b // p ** i) % p for i in range(m)]
        prod = _pmulmod(da, db, list(self.modulus), p)
        return sum(c * p ** i for i, c in enumerate(prod))

    def _build_mul(self):
        q = self.q
        order = q - 1
        factors = _prime_factors(order)
        gen = None
        for cand in range(2, q):
            ok = True
            for r in factors:
                if self._int_pow(cand, order // r) == 1:
                    ok = False
                    break
            if ok:
                gen = cand
                break
        if gen is None:  # q == 2
            gen = 1
        self.generator = gen

        exp = np.empty(2 * order if order else 2, dtype=np.int64)
        x = 1
        for i in range(order):
            exp[i] = x
            x = self._raw_mul_int(x, gen)
        assert x == 1, "generator order mismatch"
        exp[order:2 * order] = exp[:order]
        if order == 0:
            exp[:] = 1
        log = np.zeros(q, dtype=np.int64)
        log[exp[:max(order, 1)]] = np.arange(max(order, 1))
        log[1] = 0
        self._exp, self._log = exp, log

    def _int_pow(self, a, e):
        r = 1
        while e:
            if e & 1:
                r = self._raw_mul_int(r, a)
            a = self._raw_mul_int(a, a)
            e >>= 1
        return r

    # -- scalar/array arithmetic ----------------------------------------

    def add(self, a, b):
        if self.p == 2:
            return np.bitwise_xor(a, b)
        if self.m == 1:
            return (np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64)) % self.q
        da = self._digits[np.asarray(a, dtype=np.int64)]
        db = self._digits[np.asarray(b, dtype=np.int64)]
        return ((da + db) % self.p) @ self._pows

    def neg(self, a):
        if self.p == 2:
            return np.asarray(a) if isinstance(a, np.ndarray) else a
        if self.m == 1:
            return (self.q - np.asarray(a, dtype=np.int64)) % self.q
        da = self._digits[np.asarray(a, dtype=np.int64)]
        return ((self.p - da) % self.p) @ self._pows

    def sub(self, a, b):
        if self.p == 2:
            return np.bitwise_xor(a, b)
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self._exp[self._log[a] + self._log[b]]
        zero = (a == 0) | (b == 0)
        if zero.ndim == 0:
            return 0 if zero else int(out)
        return np.where(zero, 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DivisionByZero("0 has no multiplicative inverse")
        out = self._exp[(self.q - 1) - self._log[a]]
        return out if out.ndim else int(out)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        a = np.asarray(a, dtype=np.int64)
        order = self.q - 1
        if e == 0:
            out = np.ones_like(a)
            return out if out.ndim else 1
        if np.any(a == 0):
            if e < 0:
                raise DivisionByZero("0 to a negative power")
            base = np.where(a == 0, 0, 1)
        else:
            base = None
        ee = e % order if order else 0
        out = self._exp[(self._log[a] * ee) % max(order, 1)]
        if base is not None:
            out = out * base  # zero out 0^e
        return out if out.ndim else int(out)

    def scalar(self, c: int):
        """Embed a small integer (repeated-1 sum) as a field element index."""
        return c % self.p

    def binom(self, n: int, k: int):
        """Binomial coefficient reduced into the field (Lucas' theorem)."""
        if k < 0 or k > n:
            return 0
        if self.p == 2:
            return 1 if (n & k) == k else 0
        r = 1
        p = self.p
        while n or k:
            ni, ki = n % p, k % p
            if ki > ni:
                return 0
            r = (r * math.comb(ni, ki)) % p
            n //= p
            k //= p
        return r

    # -- reductions and dense tables -------------------------------------

    def sum(self, arr, axis=None):
        """Field-sum reduction of an array of element indices."""
        arr = np.asarray(arr, dtype=np.int64)
        if self.p == 2:
            return np.bitwise_xor.reduce(arr, axis=axis)
        if self.m == 1:
            return arr.sum(axis=axis) % self.q
        if axis is None:
            arr = arr.ravel()
            axis = 0
        d = self._digits[arr].sum(axis=axis % arr.ndim) % self.p
        return d @ self._pows

    @property
    def mul_table(self):
        if self._mul_table is None:
            if self.q > _TABLE_LIMIT:
                raise TooLarge(f"dense mul table capped at q={_TABLE_LIMIT}")
            idx = np.arange(self.q)
            self._mul_table = self.mul(idx[:, None], idx[None, :]).astype(np.int32)
        return self._mul_table

    @property
    def add_outer(self):
        """(q, q) table with add_outer[a, b] = a + b; used by column transforms."""
        if self._add_outer is None:
            idx = np.arange(self.q)
            if self.p == 2:
                self._add_outer = np.bitwise_xor.outer(idx, idx).astype(np.int32)
            else:
                self._add_outer = self.add(idx[:, None], idx[None, :]).astype(np.int32)
        return self._add_outer

    @property
    def exp_table(self):
        return self._exp

    @property
    def log_table(self):
        return self._log

    def __repr__(self):
        if self.m == 1:
            return f"GF({self.q})"
        return f"GF({self.p}^{self.m}; modulus={self.modulus})"

    def __eq__(self, other):
        return (isinstance(other, FieldContext)
                and self.q == other.q and self.modulus == other.modulus)

    def __hash__(self):
        return hash((self.q, self.modulus))


@lru_cache(maxsize=None)
def _cached_ctx(q: int, modulus):
    return FieldContext(q, modulus)


def field_new(q: int, modulus=None) -> FieldContext:
    """Build (or fetch a cached) GF(q) context.

    q must be a prime power; extension fields use the baked-in canonical
    modulus unless one is supplied explicitly.
    """
    if modulus is not None:
        modulus = tuple(int(c) for c in modulus)
    return _cached_ctx(int(q), modulus)


def field_arith(ctx: FieldContext, op: str, a, b=None):
    """String-dispatch arithmetic: op in {add, sub, mul, div, neg, inv, pow}."""
    unary = {"neg": ctx.neg, "inv": ctx.inv}
    if op in unary:
        if b is not None:
            raise ValueError(f"{op} is unary")
        return unary[op](a)
    binary = {"add": ctx.add, "sub": ctx.sub, "mul": ctx.mul,
              "div": ctx.div, "pow": ctx.pow}
    if op not in binary:
        raise ValueError(f"unknown op {op!r}")
    if b is None:
        raise ValueError(f"{op} is binary")
    return binary[op](a, b)


# ---------------------------------------------------------------------------
# univariate polynomials: plain numpy arrays of element indices, lowest
# degree first.  The zero polynomial is an empty array.
# ---------------------------------------------------------------------------

def poly_trim(coeffs):
    c = np.asarray(coeffs, dtype=np.int64)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else c[:0]


def poly_deg(coeffs):
    c = poly_trim(coeffs)
    return len(c) - 1  # zero polynomial gets -1


def poly_add(ctx, a, b):
    a, b = np.asarray(a), np.asarray(b)
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=np.int64)
    out[: len(a)] = a
    out[: len(b)] = ctx.add(out[: len(b)], b)
    return poly_trim(out)


def poly_scale(ctx, a, c):
    return poly_trim(ctx.mul(np.asarray(a), c))


def poly_mul(ctx, a, b):
    a, b = poly_trim(a), poly_trim(b)
    if not len(a) or not len(b):
        return a[:0]
    out = np.zeros(len(a) + len(b) - 1, dtype=np.int64)
    for i, ai in enumerate(a):
        if ai:
            out[i: i + len(b)] = ctx.add(out[i: i + len(b)], ctx.mul(int(ai), b))
    return out


def poly_eval(ctx, coeffs, xs):
    """Horner evaluation; xs may be a scalar or an array."""
    xs = np.asarray(xs, dtype=np.int64)
    out = np.zeros_like(xs)
    for c in np.asarray(coeffs)[::-1]:
        out = ctx.add(ctx.mul(out, xs), int(c))
    return out if out.ndim else int(out)


def _synthetic_div(ctx, coeffs, r):
    """Divide by (X - r); returns quotient, assuming it divides or not caring
    about the remainder."""
    c = np.asarray(coeffs, dtype=np.int64)
    out = np.zeros(len(c) - 1, dtype=np.int64)
    acc = 0
    for i in range(len(c) - 1, 0, -1):
        acc = ctx.add(int(c[i]), ctx.mul(r, acc))
        out[i - 1] = acc
    return out


def poly_interp(ctx, xs, ys):
    """Lagrange interpolation through distinct points; returns trimmed coeffs.

    Cost is O(n^2) field operations, which is fine for the code lengths in
    this package (n <= q <= 2^16, and in practice n <= 1024).
    """
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if len(xs) != len(ys):
        raise ValueError("xs and ys must have equal length")
    if len(np.unique(xs)) != len(xs):
        raise DuplicateEvaluationPoint("repeated x coordinate")
    n = len(xs)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    # master = prod (X - x_i)
    master = np.array([1], dtype=np.int64)
    for x in xs:
        shifted = np.concatenate(([0], master))
        scaled = np.concatenate((ctx.mul(ctx.neg(int(x)), master), [0]))
        master = ctx.add(shifted, scaled)
    out = np.zeros(n, dtype=np.int64)
    for x, y in zip(xs, ys):
        if y == 0:
            continue
        qpoly = _synthetic_div(ctx, master, int(x))  # prod_{j != i} (X - x_j)
        denom = poly_eval(ctx, qpoly, int(x))
        out = ctx.add(out, ctx.mul(ctx.div(int(y), denom), qpoly))
    return poly_trim(out)


def poly_eval_interp(ctx, mode: str, *args):
    """Dispatcher: ('eval', coeffs, xs) or ('interp', xs, ys)."""
    if mode == "eval":
        return poly_eval(ctx, *args)
    if mode == "interp":
        return poly_interp(ctx, *args)
    raise ValueError(f"unknown mode {mode!r}")


def powers_matrix(ctx, xs, k):
    """Vandermonde block: column j holds xs**j, j = 0..k-1."""
    xs = np.asarray(xs, dtype=np.int64)
    out = np.zeros((len(xs), k), dtype=np.int64)
    if k == 0:
        return out
    out[:, 0] = 1
    for j in range(1, k):
        out[:, j] = ctx.mul(out[:, j - 1], xs)
    return out


# ---------------------------------------------------------------------------
# dense linear algebra over GF(q)
# ---------------------------------------------------------------------------

def mat_mul(ctx, A, B):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for k in range(A.shape[1]):
        out = ctx.add(out, ctx.mul(A[:, k][:, None], B[k][None, :]))
    return out


def mat_vec(ctx, A, v):
    return mat_mul(ctx, A, np.asarray(v, dtype=np.int64)[:, None])[:, 0]


def vec_mat(ctx, v, A):
    return mat_mul(ctx, np.asarray(v, dtype=np.int64)[None, :], A)[0]


def rref(ctx, A):
    """Reduced row echelon form; returns (R, pivot_columns)."""
    R = np.array(A, dtype=np.int64, copy=True)
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            R[[r, pr]] = R[[pr, r]]
        R[r] = ctx.mul(ctx.inv(int(R[r, c])), R[r])
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        if others.size:
            R[others] = ctx.sub(R[others], ctx.mul(R[others, c][:, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def rank(ctx, A):
    return len(rref(ctx, A)[1])


def null_space(ctx, A):
    """Rows span the right kernel {x : A x^T = 0}."""
    A = np.asarray(A, dtype=np.int64)
    R, pivots = rref(ctx, A)
    cols = A.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, pc in enumerate(pivots):
            basis[i, pc] = ctx.neg(int(R[r, f]))
    return basis


def mat_inv(ctx, A):
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    aug = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
    R, pivots = rref(ctx, aug)
    if pivots[:n] != list(range(n)):
        raise DivisionByZero("matrix is singular")
    return R[:, n:]


def solve(ctx, A, b):
    """One solution x of A x = b, or None if inconsistent."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    aug = np.concatenate([A, b[:, None]], axis=1)
    R, pivots = rref(ctx, aug)
    n = A.shape[1]
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = R[r, n]
    return x


def row_space_equal(ctx, A, B):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[1] != B.shape[1]:
        return False
    ra = rref(ctx, A)
    rb = rref(ctx, B)
    if ra[1] != rb[1]:
        return False
    na, nb = len(ra[1]), len(rb[1])
    return bool(np.array_equal(ra[0][:na], rb[0][:nb]))
