"""Reed-Solomon evaluation codes with soft-decision list decoding.

The decoder follows the usual interpolation pipeline:

1. ``kv_multiplicity`` turns a reliability matrix into an integer
   multiplicity matrix by greedily spending ``s`` increments where the
   per-unit reliability gain is largest.
2. ``kv_interpolate`` builds a nonzero bivariate polynomial Q(X, Y) of
   minimal (1, k-1)-weighted degree that vanishes with the prescribed
   multiplicities at the points (x_i, alpha).  The workhorse is an
   incremental basis-reduction pass over the Hasse-derivative constraints;
   a dense null-space solver is kept alongside as a cross-checking oracle.
3. ``kv_factorize`` extracts all Y-roots of Q of degree < k by the
   shift-and-recurse method, and each surviving root is re-encoded and
   scored.

A codeword c is guaranteed to be on the list whenever its multiplicity
score sum_i M[c_i, i] exceeds the weighted degree of Q; the adaptive
entry point doubles ``s`` until a returned word passes the standard
score/norm sufficient condition or a cap is reached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import galois
from .errors import DuplicateEvaluationPoint, EmptyList, InfeasibleConstraints
from .galois import FieldContext

try:  # optional JIT kernel for characteristic-2 interpolation
    from ._kernels import koetter_char2 as _koetter_char2
except Exception:  # pragma: no cover - numba not installed / broken
    _koetter_char2 = None


# ---------------------------------------------------------------------------
# code container and encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RSCode:
    """[n, k] evaluation code: codewords are (f(x_0), ..., f(x_{n-1})),
    deg f < k.  Default evaluation points are the first n elements of the
    field's canonical enumeration."""

    ctx: FieldContext
    n: int
    k: int
    eval_points: tuple = field(default=None)

    def __post_init__(self):
        if not (1 <= self.k <= self.n <= self.ctx.q):
            raise ValueError(f"need 1 <= k <= n <= q, got k={self.k} n={self.n}")
        pts = self.eval_points
        if pts is None:
            pts = tuple(range(self.n))
        else:
            pts = tuple(int(x) for x in pts)
        if len(pts) != self.n:
            raise ValueError("evaluation point count must equal n")
        if len(set(pts)) != self.n:
            raise DuplicateEvaluationPoint("evaluation points must be distinct")
        object.__setattr__(self, "eval_points", pts)
        object.__setattr__(self, "_xs", np.array(pts, dtype=np.int64))
        object.__setattr__(self, "_vand", galois.powers_matrix(self.ctx, self._xs, self.k))

    @property
    def xs(self) -> np.ndarray:
        return self._xs

    def generator_matrix(self) -> np.ndarray:
        return self._vand.T.copy()  # k x n, row j = x**j

    @property
    def min_distance(self) -> int:
        return self.n - self.k + 1


def rs_encode(code: RSCode, message) -> np.ndarray:
    message = np.asarray(message, dtype=np.int64)
    if message.shape != (code.k,):
        raise ValueError(f"message must have length k={code.k}")
    # codeword_i = sum_j message_j * x_i^j
    terms = code.ctx.mul(code._vand, message[None, :])
    return code.ctx.sum(terms, axis=1)


def agreements(code: RSCode, a, b) -> int:
    return int(np.count_nonzero(np.asarray(a) == np.asarray(b)))


# ---------------------------------------------------------------------------
# multiplicity assignment
# ---------------------------------------------------------------------------

def kv_multiplicity(pi: np.ndarray, s: int) -> np.ndarray:
    """Distribute s unit increments greedily: each step raises m at the cell
    maximising pi / (m + 1), ties resolved toward the lower column, then the
    lower row."""
    pi = np.asarray(pi, dtype=np.float64)
    if pi.ndim != 2:
        raise ValueError("reliability matrix must be 2-D (q, n)")
    if s < 0:
        raise ValueError("s must be nonnegative")
    q, n = pi.shape
    m = np.zeros((q, n), dtype=np.int64)
    score = pi.copy()           # pi / (m+1)
    col_best = score.argmax(axis=0)          # first max per column = lowest row
    col_max = score[col_best, np.arange(n)]
    for _ in range(s):
        c = int(np.argmax(col_max))          # first max = lowest column
        r = int(col_best[c])
        m[r, c] += 1
        score[r, c] = pi[r, c] / (m[r, c] + 1)
        col_best[c] = score[:, c].argmax()
        col_max[c] = score[col_best[c], c]
    return m


def multiplicity_cost(m: np.ndarray) -> int:
    m = np.asarray(m, dtype=np.int64)
    return int((m * (m + 1) // 2).sum())


def hard_multiplicity(code: RSCode, word, m: int) -> np.ndarray:
    """Uniform hard-decision multiplicity matrix: m at each received symbol."""
    out = np.zeros((code.ctx.q, code.n), dtype=np.int64)
    out[np.asarray(word, dtype=np.int64), np.arange(code.n)] = m
    return out


# ---------------------------------------------------------------------------
# bivariate polynomials
# ---------------------------------------------------------------------------

class BivariatePoly:
    """Dense bivariate polynomial; coeffs[b, a] multiplies X^a Y^b."""

    def __init__(self, ctx: FieldContext, coeffs):
        self.ctx = ctx
        c = np.asarray(coeffs, dtype=np.int64)
        if c.ndim != 2:
            raise ValueError("coefficient array must be 2-D")
        self.coeffs = _trim2(c)

    def is_zero(self) -> bool:
        return self.coeffs.size == 0 or not self.coeffs.any()

    def terms(self) -> dict:
        out = {}
        for b, a in zip(*np.nonzero(self.coeffs)):
            out[(int(a), int(b))] = int(self.coeffs[b, a])
        return out

    def y_degree(self) -> int:
        nz = np.nonzero(self.coeffs.any(axis=1))[0]
        return int(nz[-1]) if nz.size else -1

    def weighted_degree(self, w: int) -> int:
        """Max of a + w*b over nonzero terms (-1 for the zero polynomial)."""
        best = -1
        for b, a in zip(*np.nonzero(self.coeffs)):
            best = max(best, int(a) + w * int(b))
        return best

    def evaluate(self, x: int, y: int) -> int:
        ctx = self.ctx
        acc = 0
        for b in range(self.coeffs.shape[0] - 1, -1, -1):
            row_val = int(galois.poly_eval(ctx, self.coeffs[b], x))
            acc = ctx.add(ctx.mul(acc, y), row_val)
        return int(acc)

    def hasse_evaluate(self, a: int, b: int, x: int, y: int) -> int:
        """Coefficient of X^a Y^b in the Taylor expansion around (x, y)."""
        ctx = self.ctx
        ny, nx = self.coeffs.shape
        acc = 0
        for t in range(b, ny):
            cb = ctx.binom(t, b)
            if cb == 0:
                continue
            yf = ctx.mul(cb, ctx.pow(y, t - b)) if t > b else cb
            if yf == 0:
                continue
            inner = 0
            for r in range(a, nx):
                g = int(self.coeffs[t, r])
                if g == 0:
                    continue
                ca = ctx.binom(r, a)
                if ca == 0:
                    continue
                inner = ctx.add(inner, ctx.mul(ctx.mul(ca, g), ctx.pow(x, r - a)))
            acc = ctx.add(acc, ctx.mul(yf, inner))
        return int(acc)

    def __repr__(self):
        return f"BivariatePoly(ydeg={self.y_degree()}, terms={len(self.terms())})"


def _trim2(c: np.ndarray) -> np.ndarray:
    if c.size == 0:
        return c.reshape(0, 0)
    rows = np.nonzero(c.any(axis=1))[0]
    cols = np.nonzero(c.any(axis=0))[0]
    if rows.size == 0:
        return c[:0, :0]
    return np.ascontiguousarray(c[: rows[-1] + 1, : cols[-1] + 1])


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------

def wdeg_budget(cost: int, w: int):
    """Smallest degree budget whose monomial count beats ``cost``.

    Returns (delta, y_cap): delta is minimal with
    #{(a, b): a + w*b <= delta} > cost, and y_cap = delta // w is the
    Y-degree bound of such monomials (for w == 0 the Y powers are free,
    so delta = 0 and the cap defaults to cost)."""
    if w == 0:
        return 0, cost
    delta = 0
    while True:
        lcap = delta // w
        count = (lcap + 1) * (delta + 1) - w * lcap * (lcap + 1) // 2
        if count > cost:
            return delta, lcap
        delta += 1


def _constraint_arrays(code: RSCode, m: np.ndarray):
    """Flatten a multiplicity matrix into per-constraint arrays
    (x, y, a, b), ordered by coordinate, then root, then Hasse order."""
    rows, cols = np.nonzero(m.T)  # transpose: iterate coordinate-major
    xs, ys, aa, bb = [], [], [], []
    for i, alpha in zip(rows, cols):
        mult = int(m[alpha, i])
        x = code.eval_points[i]
        for tot in range(mult):
            for a in range(tot + 1):
                xs.append(x)
                ys.append(int(alpha))
                aa.append(a)
                bb.append(tot - a)
    return (np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64),
            np.array(aa, dtype=np.int64), np.array(bb, dtype=np.int64))


def kv_interpolate(code: RSCode, m: np.ndarray) -> BivariatePoly:
    """Minimal (1, k-1)-weighted-degree nonzero Q vanishing to the
    prescribed multiplicities; deterministic."""
    ctx = code.ctx
    m = np.asarray(m, dtype=np.int64)
    if m.shape != (ctx.q, code.n):
        raise ValueError(f"multiplicity matrix must be (q, n) = ({ctx.q}, {code.n})")
    if np.any(m < 0):
        raise ValueError("negative multiplicity")
    w = code.k - 1
    cost = multiplicity_cost(m)
    if cost == 0:
        return BivariatePoly(ctx, [[1]])
    delta, ycap = wdeg_budget(cost, w)
    xs, ys, aa, bb = _constraint_arrays(code, m)

    # Individual basis polynomials can transiently outgrow the final budget,
    # so the X-capacity is a starting guess that doubles on overflow.
    capx = delta + max(w, 1) + 16
    while True:
        if ctx.p == 2 and _koetter_char2 is not None:
            coeffs, wd, ok = _koetter_char2(
                xs, ys, aa, bb, w, ycap, ctx.exp_table, ctx.log_table, ctx.q, capx)
        else:
            coeffs, wd, ok = _koetter_reference(code, xs, ys, aa, bb, w, ycap, capx)
        if ok:
            break
        capx *= 2
    q = BivariatePoly(ctx, coeffs)
    if q.is_zero():
        raise InfeasibleConstraints("interpolation produced the zero polynomial")
    return q


def _koetter_reference(code: RSCode, xs, ys, aa, bb, w, ycap, capx):
    """Pure-numpy incremental interpolation, any characteristic.

    Returns (coeff_array, wdeg, ok); ok is False on X-capacity overflow so
    the caller can retry with more room (mirrors the JIT kernel's contract).
    """
    ctx = code.ctx
    nb = ycap + 1
    G = np.zeros((nb, nb, capx), dtype=np.int64)
    for j in range(nb):
        G[j, j, 0] = 1
    wdeg = np.array([j * w for j in range(nb)], dtype=np.int64)
    xdeg = np.zeros(nb, dtype=np.int64)
    ydeg = np.arange(nb, dtype=np.int64)

    for x, y, a, b in zip(xs, ys, aa, bb):
        xmax = int(xdeg.max())
        ymax = int(ydeg.max())
        wx = np.zeros(xmax + 1, dtype=np.int64)
        xp = 1
        for r in range(a, xmax + 1):
            wx[r] = ctx.mul(ctx.binom(r, a), xp)
            xp = ctx.mul(xp, int(x))
        wy = np.zeros(ymax + 1, dtype=np.int64)
        yp = 1
        for t in range(b, ymax + 1):
            wy[t] = ctx.mul(ctx.binom(t, b), yp)
            yp = ctx.mul(yp, int(y))
        wmat = ctx.mul(wy[:, None], wx[None, :])
        prods = ctx.mul(G[:, : ymax + 1, : xmax + 1], wmat[None, :, :])
        delta_j = ctx.sum(prods.reshape(nb, -1), axis=1)

        jstar = -1
        for j in range(nb):
            if delta_j[j] != 0 and (jstar < 0 or wdeg[j] < wdeg[jstar]):
                jstar = j
        if jstar < 0:
            continue
        ds = int(delta_j[jstar])
        gs = G[jstar].copy()
        for j in range(nb):
            dj = int(delta_j[j])
            if j == jstar or dj == 0:
                continue
            G[j] = ctx.sub(ctx.mul(ds, G[j]), ctx.mul(dj, gs))
            xdeg[j] = max(xdeg[j], xdeg[jstar])
            ydeg[j] = max(ydeg[j], ydeg[jstar])
        # g_jstar <- (X - x) g_jstar
        if xdeg[jstar] + 1 >= capx:
            return G[0, :1, :1], -1, False
        shifted = np.zeros_like(gs)
        shifted[:, 1:] = gs[:, :-1]
        G[jstar] = ctx.sub(shifted, ctx.mul(int(x), gs))
        xdeg[jstar] += 1
        wdeg[jstar] += 1

    best = 0
    for j in range(1, nb):
        if wdeg[j] < wdeg[best]:
            best = j
    return G[best], int(wdeg[best]), True


def interpolate_dense_oracle(code: RSCode, m: np.ndarray) -> BivariatePoly:
    """Reference interpolation by explicit null-space computation.

    Builds the full linear system over all monomials with weighted degree
    within budget (ordered by weighted degree, then Y-degree) and returns
    the kernel vector attached to the first free column, which realises the
    minimal possible leading monomial.  Exponential-care-free but O(C^3):
    use in tests only.
    """
    ctx = code.ctx
    w = code.k - 1
    cost = multiplicity_cost(m)
    if cost == 0:
        return BivariatePoly(ctx, [[1]])
    delta, ycap = wdeg_budget(cost, w)
    monos = [(a, b) for b in range(ycap + 1)
             for a in range(0, delta - w * b + 1)]
    monos.sort(key=lambda ab: (ab[0] + w * ab[1], ab[1]))
    xs, ys, aa, bb = _constraint_arrays(code, m)
    A = np.zeros((len(xs), len(monos)), dtype=np.int64)
    for row in range(len(xs)):
        x, y, a, b = int(xs[row]), int(ys[row]), int(aa[row]), int(bb[row])
        for col, (r, t) in enumerate(monos):
            if r < a or t < b:
                continue
            c = ctx.mul(ctx.binom(r, a), ctx.binom(t, b))
            if c == 0:
                continue
            val = ctx.mul(c, ctx.mul(ctx.pow(x, r - a), ctx.pow(y, t - b)))
            A[row, col] = val
    ns = galois.null_space(ctx, A)
    if ns.shape[0] == 0:
        raise InfeasibleConstraints("dense oracle found no kernel vector")
    vec = ns[0]
    coeffs = np.zeros((ycap + 1, delta + 1 if w else 1), dtype=np.int64)
    for (r, t), v in zip(monos, vec):
        if v:
            coeffs[t, r] = v
    return BivariatePoly(ctx, coeffs)


def hasse_vanishes(q: BivariatePoly, code: RSCode, m: np.ndarray) -> bool:
    """Check every prescribed Hasse derivative of q is zero (test oracle)."""
    xs, ys, aa, bb = _constraint_arrays(code, m)
    for x, y, a, b in zip(xs, ys, aa, bb):
        if q.hasse_evaluate(int(a), int(b), int(x), int(y)) != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# factorization: Y-roots of Q of degree < k
# ---------------------------------------------------------------------------

def _y_root_candidates(ctx: FieldContext, col) -> list:
    """All gamma with R(gamma) == 0 for a univariate R given by coeffs."""
    col = galois.poly_trim(col)
    if len(col) == 0:
        return list(range(ctx.q))
    vals = galois.poly_eval(ctx, col, np.arange(ctx.q, dtype=np.int64))
    return [int(g) for g in np.nonzero(vals == 0)[0]]


def _shift_y(ctx: FieldContext, d: np.ndarray, gamma: int) -> np.ndarray:
    """Substitute Y <- gamma + X*Y in the dense array d."""
    ny, nx = d.shape
    out = np.zeros((ny, nx + ny), dtype=np.int64)
    for s_ in range(ny):
        combo = np.zeros(nx, dtype=np.int64)
        gp = 1
        for t in range(s_, ny):
            c = ctx.mul(ctx.binom(t, s_), gp)
            if c:
                combo = ctx.add(combo, ctx.mul(c, d[t]))
            gp = ctx.mul(gp, gamma)
        out[s_, s_: s_ + nx] = combo
    return _trim2(out)


def kv_factorize(q: BivariatePoly, k: int, max_nodes: int = 100000) -> list:
    """All message polynomials f (deg < k) with Q(X, f(X)) identically zero.

    Each result is a length-k coefficient vector.  ``max_nodes`` bounds the
    recursion as a safety valve; it is far above anything reachable by the
    codes in this package.
    """
    ctx = q.ctx
    if q.is_zero():
        return []
    results = []
    seen = set()
    budget = [max_nodes]

    coeffs0 = _trim2(q.coeffs)

    def check_and_add(prefix):
        f = np.zeros(k, dtype=np.int64)
        f[: len(prefix)] = prefix
        key = tuple(int(v) for v in f)
        if key in seen:
            return
        # exact composition Q(X, f(X)) == 0
        acc = np.zeros(0, dtype=np.int64)
        fpoly = galois.poly_trim(f)
        for b in range(coeffs0.shape[0] - 1, -1, -1):
            acc = galois.poly_add(ctx, galois.poly_mul(ctx, acc, fpoly),
                                  galois.poly_trim(coeffs0[b]))
        if len(acc) == 0:
            seen.add(key)
            results.append(f)

    def rec(d, depth, prefix):
        if budget[0] <= 0:
            return
        budget[0] -= 1
        # strip the largest X power dividing d
        colnz = np.nonzero(d.any(axis=0))[0]
        if colnz.size == 0:
            return
        if colnz[0] > 0:
            d = d[:, colnz[0]:]
        for gamma in _y_root_candidates(ctx, d[:, 0]):
            cand = prefix + [gamma]
            if depth == k - 1:
                check_and_add(cand)
            else:
                rec(_shift_y(ctx, d, gamma), depth + 1, cand)

    rec(coeffs0, 0, [])
    return results


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------

def kv_success_predicate(pi: np.ndarray, codeword, k: int) -> bool:
    """Sufficient condition for the word to be interpolation-reachable:
    <pi, 1_c> >= sqrt((k-1) * <pi, pi>)."""
    pi = np.asarray(pi, dtype=np.float64)
    cw = np.asarray(codeword, dtype=np.int64)
    score = float(pi[cw, np.arange(pi.shape[1])].sum())
    return score >= np.sqrt((k - 1) * float((pi * pi).sum()))


def _decode_round(code: RSCode, pi: np.ndarray, s: int):
    m = kv_multiplicity(pi, s)
    q = kv_interpolate(code, m)
    out = []
    idx = np.arange(code.n)
    for msg in kv_factorize(q, code.k):
        cw = rs_encode(code, msg)
        score = int(m[cw, idx].sum())
        out.append((cw, score, msg))
    out.sort(key=lambda t: (-t[1], tuple(int(v) for v in t[0])))
    return out


ADAPTIVE_BASE_FACTOR = 2
ADAPTIVE_CAP_FACTOR = 64


def kv_decode(code: RSCode, pi: np.ndarray, s: int | None = None,
              with_messages: bool = False):
    """Soft-decision list decoding.

    With explicit ``s``, runs one round.  Otherwise starts at s = 2n and
    doubles until some returned word satisfies the success predicate or
    s would exceed 64n; the last non-empty list wins.  Returns
    [(codeword, score)] ranked by score (descending), ties broken by
    lexicographically smaller codeword.  Raises EmptyList when nothing
    is found.
    """
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (code.ctx.q, code.n):
        raise ValueError(f"reliability matrix must be ({code.ctx.q}, {code.n})")
    if s is not None:
        rounds = [int(s)]
    else:
        rounds = []
        val = ADAPTIVE_BASE_FACTOR * code.n
        while val <= ADAPTIVE_CAP_FACTOR * code.n:
            rounds.append(val)
            val *= 2
    best = []
    for s_round in rounds:
        res = _decode_round(code, pi, s_round)
        if res:
            best = res
            if any(kv_success_predicate(pi, cw, code.k) for cw, _, _ in res):
                break
    if not best:
        raise EmptyList(f"no candidate within budget for [{code.n},{code.k}] decode")
    if with_messages:
        return [(cw, score, msg) for cw, score, msg in best]
    return [(cw, score) for cw, score, _ in best]


def kv_decode_hard(code: RSCode, word, m: int, with_messages: bool = False):
    """Hard-decision list decoding: uniform multiplicity m on the received
    symbols (equivalent to kv_decode on the hard reliability matrix with
    s = m*n, since the greedy spreads indistinguishable peaks evenly)."""
    word = np.asarray(word, dtype=np.int64)
    mm = hard_multiplicity(code, word, m)
    q = kv_interpolate(code, mm)
    out = []
    idx = np.arange(code.n)
    for msg in kv_factorize(q, code.k):
        cw = rs_encode(code, msg)
        out.append((cw, m * agreements(code, cw, word), msg))
    out.sort(key=lambda t: (-t[1], tuple(int(v) for v in t[0])))
    if not out:
        raise EmptyList(f"empty hard-decision list for [{code.n},{code.k}]")
    if with_messages:
        return out
    return [(cw, score) for cw, score, _ in out]
