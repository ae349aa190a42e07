"""Expected reliability-mass analysis of the recursive channel transforms.

For a symbol sent through the q-ary symmetric channel, the decoder sees a
reliability column pi; the useful figure of merit is E(||pi||^2), which for
symmetric channels equals E(pi(true symbol)).  Each decoding stage of a
two-level (U|U+V) tree sees a transformed channel, labelled here

    BASE            the raw channel
    U, V            after one product / sum stage
    U1, V1, U2, V2  the four second-level stages (U1 deepest-left)

For every label this module carries two closed forms:

* ``paper``   -- the published large-q expressions these codes were designed
  around (kept verbatim, including two that disagree with re-derivation);
* ``derived`` -- an independent re-derivation by summing over error-pattern
  cases, with each case's limiting column written out explicitly.

plus an exact finite-q Monte-Carlo estimator that runs the actual transform
chain on sparse column representations.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import QSCParams, qsc_matrix, qsc_sample
from .errors import DecodeFailure, EmptyList
from .galois import FieldContext, field_new
from .uuv import CodeNode, Leaf, Node, uuv_encode, uuv_soft_decode

LABELS = ("BASE", "U", "V", "U1", "V1", "U2", "V2")


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _qsc_degraded(p: float) -> float:
    """Error rate of the difference of two independent channel uses."""
    return 2.0 * p - p * p


def _u_form(p: float) -> float:
    return (2.0 + p) * (1.0 - p) ** 2 / (2.0 - p)


def _paper_form(label: str, p: float) -> float:
    if label == "BASE":
        return (1.0 - p) ** 2
    if label == "U":
        return _u_form(p)
    if label == "V":
        return (1.0 - p) ** 4
    if label == "U1":
        # kept exactly as published; negative on (0,1) -- see the derived
        # form for the sign-corrected version.
        return (5 * p ** 3 - 6 * p ** 2 - 5 * p - 4) * (1.0 - p) ** 2 / (4.0 - 3.0 * p)
    if label == "V1":
        # also kept as published; disagrees with the case-sum derivation.
        return (1.0 - p) ** 4 * (2 + 3 * p + 8 * p ** 2 - 4 * p ** 3) / (2.0 - p)
    if label == "U2":
        return _u_form(_qsc_degraded(p))
    if label == "V2":
        return (1.0 - p) ** 8
    raise ValueError(f"unknown channel label {label!r}")


# Case tables for the derived forms.  Each case is (probability, spikes):
# ``spikes`` lists the nonzero entries of the limiting (q -> infinity)
# reliability column for that error pattern; its squared norm is the case's
# contribution.  A clean/deterministic column is the single spike [1.0].

def product_cases(p: float):
    """One product stage: two independent looks at a symbol."""
    w = (1.0 - p) / (2.0 - p)
    return [
        ((1.0 - p) ** 2, [1.0]),      # both looks clean: column snaps to the truth
        (2 * p * (1.0 - p), [w, w]),  # one look off: mass splits over two candidates
        (p * p, [w, w]),              # both looks off (distinct lies dominate as q grows)
    ]


def sum_cases(p: float):
    """One sum stage: the difference sees a symmetric channel at 2p - p^2."""
    return [(1.0, [1.0 - _qsc_degraded(p)])]


def u1_cases(p: float):
    """Deepest product-of-products stage: four channel uses per symbol.

    With zero or one corrupted use -- and even with two, in the patterns
    that leave each pair consistent enough -- the two inner product columns
    still agree on the truth and the outer product snaps to it.  Only the
    heavy patterns (>= 3 corruptions, or both corruptions in one pair)
    leave four live candidates."""
    w = (1.0 - p) / (4.0 - 3.0 * p)
    return [
        ((1.0 - p) ** 4, [1.0]),
        (4 * p * (1.0 - p) ** 3, [1.0]),
        (2 * p * p * (1.0 - p) ** 2, [1.0]),   # two errors, same pair
        (4 * p * p * (1.0 - p) ** 2, [1.0]),   # two errors, different pairs
        (4 * p ** 3 * (1.0 - p), [w, w, w, w]),
        (p ** 4, [w, w, w, w]),
    ]


def v1_cases(p: float):
    """Sum of two product columns: the surviving candidate sets multiply."""
    w = (1.0 - p) / (2.0 - p)
    return [
        ((1.0 - p) ** 4, [1.0]),
        (4 * p * (1.0 - p) ** 3, [w, w]),
        (2 * p * p * (1.0 - p) ** 2, [w, w]),
        (4 * p * p * (1.0 - p) ** 2, [w * w] * 4),
        (4 * p ** 3 * (1.0 - p), [w * w] * 4),
        (p ** 4, [w * w] * 4),
    ]


def _case_norm(cases) -> float:
    return float(sum(prob * sum(s * s for s in spikes) for prob, spikes in cases))


def _derived_form(label: str, p: float) -> float:
    if label == "BASE":
        return (1.0 - p) ** 2
    if label == "U":
        return _case_norm(product_cases(p))
    if label == "V":
        return _case_norm(sum_cases(p))
    if label == "U1":
        return _case_norm(u1_cases(p))
    if label == "V1":
        return _case_norm(v1_cases(p))
    if label == "U2":
        return _case_norm(product_cases(_qsc_degraded(p)))
    if label == "V2":
        return _case_norm(sum_cases(_qsc_degraded(p)))
    raise ValueError(f"unknown channel label {label!r}")


def expectation_closed_form(label: str, p: float) -> dict:
    """Large-q limit of E(||pi||^2) for the labelled stage.

    Returns {"paper": published closed form, "derived": case-sum value}.
    The two agree for BASE/U/V/U2/V2 and differ for U1 (sign slip) and V1.
    """
    if label not in LABELS:
        raise ValueError(f"label must be one of {LABELS}")
    if not (0.0 <= p <= 1.0):
        raise ValueError("p out of [0, 1]")
    return {"paper": _paper_form(label, p), "derived": _derived_form(label, p)}


# ---------------------------------------------------------------------------
# rate-threshold curves
# ---------------------------------------------------------------------------

def gs_threshold(p: float) -> float:
    """Max rate of plain RS list decoding at error rate p: (1-p)^2."""
    return (1.0 - p) ** 2


def uv1_threshold(p: float) -> float:
    """Depth-1 average rate budget: (E_U + E_V)/2."""
    return 0.5 * (_u_form(p) + (1.0 - p) ** 4)


def uv2_threshold_paper(p: float) -> float:
    """Published depth-2 average rate budget (degree-10 rational form)."""
    num = (3 * p ** 10 - 34 * p ** 9 + 187 * p ** 8 - 628 * p ** 7 + 1376 * p ** 6
           - 2016 * p ** 5 + 1970 * p ** 4 - 1272 * p ** 3 + 568 * p ** 2
           - 208 * p + 64) * (p - 1.0) ** 2
    den = 4.0 * (p * p - 2 * p + 2) * (3 * p - 4.0) * (p - 2.0)
    return num / den


def uv2_threshold_derived(p: float) -> float:
    """Depth-2 average rate budget from the derived per-stage forms."""
    return 0.25 * (_derived_form("U1", p) + _derived_form("V1", p)
                   + _derived_form("U2", p) + _derived_form("V2", p))


@dataclass(frozen=True)
class ThresholdPoint:
    p: float
    gs: float
    uv1: float
    uv2_paper: float
    uv2_derived: float


def threshold_curve(p_values) -> list:
    return [ThresholdPoint(float(p), gs_threshold(p), uv1_threshold(p),
                           uv2_threshold_paper(p), uv2_threshold_derived(p))
            for p in p_values]


def crossover(f, g, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Bisection root of f - g on [lo, hi]; assumes a single sign change."""
    flo = f(lo) - g(lo)
    fhi = f(hi) - g(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("no sign change on the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid) - g(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def uv1_gs_crossover() -> float:
    """Error rate where the depth-1 budget stops beating plain RS."""
    return crossover(uv1_threshold, gs_threshold, 0.3, 0.8)


def write_threshold_csv(points, dest) -> None:
    """CSV with 12-significant-digit values and LF line endings."""
    own = isinstance(dest, (str, bytes))
    fh = open(dest, "w", newline="\n") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "gs", "uv1", "uv2_paper", "uv2_derived"])
        for pt in points:
            w.writerow([f"{v:.12g}" for v in
                        (pt.p, pt.gs, pt.uv1, pt.uv2_paper, pt.uv2_derived)])
    finally:
        if own:
            fh.close()


# ---------------------------------------------------------------------------
# exact finite-q Monte Carlo on sparse columns
# ---------------------------------------------------------------------------
#
# A fresh channel column is uniform background + one spike; every transform
# in the two-level chain keeps the column "uniform + few spikes", so each
# sample runs in O(#spikes^2) independent of q.  The algebra below mirrors
# the dense transforms exactly (cross-checked in the test suite).

def _sp_qsc(params: QSCParams, received: int):
    u = params.off_mass
    return (u, {int(received): 1.0 - params.p - u})


def _sp_sum(ctx: FieldContext, a, b):
    ua, sa = a
    ub, sb = b
    base = ctx.q * ua * ub + ub * sum(sa.values()) + ua * sum(sb.values())
    spikes = {}
    for pa, wa in sa.items():
        for pb, wb in sb.items():
            pos = int(ctx.sub(pb, pa))
            spikes[pos] = spikes.get(pos, 0.0) + wa * wb
    return (base, spikes)


def _sp_product(ctx: FieldContext, a, b, shift: int):
    ua, sa = a
    ub, sb = b
    base = ua * ub
    positions = set(sa)
    positions.update(int(ctx.sub(pb, shift)) for pb in sb)
    total = ctx.q * base
    spikes = {}
    for pos in positions:
        va = ua + sa.get(pos, 0.0)
        vb = ub + sb.get(int(ctx.add(pos, shift)), 0.0)
        extra = va * vb - base
        spikes[pos] = extra
        total += extra
    if total <= 0.0:
        # both looks disjoint and hard: no information
        return (1.0 / ctx.q, {})
    return (base / total, {k: v / total for k, v in spikes.items()})


def _sp_norm2(q: int, col) -> float:
    u, spikes = col
    return q * u * u + sum((u + w) ** 2 - u * u for w in spikes.values())


def _sp_value(col, pos: int) -> float:
    u, spikes = col
    return u + spikes.get(int(pos), 0.0)


def _sp_dense(q: int, col) -> np.ndarray:
    u, spikes = col
    out = np.full(q, u)
    for pos, w in spikes.items():
        out[pos] += w
    return out


def _mc_chain(label: str, ctx: FieldContext, params: QSCParams, rng):
    """One sample: transmit fresh symbols, run the labelled transform chain,
    return (column, true symbol)."""
    q = ctx.q

    def use(symbol):
        y = symbol
        if rng.random() < params.p:
            y = int(ctx.add(symbol, int(rng.integers(1, q))))
        return _sp_qsc(params, y)

    if label == "BASE":
        t = int(rng.integers(0, q))
        return use(t), t

    if label in ("U", "V"):
        u, v = rng.integers(0, q, 2)
        cl = use(int(u))
        cr = use(int(ctx.add(int(u), int(v))))
        if label == "V":
            return _sp_sum(ctx, cl, cr), int(v)
        return _sp_product(ctx, cl, cr, int(v)), int(u)

    # depth 2: word (u1 | u1+v1 | u1+u2 | u1+v1+u2+v2), coordinate pairs
    # (1,3) and (2,4) feed the root stage exactly like the decoder does
    u1, v1, u2, v2 = (int(x) for x in rng.integers(0, q, 4))
    t1 = u1
    t2 = ctx.add(u1, v1)
    t3 = ctx.add(u1, u2)
    t4 = ctx.add(int(t2), int(ctx.add(u2, v2)))
    c1, c2, c3, c4 = use(t1), use(int(t2)), use(int(t3)), use(int(t4))

    if label in ("V2", "U2"):
        b1 = _sp_sum(ctx, c1, c3)                      # column for u2
        b2 = _sp_sum(ctx, c2, c4)                      # column for u2+v2
        if label == "V2":
            return _sp_sum(ctx, b1, b2), v2
        return _sp_product(ctx, b1, b2, v2), u2

    a1 = _sp_product(ctx, c1, c3, u2)                  # column for u1
    a2 = _sp_product(ctx, c2, c4, int(ctx.add(u2, v2)))  # column for u1+v1
    if label == "V1":
        return _sp_sum(ctx, a1, a2), v1
    if label == "U1":
        return _sp_product(ctx, a1, a2, v1), u1
    raise ValueError(f"unknown channel label {label!r}")


def monte_carlo_stats(label: str, p: float, q: int, samples: int, seed):
    """Sample means/stderrs of ||pi||^2 and pi(true) for the labelled stage."""
    ctx = field_new(q)
    params = QSCParams(ctx, p)
    rng = np.random.default_rng(seed)
    norms = np.empty(samples)
    trues = np.empty(samples)
    for i in range(samples):
        col, t = _mc_chain(label, ctx, params, rng)
        norms[i] = _sp_norm2(q, col)
        trues[i] = _sp_value(col, t)
    return (float(norms.mean()), float(norms.std(ddof=1) / np.sqrt(samples)),
            float(trues.mean()), float(trues.std(ddof=1) / np.sqrt(samples)))


def expectation_monte_carlo(label: str, p: float, q: int, samples: int, seed):
    """Estimate E(||pi||^2) at finite q; returns (estimate, stderr)."""
    if label not in LABELS:
        raise ValueError(f"label must be one of {LABELS}")
    m, se, _, _ = monte_carlo_stats(label, p, q, samples, seed)
    return m, se


# ---------------------------------------------------------------------------
# frame-error-rate experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    node: CodeNode
    p: float
    trials: int
    seed: int
    s: Optional[int] = None
    jobs: int = 1


@dataclass(frozen=True)
class FERResult:
    config: RunConfig
    successes: int

    @property
    def trials(self) -> int:
        return self.config.trials

    @property
    def failures(self) -> int:
        return self.config.trials - self.successes

    @property
    def fer(self) -> float:
        return 1.0 - self.successes / self.config.trials


def _fer_trial(node: CodeNode, p: float, s, seed: int, index: int) -> bool:
    rng = np.random.default_rng([seed, index])
    ctx = node.ctx
    params = QSCParams(ctx, p)
    msg = rng.integers(0, ctx.q, node.dimension)
    cw = uuv_encode(node, msg)
    received = qsc_sample(params, cw, rng)
    pi = qsc_matrix(params, received)
    try:
        decoded = uuv_soft_decode(node, pi, s=s)
    except (DecodeFailure, EmptyList):
        return False
    return bool(np.array_equal(decoded, cw))


def _fer_chunk(args):
    node, p, s, seed, indices = args
    return sum(_fer_trial(node, p, s, seed, i) for i in indices)


def fer_experiment(config: RunConfig) -> FERResult:
    """Frame error rate over config.trials independent transmissions.

    Each trial derives its RNG stream from (seed, trial index), so results
    are reproducible and independent of the number of worker processes."""
    indices = list(range(config.trials))
    if config.jobs <= 1:
        successes = sum(_fer_trial(config.node, config.p, config.s, config.seed, i)
                        for i in indices)
    else:
        chunks = [indices[i::config.jobs] for i in range(config.jobs)]
        work = [(config.node, config.p, config.s, config.seed, c)
                for c in chunks if c]
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            successes = sum(pool.map(_fer_chunk, work))
    return FERResult(config, successes)


def _tree_leaf_dims(node: CodeNode):
    if isinstance(node, Leaf):
        return [node.code.k]
    return _tree_leaf_dims(node.u) + _tree_leaf_dims(node.v)


def _leaf_length(node: CodeNode) -> int:
    while isinstance(node, Node):
        node = node.u
    return node.code.n


def write_fer_csv(results, dest) -> None:
    """CSV rows: p,q,n,depth,ku,kv,trials,successes,fer,seed (n = leaf length,
    ku/kv = dimensions of the root's two subtrees)."""
    own = isinstance(dest, (str, bytes))
    fh = open(dest, "w", newline="\n") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "q", "n", "depth", "ku", "kv",
                    "trials", "successes", "fer", "seed"])
        for res in results:
            node = res.config.node
            if isinstance(node, Node):
                ku, kv = node.u.dimension, node.v.dimension
            else:
                ku, kv = node.dimension, 0
            w.writerow([f"{res.config.p:.12g}", node.ctx.q, _leaf_length(node),
                        node.depth, ku, kv, res.config.trials, res.successes,
                        f"{res.fer:.12g}", res.config.seed])
    finally:
        if own:
            fh.close()
