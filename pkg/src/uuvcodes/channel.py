"""q-ary symmetric channel and reliability-column transforms.

A reliability column is a length-q float64 vector: entry alpha is the
posterior probability that the transmitted symbol was alpha.  A reliability
matrix for a length-n word is a (q, n) array, one column per coordinate.

The two combining transforms implemented here are the ones a recursive
two-look decoder needs:

* ``reliability_sum(c1, c2)``   -- distribution of X2 - X1 (difference of two
  independent symbols), i.e. out(a) = sum_b c1(b) * c2(a + b).
* ``reliability_product(c1, c2, shift)`` -- pointwise fusion of two
  independent looks at the same symbol, the second one offset by ``shift``:
  out(a) ~ c1(a) * c2(a + shift), renormalised.

Both use the field's dense addition table, so they are exact (no FFT
round-off) and fast for q up to a few thousand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ZeroDenominator, ZeroScale
from .galois import FieldContext

# chunk budget (in table entries) for batched column transforms
_CHUNK_ENTRIES = 1 << 25


@dataclass(frozen=True)
class QSCParams:
    """Symmetric channel over GF(q): a symbol survives with probability 1-p
    and otherwise is replaced by one of the q-1 other symbols uniformly."""

    ctx: FieldContext
    p: float

    def __post_init__(self):
        if not (0.0 <= self.p < 1.0):
            raise ValueError(f"error probability {self.p} out of [0, 1)")

    @property
    def off_mass(self) -> float:
        return self.p / (self.ctx.q - 1)


def qsc_column(params: QSCParams, received: int) -> np.ndarray:
    """Posterior column for a single received symbol (uniform prior)."""
    q = params.ctx.q
    col = np.full(q, params.off_mass)
    col[received] = 1.0 - params.p
    return col


def qsc_matrix(params: QSCParams, word) -> np.ndarray:
    """Reliability matrix (q, n) for a received word."""
    word = np.asarray(word, dtype=np.int64)
    q = params.ctx.q
    out = np.full((q, len(word)), params.off_mass)
    out[word, np.arange(len(word))] = 1.0 - params.p
    return out


def qsc_sample(params: QSCParams, word, seed) -> np.ndarray:
    """Pass a word through the channel.  ``seed`` may be an int or an
    ``np.random.Generator``; equal seeds give equal outputs."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    word = np.asarray(word, dtype=np.int64)
    n = len(word)
    flips = rng.random(n) < params.p
    # a uniform nonzero additive offset hits each wrong symbol equally often
    offsets = rng.integers(1, params.ctx.q, size=n)
    return np.where(flips, params.ctx.add(word, offsets), word)


class ColumnStats(NamedTuple):
    norm2: float
    top: int


def column_stats(col) -> ColumnStats:
    """Squared 2-norm and argmax (ties resolved to the lowest index)."""
    col = np.asarray(col, dtype=np.float64)
    return ColumnStats(float(col @ col), int(np.argmax(col)))


def renormalize(cols: np.ndarray) -> np.ndarray:
    """Scale each column to sum exactly to 1 (float drift hygiene)."""
    cols = np.asarray(cols, dtype=np.float64)
    s = cols.sum(axis=0)
    if np.any(s <= 0):
        raise ZeroDenominator("column with nonpositive mass")
    return cols / s


# ---------------------------------------------------------------------------
# single-column transforms (the contract operations)
# ---------------------------------------------------------------------------

def reliability_sum(ctx: FieldContext, c1, c2) -> np.ndarray:
    """Distribution of X2 - X1 for independent X1 ~ c1, X2 ~ c2."""
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    return c2[ctx.add_outer] @ c1


def reliability_product(ctx: FieldContext, c1, c2, shift: int) -> np.ndarray:
    """Fuse two independent looks at one symbol; look 2 is shifted.

    out(a) = c1(a) * c2(a + shift) / Z.  Raises ZeroDenominator when the
    two looks place no common mass anywhere (Z == 0).
    """
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    idx = ctx.add(np.arange(ctx.q, dtype=np.int64), int(shift))
    raw = c1 * c2[idx]
    z = raw.sum()
    if z <= 0.0:
        raise ZeroDenominator("product column has zero total mass")
    return raw / z


def reliability_affine_remap(ctx: FieldContext, col, scale: int, offset: int) -> np.ndarray:
    """Column of Y = (X - offset) / scale when X ~ col: out(a) = col(scale*a + offset).

    scale must be nonzero so the index map is a permutation and no
    probability mass is created or destroyed.
    """
    if int(scale) == 0:
        raise ZeroScale("affine remap needs an invertible scale")
    col = np.asarray(col, dtype=np.float64)
    alpha = np.arange(ctx.q, dtype=np.int64)
    return col[ctx.add(ctx.mul(int(scale), alpha), int(offset))]


# ---------------------------------------------------------------------------
# batched versions over whole reliability matrices (decoder hot path)
# ---------------------------------------------------------------------------

def reliability_sum_matrix(ctx: FieldContext, m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    """Column-wise reliability_sum of two (q, n) matrices."""
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    q, n = m1.shape
    out = np.empty_like(m1)
    table = ctx.add_outer
    step = max(1, _CHUNK_ENTRIES // (q * q))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        gathered = m2[:, lo:hi][table]           # (q, q, hi-lo)
        out[:, lo:hi] = np.einsum("abi,bi->ai", gathered, m1[:, lo:hi])
    return out


def reliability_product_matrix(ctx: FieldContext, m1: np.ndarray, m2: np.ndarray,
                               shifts, on_zero: str = "raise") -> np.ndarray:
    """Column-wise reliability_product with a per-column shift vector.

    ``on_zero`` selects what to do with an all-zero product column: "raise"
    (contract behaviour) or "uniform" (decoder behaviour: no information).
    """
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    q, n = m1.shape
    shifts = np.broadcast_to(np.asarray(shifts, dtype=np.int64), (n,))
    idx = ctx.add(np.arange(q, dtype=np.int64)[:, None], shifts[None, :])
    raw = m1 * m2[idx, np.arange(n)[None, :]]
    z = raw.sum(axis=0)
    bad = z <= 0.0
    if np.any(bad):
        if on_zero == "raise":
            raise ZeroDenominator("product column with zero total mass")
        raw[:, bad] = 1.0 / q
        z = raw.sum(axis=0)
    return raw / z


def reliability_remap_matrix(ctx: FieldContext, m: np.ndarray, scales, offsets) -> np.ndarray:
    """Column-wise affine remap with per-column scale/offset vectors."""
    m = np.asarray(m, dtype=np.float64)
    q, n = m.shape
    scales = np.broadcast_to(np.asarray(scales, dtype=np.int64), (n,))
    offsets = np.broadcast_to(np.asarray(offsets, dtype=np.int64), (n,))
    if np.any(scales == 0):
        raise ZeroScale("affine remap needs invertible scales")
    alpha = np.arange(q, dtype=np.int64)
    idx = ctx.add(ctx.mul(scales[None, :], alpha[:, None]), offsets[None, :])
    return m[idx, np.arange(n)[None, :]]
