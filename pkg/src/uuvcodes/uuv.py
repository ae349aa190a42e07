"""Twisted (U | U+V) code trees and their recursive soft decoder.

A code tree is either a ``Leaf`` wrapping an RS component code or a ``Node``
combining two equal-length subtrees.  A plain node maps component words
(u, v) to (u | u+v); a twisted node carries four diagonals d1..d4 (one
element each per coordinate, with d1*d4 - d2*d3 nonzero everywhere) and maps
to (u*d1 + v*d2 | u*d3 + v*d4).

Decoding works on a reliability matrix for the full word:

* v-recovery: per coordinate, the difference of the (diagonally unscaled)
  halves depends only on v, so a reliability_sum of suitably remapped halves
  gives a column for v scaled by s = d2*d3 - d4*d1; an affine remap by s
  turns it into a column for v itself and the v-subtree decodes it.
* u-recovery: with v-hat fixed, both halves become independent looks at u
  (again up to per-coordinate affine remaps), fused by reliability_product.

All remaps are permutations of column entries, so no information is lost
on the way down.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import galois
from .channel import (reliability_product_matrix, reliability_remap_matrix,
                      reliability_sum_matrix, renormalize)
from .errors import DecodeFailure, EmptyList, TooLarge
from .galois import FieldContext
from .rs_kv import RSCode, kv_decode, rs_encode

BRUTE_FORCE_LIMIT = 1 << 26


@dataclass(frozen=True)
class DiagonalQuadruple:
    """Four length-n diagonals; coordinate-wise matrix (d1 d3 / d2 d4) must be
    invertible, and the decoder additionally needs d1 and d3 invertible."""

    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    d4: np.ndarray

    def __post_init__(self):
        for name in ("d1", "d2", "d3", "d4"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=np.int64).copy())
        n = len(self.d1)
        if not all(len(getattr(self, f)) == n for f in ("d2", "d3", "d4")):
            raise ValueError("diagonal length mismatch")

    def validate(self, ctx: FieldContext, for_decoding: bool = False):
        det = ctx.sub(ctx.mul(self.d1, self.d4), ctx.mul(self.d2, self.d3))
        if np.any(det == 0):
            raise ValueError("coordinate-wise determinant hit zero")
        if for_decoding and (np.any(self.d1 == 0) or np.any(self.d3 == 0)):
            raise ValueError("d1 and d3 must be everywhere nonzero (decoder requirement)")
        return det

    def __eq__(self, other):
        return (isinstance(other, DiagonalQuadruple)
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("d1", "d2", "d3", "d4")))


def identity_quadruple(n: int) -> DiagonalQuadruple:
    """The quadruple realising the plain (u | u+v) map."""
    one = np.ones(n, dtype=np.int64)
    return DiagonalQuadruple(one, np.zeros(n, dtype=np.int64), one, one)


def dual_quadruple(ctx: FieldContext, d: DiagonalQuadruple) -> DiagonalQuadruple:
    """Quadruple D-hat with ([U,V]*D)^perp == [U^perp, V^perp]*D-hat.

    Obtained from the transposed-inverse of the per-coordinate 2x2 blocks:
    D-hat = (d4, -d3, -d2, d1) / (d1*d4 - d2*d3).
    """
    det = d.validate(ctx)
    inv_det = ctx.inv(det)
    return DiagonalQuadruple(
        ctx.mul(d.d4, inv_det),
        ctx.mul(ctx.neg(d.d3), inv_det),
        ctx.mul(ctx.neg(d.d2), inv_det),
        ctx.mul(d.d1, inv_det),
    )


@dataclass(frozen=True)
class Leaf:
    code: RSCode

    @property
    def ctx(self) -> FieldContext:
        return self.code.ctx

    @property
    def length(self) -> int:
        return self.code.n

    @property
    def dimension(self) -> int:
        return self.code.k

    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class Node:
    u: "CodeNode"
    v: "CodeNode"
    d: Optional[DiagonalQuadruple] = None

    def __post_init__(self):
        if self.u.length != self.v.length:
            raise ValueError("child code lengths differ")
        if self.u.ctx is not self.v.ctx and self.u.ctx != self.v.ctx:
            raise ValueError("child codes live in different fields")
        if self.d is not None:
            if len(self.d.d1) != self.u.length:
                raise ValueError("diagonal length does not match child length")
            self.d.validate(self.ctx, for_decoding=True)

    @property
    def ctx(self) -> FieldContext:
        return self.u.ctx

    @property
    def length(self) -> int:
        return 2 * self.u.length

    @property
    def dimension(self) -> int:
        return self.u.dimension + self.v.dimension

    @property
    def depth(self) -> int:
        return 1 + max(self.u.depth, self.v.depth)


CodeNode = Union[Leaf, Node]


def plain_tree(ctx: FieldContext, n: int, dims) -> CodeNode:
    """Balanced plain tree over RS leaves of length n.

    ``dims`` is a flat list of leaf dimensions in left-to-right order; its
    length must be a power of two."""
    leaves = [Leaf(RSCode(ctx, n, k)) for k in dims]
    while len(leaves) > 1:
        if len(leaves) % 2:
            raise ValueError("dims length must be a power of two")
        leaves = [Node(a, b) for a, b in zip(leaves[::2], leaves[1::2])]
    return leaves[0]


# ---------------------------------------------------------------------------
# encoding and matrices
# ---------------------------------------------------------------------------

def uuv_encode(node: CodeNode, message) -> np.ndarray:
    message = np.asarray(message, dtype=np.int64)
    if message.shape != (node.dimension,):
        raise ValueError(f"message must have length {node.dimension}")
    if isinstance(node, Leaf):
        return rs_encode(node.code, message)
    ctx = node.ctx
    ku = node.u.dimension
    u = uuv_encode(node.u, message[:ku])
    v = uuv_encode(node.v, message[ku:])
    if node.d is None:
        return np.concatenate([u, ctx.add(u, v)])
    d = node.d
    left = ctx.add(ctx.mul(u, d.d1), ctx.mul(v, d.d2))
    right = ctx.add(ctx.mul(u, d.d3), ctx.mul(v, d.d4))
    return np.concatenate([left, right])


def build_matrices(node: CodeNode):
    """Generator and parity-check matrices (G, H) with G H^T = 0 and
    rank G + rank H = length."""
    ctx = node.ctx
    if isinstance(node, Leaf):
        g = node.code.generator_matrix()
        h = galois.null_space(ctx, g)
        return g, h
    gu, hu = build_matrices(node.u)
    gv, hv = build_matrices(node.v)
    n = node.u.length
    if node.d is None:
        d = identity_quadruple(n)
    else:
        d = node.d
    # generator: [u, v] -> (u d1 + v d2 | u d3 + v d4) columnwise
    g = np.zeros((node.dimension, 2 * n), dtype=np.int64)
    g[: gu.shape[0], :n] = ctx.mul(gu, d.d1[None, :])
    g[: gu.shape[0], n:] = ctx.mul(gu, d.d3[None, :])
    g[gu.shape[0]:, :n] = ctx.mul(gv, d.d2[None, :])
    g[gu.shape[0]:, n:] = ctx.mul(gv, d.d4[None, :])
    # parity check: rows (hu ° a | hu ° b) and (hv ° c | hv ° e) where
    # (a b / c e) is the transposed-inverse of the coordinate blocks --
    # annihilates both generator halves coordinate-wise.
    det = ctx.sub(ctx.mul(d.d1, d.d4), ctx.mul(d.d2, d.d3))
    idet = ctx.inv(det)
    a = ctx.mul(d.d4, idet)
    b = ctx.mul(ctx.neg(d.d2), idet)
    c = ctx.mul(ctx.neg(d.d3), idet)
    e = ctx.mul(d.d1, idet)
    h = np.zeros((2 * n - node.dimension, 2 * n), dtype=np.int64)
    h[: hu.shape[0], :n] = ctx.mul(hu, a[None, :])
    h[: hu.shape[0], n:] = ctx.mul(hu, b[None, :])
    h[hu.shape[0]:, :n] = ctx.mul(hv, c[None, :])
    h[hu.shape[0]:, n:] = ctx.mul(hv, e[None, :])
    return g, h


# ---------------------------------------------------------------------------
# exhaustive minimum distance
# ---------------------------------------------------------------------------

def _span_words(ctx: FieldContext, rows: np.ndarray) -> np.ndarray:
    """All q^r combinations of the given generator rows."""
    n = rows.shape[1]
    out = np.zeros((1, n), dtype=np.int64)
    for row in rows:
        scaled = ctx.mul(np.arange(ctx.q, dtype=np.int64)[:, None], row[None, :])
        out = ctx.add(out[:, None, :], scaled[None, :, :]).reshape(-1, n)
    return out


def min_distance_bruteforce(node: CodeNode, limit: int = BRUTE_FORCE_LIMIT) -> int:
    """Exact minimum weight by (meet-in-the-middle) codeword enumeration."""
    ctx = node.ctx
    k = node.dimension
    total = ctx.q ** k
    if total > limit:
        raise TooLarge(f"q^k = {total} exceeds enumeration guard {limit}")
    g, _ = build_matrices(node)
    k1 = k // 2
    t1 = _span_words(ctx, g[:k1])
    t2 = _span_words(ctx, g[k1:])
    best = node.length + 1
    step = max(1, (1 << 22) // max(len(t1), 1))
    for lo in range(0, len(t2), step):
        block = t2[lo: lo + step]
        sums = ctx.add(t1[None, :, :], block[:, None, :])
        w = np.count_nonzero(sums, axis=2)
        w = w[w > 0]  # the zero codeword appears exactly once overall
        if w.size:
            best = min(best, int(w.min()))
    return best


def distance_lower_bound(node: CodeNode) -> int:
    """min(2 d_U, d_V) recursively (RS leaves are MDS: d = n - k + 1)."""
    if isinstance(node, Leaf):
        return node.code.min_distance
    return min(2 * distance_lower_bound(node.u), distance_lower_bound(node.v))


# ---------------------------------------------------------------------------
# recursive soft decoding
# ---------------------------------------------------------------------------

def _leaf_decode(leaf: Leaf, pi: np.ndarray, s, path: str):
    try:
        ranked = kv_decode(leaf.code, pi, s=s, with_messages=True)
    except EmptyList as exc:
        raise DecodeFailure(f"list decoder came back empty at node '{path or '<root>'}'") from exc
    cw, _, msg = ranked[0]
    return cw, msg


def _decode(node: CodeNode, pi: np.ndarray, s, trace, path: str):
    if isinstance(node, Leaf):
        cw, msg = _leaf_decode(node, pi, s, path)
        return cw, msg
    ctx = node.ctx
    n = node.u.length
    pi_l, pi_r = pi[:, :n], pi[:, n:]

    if node.d is None:
        pi_v = reliability_sum_matrix(ctx, pi_l, pi_r)
        if trace is not None:
            trace.append(("sum", path))
    else:
        d = node.d
        c1 = reliability_remap_matrix(ctx, pi_r, ctx.inv(d.d1), 0)
        c2 = reliability_remap_matrix(ctx, pi_l, ctx.inv(d.d3), 0)
        pi_w = reliability_sum_matrix(ctx, c1, c2)
        if trace is not None:
            trace.append(("sum", path))
        # pi_w describes v * s with s = d2 d3 - d4 d1; undo the scaling
        scale = ctx.sub(ctx.mul(d.d2, d.d3), ctx.mul(d.d4, d.d1))
        pi_v = renormalize(reliability_remap_matrix(ctx, pi_w, scale, 0))

    v_cw, v_msg = _decode(node.v, pi_v, s, trace, path + ".v" if path else "v")

    if node.d is None:
        pi_u = reliability_product_matrix(ctx, pi_l, pi_r, v_cw, on_zero="uniform")
    else:
        d = node.d
        look_l = reliability_remap_matrix(ctx, pi_l, d.d1, ctx.mul(v_cw, d.d2))
        look_r = reliability_remap_matrix(ctx, pi_r, d.d3, ctx.mul(v_cw, d.d4))
        pi_u = reliability_product_matrix(ctx, look_l, look_r, 0, on_zero="uniform")
    if trace is not None:
        trace.append(("product", path))

    u_cw, u_msg = _decode(node.u, pi_u, s, trace, path + ".u" if path else "u")

    if node.d is None:
        cw = np.concatenate([u_cw, ctx.add(u_cw, v_cw)])
    else:
        d = node.d
        cw = np.concatenate([
            ctx.add(ctx.mul(u_cw, d.d1), ctx.mul(v_cw, d.d2)),
            ctx.add(ctx.mul(u_cw, d.d3), ctx.mul(v_cw, d.d4)),
        ])
    return cw, np.concatenate([u_msg, v_msg])


def uuv_soft_decode(node: CodeNode, pi: np.ndarray, s: int | None = None,
                    trace: list | None = None) -> np.ndarray:
    """Decode a reliability matrix for the full tree; returns the codeword.

    ``s`` is handed through to every leaf list decoder (None = adaptive).
    ``trace``, if supplied, collects ("sum"|"product", node_path) tuples in
    execution order -- handy for asserting the transform schedule.
    """
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (node.ctx.q, node.length):
        raise ValueError(f"reliability matrix must be ({node.ctx.q}, {node.length})")
    cw, _ = _decode(node, pi, s, trace, "")
    return cw


def uuv_soft_decode_message(node: CodeNode, pi: np.ndarray, s: int | None = None):
    """Like uuv_soft_decode but returns (codeword, message)."""
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (node.ctx.q, node.length):
        raise ValueError(f"reliability matrix must be ({node.ctx.q}, {node.length})")
    return _decode(node, pi, s, None, "")
