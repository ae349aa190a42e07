"""McEliece-style public-key scheme over permuted generalized (U|U+V) codes.

The secret is a soft-decodable structured code: two RS halves glued by a
diagonal quadruple.  The public key is its generator matrix scrambled on the
left (invertible S) and permuted on the right (column permutation).
Decryption un-permutes, models the weight-t error as a hard q-ary symmetric
channel at p = t/2n, runs the recursive soft decoder, and unscrambles.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .channel import QSCParams, qsc_matrix
from .errors import (BadMagic, CorruptLength, DecodeFailure, DecryptionFailure,
                     EmptyList, InvalidRatePlan, VersionMismatch)
from .galois import FieldContext, field_new, mat_inv, rank, vec_mat
from .rs_kv import RSCode
from .uuv import DiagonalQuadruple, Leaf, Node, uuv_encode, uuv_soft_decode_message

_MAGIC = b"UUVM"
_VERSION = 1
_KIND_PUBLIC = 0x00
_KIND_SECRET = 0x01

# decoder effort for decryption: interpolation cost scale, in units of the
# half-length (empirically enough for rates comfortably below threshold)
DECRYPT_S_FACTOR = 8


@dataclass(frozen=True)
class PublicKey:
    g_pub: np.ndarray   # k x 2n
    t: int
    q: int
    n: int              # half length

    @property
    def k(self) -> int:
        return int(self.g_pub.shape[0])

    def __eq__(self, other):
        return (isinstance(other, PublicKey)
                and (self.t, self.q, self.n) == (other.t, other.q, other.n)
                and np.array_equal(self.g_pub, other.g_pub))


@dataclass(frozen=True)
class SecretKey:
    u_code: RSCode
    v_code: RSCode
    d: DiagonalQuadruple
    perm: np.ndarray        # length 2n; public column j carries structured column perm[j]
    scrambler: np.ndarray   # k x k invertible
    t: int

    @property
    def ctx(self) -> FieldContext:
        return self.u_code.ctx

    @property
    def node(self) -> Node:
        return Node(Leaf(self.u_code), Leaf(self.v_code), self.d)

    @property
    def k(self) -> int:
        return self.u_code.k + self.v_code.k

    def __eq__(self, other):
        return (isinstance(other, SecretKey)
                and self.t == other.t
                and self.u_code == other.u_code
                and self.v_code == other.v_code
                and self.d == other.d
                and np.array_equal(self.perm, other.perm)
                and np.array_equal(self.scrambler, other.scrambler))


def _random_quadruple(ctx: FieldContext, n: int, rng) -> DiagonalQuadruple:
    """All four diagonals nonzero and every 2x2 coordinate block nonsingular."""
    while True:
        d1, d2, d3, d4 = (rng.integers(1, ctx.q, n) for _ in range(4))
        det = ctx.sub(ctx.mul(d1, d4), ctx.mul(d2, d3))
        if np.all(det != 0):
            return DiagonalQuadruple(d1, d2, d3, d4)


def _random_invertible(ctx: FieldContext, k: int, rng) -> np.ndarray:
    while True:
        s = rng.integers(0, ctx.q, (k, k))
        if rank(ctx, s) == k:
            return s


def _structured_generator(sk_node: Node) -> np.ndarray:
    from .uuv import build_matrices
    return build_matrices(sk_node)[0]


def public_from_parts(sk: SecretKey) -> PublicKey:
    """Recompute the public matrix from the secret parts (bit-exact)."""
    ctx = sk.ctx
    g_struct = _structured_generator(sk.node)
    sg = ctx.sum(ctx.mul(sk.scrambler[:, :, None], g_struct[None, :, :]), axis=1)
    return PublicKey(sg[:, sk.perm], sk.t, ctx.q, sk.u_code.n)


def calibrate_t(u_code: RSCode, v_code: RSCode, d: Optional[DiagonalQuadruple],
                trials: int = 200, target_fer: float = 0.05,
                seed: int = 0, s: Optional[int] = None) -> int:
    """Largest t whose hard-channel FER stays below target_fer.

    Binary search on t assuming FER is monotone in the error weight; each
    probe runs `trials` decode attempts at p = t/(2n)."""
    from .analysis import RunConfig, fer_experiment
    node = Node(Leaf(u_code), Leaf(v_code), d)
    n2 = node.length
    if s is None:
        s = DECRYPT_S_FACTOR * u_code.n

    def fer_at(t):
        if t == 0:
            return 0.0
        return fer_experiment(RunConfig(node, t / n2, trials, seed, s)).fer

    lo, hi = 0, n2 // 2  # beyond half the coordinates nothing can work
    if fer_at(hi) <= target_fer:
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fer_at(mid) <= target_fer:
            lo = mid
        else:
            hi = mid
    return lo


def keygen(q: int, n: int, rate_plan: Union[float, Tuple[int, int]],
           t: Optional[int] = None, seed: int = 0):
    """Generate a key pair for a depth-1 structured code of length 2n.

    rate_plan: either an explicit (k_u, k_v) pair, or a design error rate p
    from which dimensions are set to 0.8x the per-stage capacity margins.
    When t is omitted it is calibrated to the largest weight the decoder
    handles with <= 5% failure (slow: ~200 trials per probe)."""
    ctx = field_new(q)
    if n > q:
        raise InvalidRatePlan("half-length exceeds field size")
    if isinstance(rate_plan, (tuple, list)):
        k_u, k_v = (int(x) for x in rate_plan)
    else:
        p = float(rate_plan)
        if not (0.0 < p < 1.0):
            raise InvalidRatePlan("design error rate out of (0,1)")
        from .analysis import expectation_closed_form
        k_u = round(0.8 * expectation_closed_form("U", p)["derived"] * n)
        k_v = round(0.8 * expectation_closed_form("V", p)["derived"] * n)
    if not (1 <= k_v <= k_u <= n):
        raise InvalidRatePlan(f"bad dimensions (k_u={k_u}, k_v={k_v}, n={n})")
    u_code = RSCode(ctx, n, k_u)
    v_code = RSCode(ctx, n, k_v)
    rng = np.random.default_rng(seed)
    d = _random_quadruple(ctx, n, rng)
    scrambler = _random_invertible(ctx, k_u + k_v, rng)
    perm = rng.permutation(2 * n)
    if t is None:
        t = calibrate_t(u_code, v_code, d, seed=seed)
    if t < 0 or t > 2 * n:
        raise InvalidRatePlan("error weight out of range")
    sk = SecretKey(u_code, v_code, d, perm, scrambler, int(t))
    return public_from_parts(sk), sk


def encrypt(pk: PublicKey, message: np.ndarray, seed) -> np.ndarray:
    """y = m G_pub + e with e of weight exactly t (support and values uniform)."""
    ctx = field_new(pk.q)
    message = np.asarray(message, dtype=np.int64)
    if message.shape != (pk.k,):
        raise ValueError(f"message must have {pk.k} elements")
    rng = np.random.default_rng(seed)
    y = vec_mat(ctx, message, pk.g_pub)
    if pk.t:
        support = rng.choice(2 * pk.n, size=pk.t, replace=False)
        values = rng.integers(1, pk.q, pk.t)
        y = y.copy()
        y[support] = ctx.add(y[support], values)
    return y


def decrypt(sk: SecretKey, ciphertext: np.ndarray, s: Optional[int] = None) -> np.ndarray:
    """Recover the message or raise DecryptionFailure (retryable event)."""
    ctx = sk.ctx
    y = np.asarray(ciphertext, dtype=np.int64)
    n2 = 2 * sk.u_code.n
    if y.shape != (n2,):
        raise ValueError(f"ciphertext must have {n2} elements")
    z = np.empty(n2, dtype=np.int64)
    z[sk.perm] = y
    p_eff = sk.t / n2
    pi = qsc_matrix(QSCParams(ctx, p_eff), z)
    if s is None:
        s = DECRYPT_S_FACTOR * sk.u_code.n
    try:
        _, m_struct = uuv_soft_decode_message(sk.node, pi, s=s)
    except (DecodeFailure, EmptyList) as exc:
        raise DecryptionFailure("soft decoder failed") from exc
    message = vec_mat(ctx, m_struct, mat_inv(ctx, sk.scrambler))
    pk_matrix = public_from_parts(sk).g_pub
    resent = vec_mat(ctx, message, pk_matrix)
    if int(np.count_nonzero(ctx.sub(y, resent))) > sk.t:
        raise DecryptionFailure("re-encoding check exceeded the error budget")
    return message


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _header(kind: int, q: int, n: int, k_u: int, k_v: int, t: int) -> bytes:
    return (_MAGIC + bytes([_VERSION, kind])
            + struct.pack("<5I", q, n, k_u, k_v, t))


def _u16(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<u2").tobytes()


def save_key(key) -> bytes:
    if isinstance(key, PublicKey):
        k_u = key.k  # public header carries (k, 0): split is secret
        blob = _header(_KIND_PUBLIC, key.q, key.n, k_u, 0, key.t) + _u16(key.g_pub)
    elif isinstance(key, SecretKey):
        blob = (_header(_KIND_SECRET, key.ctx.q, key.u_code.n,
                        key.u_code.k, key.v_code.k, key.t)
                + _u16(key.scrambler)
                + np.ascontiguousarray(key.perm, dtype="<u4").tobytes()
                + _u16(key.d.d1) + _u16(key.d.d2) + _u16(key.d.d3) + _u16(key.d.d4))
    else:
        raise TypeError("expected PublicKey or SecretKey")
    return blob + struct.pack("<I", zlib.crc32(blob))


def load_key(data: bytes):
    if len(data) < 4 or data[:4] != _MAGIC:
        raise BadMagic("not a key file")
    if len(data) < 6:
        raise CorruptLength("truncated header")
    if data[4] != _VERSION:
        raise VersionMismatch(f"unsupported key version {data[4]}")
    kind = data[5]
    if len(data) < 30:
        raise CorruptLength("truncated header")
    q, n, k_u, k_v, t = struct.unpack("<5I", data[6:26])
    if kind == _KIND_PUBLIC:
        payload_len = 2 * (k_u + k_v) * 2 * n
    elif kind == _KIND_SECRET:
        k = k_u + k_v
        payload_len = 2 * k * k + 4 * 2 * n + 4 * 2 * n
    else:
        raise CorruptLength(f"unknown key kind {kind}")
    expected = 26 + payload_len + 4
    if len(data) != expected:
        raise CorruptLength(f"expected {expected} bytes, got {len(data)}")
    body, crc = data[:-4], struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(body) != crc:
        raise CorruptLength("checksum mismatch")
    payload = data[26:-4]
    if kind == _KIND_PUBLIC:
        g = np.frombuffer(payload, dtype="<u2").astype(np.int64)
        return PublicKey(g.reshape(k_u + k_v, 2 * n), t, q, n)
    k = k_u + k_v
    pos = 0
    scram = np.frombuffer(payload, dtype="<u2", count=k * k, offset=pos)
    pos += 2 * k * k
    perm = np.frombuffer(payload, dtype="<u4", count=2 * n, offset=pos)
    pos += 4 * 2 * n
    diags = [np.frombuffer(payload, dtype="<u2", count=n, offset=pos + 2 * n * i)
             for i in range(4)]
    ctx = field_new(q)
    return SecretKey(RSCode(ctx, n, k_u), RSCode(ctx, n, k_v),
                     DiagonalQuadruple(*(d.astype(np.int64) for d in diags)),
                     perm.astype(np.int64),
                     scram.astype(np.int64).reshape(k, k), t)


def key_io(mode: str, key=None, data: Optional[bytes] = None):
    """Dispatch serialization: key_io("save", key) -> bytes,
    key_io("load", data=raw) -> key."""
    if mode == "save":
        return save_key(key)
    if mode == "load":
        return load_key(data)
    raise ValueError("mode must be 'save' or 'load'")
