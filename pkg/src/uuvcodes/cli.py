"""Command-line front end: threshold sweeps, FER simulation, single-shot
decoding, expectation tables, and the public-key scheme.

Exit codes: 0 success, 1 usage or input error, 2 decoder/decryption failure.
Every randomized command takes --seed and is bit-reproducible."""

from __future__ import annotations

import argparse
import struct
import sys

import numpy as np

from . import analysis, mceliece
from .channel import QSCParams, qsc_matrix
from .errors import DecodeFailure, DecryptionFailure, EmptyList, UUVError
from .galois import field_new
from .rs_kv import RSCode
from .uuv import Leaf, Node, uuv_soft_decode_message


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- raw element files: u32 LE count, then 2 bytes per element (LE) ---------

def write_elements(path: str, arr) -> None:
    arr = np.asarray(arr)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(arr)))
        fh.write(np.ascontiguousarray(arr, dtype="<u2").tobytes())


def read_elements(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise UUVError(f"{path}: truncated element file")
    (count,) = struct.unpack("<I", raw[:4])
    if len(raw) != 4 + 2 * count:
        raise UUVError(f"{path}: expected {count} elements, file size mismatch")
    return np.frombuffer(raw, dtype="<u2", count=count, offset=4).astype(np.int64)


def _word_from_hex(text: str) -> np.ndarray:
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise UUVError("word is not valid hex")
    if len(raw) % 2:
        raise UUVError("hex word must encode 2 bytes per element")
    return np.frombuffer(raw, dtype="<u2").astype(np.int64)


def _word_to_hex(arr) -> str:
    return np.ascontiguousarray(arr, dtype="<u2").tobytes().hex()


def _build_tree(q: int, n: int, depth: int, ku: int, kv: int):
    """Plain tree; at depth 2 both depth-1 children share (ku, kv)."""
    ctx = field_new(q)
    child = lambda: Node(Leaf(RSCode(ctx, n, ku)), Leaf(RSCode(ctx, n, kv)))
    if depth == 1:
        return child()
    return Node(child(), child())


# --- subcommands -------------------------------------------------------------

def _cmd_sweep(args) -> int:
    ps = np.linspace(args.p_min, args.p_max, args.steps)
    points = analysis.threshold_curve(ps)
    if args.out:
        analysis.write_threshold_csv(points, args.out)
    else:
        analysis.write_threshold_csv(points, sys.stdout)
    return 0


def _cmd_simulate(args) -> int:
    node = _build_tree(args.q, args.n, args.depth, args.ku, args.kv)
    config = analysis.RunConfig(node, args.p, args.trials, args.seed,
                                s=args.s, jobs=args.jobs)
    res = analysis.fer_experiment(config)
    print(f"p={args.p:g} q={args.q} n={args.n} depth={args.depth} "
          f"ku={args.ku} kv={args.kv} trials={res.trials} "
          f"successes={res.successes} fer={res.fer:.12g} seed={args.seed}")
    if args.out:
        analysis.write_fer_csv([res], args.out)
    return 0


def _cmd_decode(args) -> int:
    node = _build_tree(args.q, args.n, args.depth, args.ku, args.kv)
    word = _word_from_hex(args.word)
    if len(word) != node.length:
        raise UUVError(f"word has {len(word)} elements, code length is {node.length}")
    if np.any(word >= args.q):
        raise UUVError("word contains elements outside the field")
    pi = qsc_matrix(QSCParams(node.ctx, args.p), word)
    codeword, message = uuv_soft_decode_message(node, pi, s=args.s)
    print(f"codeword={_word_to_hex(codeword)}")
    print(f"message={_word_to_hex(message)}")
    return 0


def _cmd_expectations(args) -> int:
    labels = args.labels or list(analysis.LABELS)
    print("label,p,paper,derived,mc,mc_stderr")
    for label in labels:
        forms = analysis.expectation_closed_form(label, args.p)
        mc, se = analysis.expectation_monte_carlo(label, args.p, args.q,
                                                  args.samples, args.seed)
        print(f"{label},{args.p:g},{forms['paper']:.12g},"
              f"{forms['derived']:.12g},{mc:.12g},{se:.12g}")
    return 0


def _cmd_keygen(args) -> int:
    if (args.ku is None) != (args.kv is None):
        raise UUVError("--ku and --kv must be given together")
    if args.ku is not None:
        plan = (args.ku, args.kv)
    elif args.p_design is not None:
        plan = args.p_design
    else:
        raise UUVError("give either --ku/--kv or --p-design")
    pk, sk = mceliece.keygen(args.q, args.n, plan, t=args.t, seed=args.seed)
    with open(args.pub, "wb") as fh:
        fh.write(mceliece.save_key(pk))
    with open(args.sec, "wb") as fh:
        fh.write(mceliece.save_key(sk))
    print(f"wrote {args.pub} (k={pk.k}, 2n={2 * pk.n}, t={pk.t}) and {args.sec}")
    return 0


def _load_key_file(path: str):
    with open(path, "rb") as fh:
        return mceliece.load_key(fh.read())


def _cmd_encrypt(args) -> int:
    pk = _load_key_file(args.pub)
    if not isinstance(pk, mceliece.PublicKey):
        raise UUVError(f"{args.pub} is not a public key")
    message = read_elements(args.infile)
    ciphertext = mceliece.encrypt(pk, message, seed=args.seed)
    write_elements(args.out, ciphertext)
    return 0


def _cmd_decrypt(args) -> int:
    sk = _load_key_file(args.sec)
    if not isinstance(sk, mceliece.SecretKey):
        raise UUVError(f"{args.sec} is not a secret key")
    ciphertext = read_elements(args.infile)
    message = mceliece.decrypt(sk, ciphertext, s=args.s)
    write_elements(args.out, message)
    return 0


def _make_parser() -> _Parser:
    parser = _Parser(prog="uuv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="threshold curves over an error-rate grid")
    p.add_argument("--p-min", type=float, default=0.0, help="grid start (default 0)")
    p.add_argument("--p-max", type=float, default=0.95, help="grid end (default 0.95)")
    p.add_argument("--steps", type=int, default=96, help="grid points (default 96)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("simulate", help="frame-error-rate experiment")
    p.add_argument("--q", type=int, required=True, help="field size")
    p.add_argument("--n", type=int, required=True, help="leaf code length")
    p.add_argument("--depth", type=int, default=1, choices=(1, 2),
                   help="tree depth; depth 2 reuses --ku/--kv in both halves")
    p.add_argument("--ku", type=int, required=True, help="U leaf dimension")
    p.add_argument("--kv", type=int, required=True, help="V leaf dimension")
    p.add_argument("--p", type=float, required=True, help="channel error rate")
    p.add_argument("--trials", type=int, default=100, help="number of trials (default 100)")
    p.add_argument("--seed", type=int, required=True, help="RNG seed")
    p.add_argument("--s", type=int, default=None,
                   help="multiplicity scale (default: adaptive ladder)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--out", help="also write a CSV row to this path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("decode", help="soft-decode one received word")
    p.add_argument("--q", type=int, required=True, help="field size")
    p.add_argument("--n", type=int, required=True, help="leaf code length")
    p.add_argument("--depth", type=int, default=1, choices=(1, 2), help="tree depth")
    p.add_argument("--ku", type=int, required=True, help="U leaf dimension")
    p.add_argument("--kv", type=int, required=True, help="V leaf dimension")
    p.add_argument("--p", type=float, required=True,
                   help="assumed channel error rate for the reliability model")
    p.add_argument("--word", required=True,
                   help="received word as hex, 2 bytes per element (little-endian)")
    p.add_argument("--s", type=int, default=None,
                   help="multiplicity scale (default: adaptive ladder)")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("expectations",
                       help="closed-form vs derived vs Monte-Carlo table")
    p.add_argument("--p", type=float, required=True, help="channel error rate")
    p.add_argument("--q", type=int, default=1 << 12, help="field size (default 4096)")
    p.add_argument("--samples", type=int, default=2000,
                   help="Monte-Carlo samples per label (default 2000)")
    p.add_argument("--seed", type=int, required=True, help="RNG seed")
    p.add_argument("--labels", nargs="*", choices=analysis.LABELS,
                   help="labels to include (default: all)")
    p.set_defaults(func=_cmd_expectations)

    p = sub.add_parser("keygen", help="generate a key pair")
    p.add_argument("--q", type=int, required=True, help="field size")
    p.add_argument("--n", type=int, required=True, help="half code length")
    p.add_argument("--ku", type=int, help="U dimension (with --kv)")
    p.add_argument("--kv", type=int, help="V dimension (with --ku)")
    p.add_argument("--p-design", type=float,
                   help="design error rate instead of explicit dimensions")
    p.add_argument("--t", type=int, default=None,
                   help="error weight (default: calibrated, slow)")
    p.add_argument("--seed", type=int, required=True, help="RNG seed")
    p.add_argument("--pub", required=True, help="public key output path")
    p.add_argument("--sec", required=True, help="secret key output path")
    p.set_defaults(func=_cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt an element file")
    p.add_argument("--pub", required=True, help="public key path")
    p.add_argument("--in", dest="infile", required=True, help="message file")
    p.add_argument("--out", required=True, help="ciphertext output path")
    p.add_argument("--seed", type=int, required=True, help="RNG seed")
    p.set_defaults(func=_cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt an element file")
    p.add_argument("--sec", required=True, help="secret key path")
    p.add_argument("--in", dest="infile", required=True, help="ciphertext file")
    p.add_argument("--out", required=True, help="message output path")
    p.add_argument("--s", type=int, default=None, help="multiplicity scale override")
    p.set_defaults(func=_cmd_decrypt)
    return parser


def main(argv=None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DecodeFailure, DecryptionFailure, EmptyList) as exc:
        print(f"uuv: decoding failed: {exc}", file=sys.stderr)
        return 2
    except (UUVError, OSError, ValueError) as exc:
        print(f"uuv: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
