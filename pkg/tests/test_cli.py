import io
import subprocess
import sys

import numpy as np
import pytest

from uuvcodes import analysis, mceliece
from uuvcodes.cli import main, read_elements, write_elements
from uuvcodes.galois import field_new


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- element files -----------------------------------------------------------

def test_element_file_roundtrip(tmp_path):
    path = str(tmp_path / "x.bin")
    write_elements(path, [0, 1, 65535, 77])
    back = read_elements(path)
    assert list(back) == [0, 1, 65535, 77]
    raw = open(path, "rb").read()
    assert raw[:4] == (4).to_bytes(4, "little")
    assert len(raw) == 4 + 8


def test_element_file_validation(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"\x05\x00\x00\x00\x01\x00")  # claims 5, holds 1
    with pytest.raises(Exception):
        read_elements(str(path))


# --- sweep -------------------------------------------------------------------

def test_sweep_stdout_matches_library(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--p-min", "0", "--p-max", "0.95",
                           "--steps", "96")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "p,gs,uv1,uv2_paper,uv2_derived"
    assert len(lines) == 97
    # row at p = 0.5 (step 0.01 grid)
    row = lines[51].split(",")
    assert row[0] == "0.5"
    assert abs(float(row[2]) - 0.239583333333) < 1e-12


def test_sweep_file_deterministic(tmp_path, capsys):
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert run_cli(capsys, "sweep", "--steps", "20", "--out", a)[0] == 0
    assert run_cli(capsys, "sweep", "--steps", "20", "--out", b)[0] == 0
    assert open(a, "rb").read() == open(b, "rb").read()


# --- simulate ----------------------------------------------------------------

def test_simulate_deterministic_line(capsys):
    args = ("simulate", "--q", "16", "--n", "8", "--ku", "3", "--kv", "2",
            "--p", "0.1", "--trials", "8", "--seed", "7", "--s", "16")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    assert out1.startswith("p=0.1 q=16 n=8 depth=1 ku=3 kv=2 trials=8")


def test_simulate_matches_library(capsys, tmp_path):
    out_csv = str(tmp_path / "fer.csv")
    code, out, _ = run_cli(capsys, "simulate", "--q", "16", "--n", "8",
                           "--ku", "3", "--kv", "2", "--p", "0.15",
                           "--trials", "6", "--seed", "3", "--s", "16",
                           "--out", out_csv)
    assert code == 0
    from uuvcodes.rs_kv import RSCode
    from uuvcodes.uuv import Leaf, Node
    node = Node(Leaf(RSCode(field_new(16), 8, 3)), Leaf(RSCode(field_new(16), 8, 2)))
    res = analysis.fer_experiment(analysis.RunConfig(node, 0.15, 6, 3, s=16))
    assert f"successes={res.successes}" in out
    assert f"successes,fer,seed" in open(out_csv).read()


def test_simulate_depth2(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--q", "16", "--n", "4",
                           "--depth", "2", "--ku", "2", "--kv", "1",
                           "--p", "0.05", "--trials", "4", "--seed", "1",
                           "--s", "8")
    assert code == 0
    assert "depth=2" in out


# --- decode ------------------------------------------------------------------

def _hex_word(arr):
    return np.ascontiguousarray(arr, dtype="<u2").tobytes().hex()


def test_decode_corrects_error(capsys):
    from uuvcodes.rs_kv import RSCode
    from uuvcodes.uuv import Leaf, Node, uuv_encode
    ctx = field_new(16)
    node = Node(Leaf(RSCode(ctx, 8, 3)), Leaf(RSCode(ctx, 8, 2)))
    msg = np.array([1, 2, 3, 4, 5])
    cw = uuv_encode(node, msg)
    noisy = cw.copy()
    noisy[2] ^= 7
    code, out, _ = run_cli(capsys, "decode", "--q", "16", "--n", "8",
                           "--ku", "3", "--kv", "2", "--p", "0.1",
                           "--word", _hex_word(noisy), "--s", "16")
    assert code == 0
    assert f"codeword={_hex_word(cw)}" in out
    assert f"message={_hex_word(msg)}" in out


def test_decode_failure_exits_2(capsys):
    # rate-1 halves starve the interpolation: nothing decodable at s=1
    word = _hex_word(np.zeros(8, dtype=np.int64))
    code, _, err = run_cli(capsys, "decode", "--q", "8", "--n", "4",
                           "--ku", "4", "--kv", "4", "--p", "0.4",
                           "--word", word, "--s", "1")
    assert code == 2
    assert "decoding failed" in err


def test_decode_bad_hex_exits_1(capsys):
    code, _, err = run_cli(capsys, "decode", "--q", "16", "--n", "8",
                           "--ku", "3", "--kv", "2", "--p", "0.1",
                           "--word", "zz")
    assert code == 1
    assert "error" in err


def test_decode_wrong_length_exits_1(capsys):
    code, _, err = run_cli(capsys, "decode", "--q", "16", "--n", "8",
                           "--ku", "3", "--kv", "2", "--p", "0.1",
                           "--word", "0100")
    assert code == 1


# --- expectations ------------------------------------------------------------

def test_expectations_table(capsys):
    args = ("expectations", "--p", "0.5", "--q", "256", "--samples", "400",
            "--seed", "3", "--labels", "U", "V1")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    lines = out1.strip().split("\n")
    assert lines[0] == "label,p,paper,derived,mc,mc_stderr"
    u_row = lines[1].split(",")
    assert u_row[0] == "U"
    assert abs(float(u_row[2]) - float(u_row[3])) < 1e-12
    v1_row = lines[2].split(",")
    assert abs(float(v1_row[2]) - 0.208333333333) < 1e-9   # published form
    assert abs(float(v1_row[3]) - 0.173611111111) < 1e-9   # derived form


# --- crypto pipeline ---------------------------------------------------------

def test_crypto_pipeline(tmp_path, capsys):
    pub, sec = str(tmp_path / "pk.bin"), str(tmp_path / "sk.bin")
    code, out, _ = run_cli(capsys, "keygen", "--q", "16", "--n", "8",
                           "--ku", "3", "--kv", "2", "--t", "1",
                           "--seed", "9", "--pub", pub, "--sec", sec)
    assert code == 0 and "wrote" in out
    msg_f = str(tmp_path / "m.bin")
    ct_f = str(tmp_path / "c.bin")
    out_f = str(tmp_path / "d.bin")
    write_elements(msg_f, [1, 5, 11, 0, 7])
    assert run_cli(capsys, "encrypt", "--pub", pub, "--in", msg_f,
                   "--out", ct_f, "--seed", "4")[0] == 0
    assert run_cli(capsys, "decrypt", "--sec", sec, "--in", ct_f,
                   "--out", out_f)[0] == 0
    assert open(msg_f, "rb").read() == open(out_f, "rb").read()


def test_keygen_deterministic_files(tmp_path, capsys):
    files = []
    for tag in ("a", "b"):
        pub = str(tmp_path / f"pk{tag}.bin")
        sec = str(tmp_path / f"sk{tag}.bin")
        assert run_cli(capsys, "keygen", "--q", "16", "--n", "8", "--ku", "3",
                       "--kv", "2", "--t", "1", "--seed", "12",
                       "--pub", pub, "--sec", sec)[0] == 0
        files.append((open(pub, "rb").read(), open(sec, "rb").read()))
    assert files[0] == files[1]


def test_encrypt_deterministic_files(tmp_path, capsys):
    pub, sec = str(tmp_path / "pk.bin"), str(tmp_path / "sk.bin")
    run_cli(capsys, "keygen", "--q", "16", "--n", "8", "--ku", "3", "--kv", "2",
            "--t", "1", "--seed", "9", "--pub", pub, "--sec", sec)
    msg_f = str(tmp_path / "m.bin")
    write_elements(msg_f, [3, 3, 3, 3, 3])
    cts = []
    for tag in ("x", "y"):
        ct = str(tmp_path / f"{tag}.bin")
        run_cli(capsys, "encrypt", "--pub", pub, "--in", msg_f, "--out", ct,
                "--seed", "21")
        cts.append(open(ct, "rb").read())
    assert cts[0] == cts[1]


def test_decrypt_failure_exits_2(tmp_path, capsys):
    pub, sec = str(tmp_path / "pk.bin"), str(tmp_path / "sk.bin")
    run_cli(capsys, "keygen", "--q", "16", "--n", "8", "--ku", "3", "--kv", "2",
            "--t", "1", "--seed", "5", "--pub", pub, "--sec", sec)
    msg_f = str(tmp_path / "m.bin")
    write_elements(msg_f, [0, 1, 2, 3, 4])
    ct_f = str(tmp_path / "c.bin")
    run_cli(capsys, "encrypt", "--pub", pub, "--in", msg_f, "--out", ct_f,
            "--seed", "0")
    # shift every ciphertext symbol: far beyond the weight budget
    ctx = field_new(16)
    tampered = ctx.add(read_elements(ct_f), np.ones(16, dtype=np.int64))
    write_elements(ct_f, tampered)
    code, _, err = run_cli(capsys, "decrypt", "--sec", sec, "--in", ct_f,
                           "--out", str(tmp_path / "d.bin"))
    assert code == 2
    assert "decoding failed" in err


def test_wrong_key_kind_exits_1(tmp_path, capsys):
    pub, sec = str(tmp_path / "pk.bin"), str(tmp_path / "sk.bin")
    run_cli(capsys, "keygen", "--q", "16", "--n", "8", "--ku", "3", "--kv", "2",
            "--t", "1", "--seed", "5", "--pub", pub, "--sec", sec)
    msg_f = str(tmp_path / "m.bin")
    write_elements(msg_f, [0, 0, 0, 0, 0])
    code, _, err = run_cli(capsys, "encrypt", "--pub", sec, "--in", msg_f,
                           "--out", str(tmp_path / "c.bin"), "--seed", "1")
    assert code == 1
    assert "not a public key" in err


def test_corrupt_key_file_exits_1(tmp_path, capsys):
    pub = str(tmp_path / "pk.bin")
    sec = str(tmp_path / "sk.bin")
    run_cli(capsys, "keygen", "--q", "16", "--n", "8", "--ku", "3", "--kv", "2",
            "--t", "1", "--seed", "5", "--pub", pub, "--sec", sec)
    blob = bytearray(open(pub, "rb").read())
    blob[-1] ^= 0xFF
    open(pub, "wb").write(bytes(blob))
    msg_f = str(tmp_path / "m.bin")
    write_elements(msg_f, [0, 0, 0, 0, 0])
    code, _, err = run_cli(capsys, "encrypt", "--pub", pub, "--in", msg_f,
                           "--out", str(tmp_path / "c.bin"), "--seed", "1")
    assert code == 1


def test_missing_file_exits_1(capsys):
    code, _, err = run_cli(capsys, "decrypt", "--sec", "/nonexistent/sk.bin",
                           "--in", "/nonexistent/ct.bin", "--out", "/tmp/x.bin")
    assert code == 1


def test_usage_error_exit_code():
    # argparse errors raise SystemExit(1) through the overridden handler
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--q", "16"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 1


def test_module_entrypoint_help():
    out = subprocess.run([sys.executable, "-m", "uuvcodes.cli", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "sweep" in out.stdout and "decrypt" in out.stdout


def test_subcommand_help_lists_flags():
    for cmd in ("sweep", "simulate", "decode", "expectations",
                "keygen", "encrypt", "decrypt"):
        with pytest.raises(SystemExit) as e:
            main([cmd, "--help"])
        assert e.value.code == 0
