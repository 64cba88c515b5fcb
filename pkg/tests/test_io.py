import numpy as np
import pytest

from cpoconv import io
from cpoconv.cpo import cpo_conv, encode
from cpoconv.errors import CorruptionError
from cpoconv.tensor import ConvConfig, gen_random_kernel, gen_random_map


def test_tensor_round_trip(tmp_path):
    m = gen_random_map((2, 3, 5, 4), 0.4, seed=1)
    p = tmp_path / "m.cpot"
    io.write_tensor(p, m.data)
    assert p.stat().st_size == 24 + 4 * m.data.size
    assert p.read_bytes()[:4] == b"CPOT"
    assert np.array_equal(io.read_tensor(p), m.data)


def test_tensor_rejects_garbage(tmp_path):
    p = tmp_path / "x"
    p.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(CorruptionError):
        io.read_tensor(p)
    io.write_tensor(p, np.zeros((1, 1, 2, 2)))
    p.write_bytes(p.read_bytes()[:-1])
    with pytest.raises(CorruptionError):
        io.read_tensor(p)


@pytest.mark.parametrize("scheme,magic", [("cpo", b"CPOE"), ("cps", b"CPSE")])
def test_encoding_round_trip(tmp_path, scheme, magic):
    cfg = ConvConfig.same(9, 7, 3, 3)
    m = gen_random_map((2, 3, 9, 7), 0.3, seed=2)
    enc = encode(m, cfg, scheme)
    p = tmp_path / "e.bin"
    io.write_encoding(p, enc)
    assert p.read_bytes()[:4] == magic
    back = io.read_encoding(p)
    assert back.config == cfg and back.scheme == scheme and back.channels == 3
    for a, b in zip(enc.ptr + enc.da + enc.inn, back.ptr + back.da + back.inn):
        assert np.array_equal(a, b)
    w = gen_random_kernel((2, 3, 3, 3), seed=0)
    assert np.array_equal(cpo_conv(back, w).data, cpo_conv(enc, w).data)


def test_encoding_damage_detected(tmp_path):
    cfg = ConvConfig.valid(6, 6, 3, 3)
    enc = encode(gen_random_map((1, 2, 6, 6), 0.5, seed=3), cfg)
    p = tmp_path / "e.cpoe"
    io.write_encoding(p, enc)
    raw = bytearray(p.read_bytes())
    p.write_bytes(raw[:-3])
    with pytest.raises(CorruptionError):
        io.read_encoding(p)
    # same length, first ptr entry (the NOP tag) overwritten
    bad = bytearray(raw)
    bad[68:72] = (12345).to_bytes(4, "little")
    p.write_bytes(bad)
    back = io.read_encoding(p)
    with pytest.raises(CorruptionError):
        cpo_conv(back, gen_random_kernel((1, 2, 3, 3), seed=0))


def test_profile_csv_round_trip(tmp_path):
    rows = [{"layer_id": 0, "algo": "cpo", "density": 0.05, "encode_ns": 10, "conv_ns": 20,
             "total_ns": 30, "mac_count": 99, "size_elems": 1234, "cr_vs_im2col": 12.5}]
    p = tmp_path / "p.csv"
    io.write_profile_csv(p, rows)
    assert p.read_text().splitlines()[0] == ",".join(io.CSV_COLUMNS)
    assert io.read_profile_csv(p) == rows
    p.write_text("a,b\n1,2\n")
    with pytest.raises(CorruptionError):
        io.read_profile_csv(p)


def test_density_profile_and_plan(tmp_path):
    p = tmp_path / "d.txt"
    io.write_density_profile(p, {1: 0.3, 0: 0.05})
    assert p.read_text() == "0 0.05\n1 0.3\n"
    assert io.read_density_profile(p) == {0: 0.05, 1: 0.3}
    p.write_text("0 1.5\n")
    with pytest.raises(CorruptionError):
        io.read_density_profile(p)
    q = tmp_path / "plan.txt"
    io.write_plan(q, {2: "cpo", 0: "im2col"}, "favour_time", 7)
    assert io.read_plan(q) == ("favour_time", 7, {0: "im2col", 2: "cpo"})
