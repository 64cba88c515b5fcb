"""Binary tensor / encoding dumps and the plain-text profile, plan and CSV formats.

All binary fields are little-endian. Tensor file::

    b"CPOT" u32 version u32 n u32 c u32 h u32 w   float32[n*c*h*w]

Encoding dump (magic b"CPOE" or b"CPSE")::

    magic u32 version i32[10] config (ih iw kh kw sh sw pad t/b/l/r)
    u32 n_images u32 channels
    per image: u32 len_ptr u32 len_da u32 len_in
    per image: i32 ptr[len_ptr] i32 in[len_in] f32 da[len_da]
"""
from __future__ import annotations

import csv
import struct
from dataclasses import fields
from pathlib import Path

import numpy as np

from .cpo import CpoEncoding
from .errors import CorruptionError
from .tensor import ActivationMap, ConvConfig

VERSION = 1
TENSOR_MAGIC = b"CPOT"
DUMP_MAGIC = {"cpo": b"CPOE", "cps": b"CPSE"}
CSV_COLUMNS = ("layer_id", "algo", "density", "encode_ns", "conv_ns", "total_ns",
               "mac_count", "size_elems", "cr_vs_im2col")
_CONFIG_FIELDS = [f.name for f in fields(ConvConfig)]


def write_tensor(path, data) -> None:
    arr = np.ascontiguousarray(np.asarray(data, dtype="<f4"))
    if arr.ndim != 4:
        raise ValueError(f"tensor files hold 4-D arrays, got {arr.ndim}-D")
    with open(path, "wb") as f:
        f.write(TENSOR_MAGIC + struct.pack("<5I", VERSION, *arr.shape))
        f.write(arr.tobytes())


def read_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != TENSOR_MAGIC:
        raise CorruptionError(f"{path}: not a tensor file")
    if len(raw) < 24:
        raise CorruptionError(f"{path}: truncated header")
    version, *dims = struct.unpack_from("<5I", raw, 4)
    if version != VERSION:
        raise CorruptionError(f"{path}: unsupported version {version}")
    body = raw[24:]
    if len(body) != 4 * int(np.prod(dims)):
        raise CorruptionError(f"{path}: payload size does not match dims {dims}")
    return np.frombuffer(body, dtype="<f4").reshape(dims).astype(np.float32)


def load_map(path) -> ActivationMap:
    return ActivationMap(read_tensor(path))


def write_encoding(path, enc: CpoEncoding) -> None:
    cfg = [getattr(enc.config, name) for name in _CONFIG_FIELDS]
    with open(path, "wb") as f:
        f.write(DUMP_MAGIC[enc.scheme] + struct.pack("<I", VERSION))
        f.write(struct.pack("<10i", *cfg))
        f.write(struct.pack("<2I", enc.n_images, enc.channels))
        for p, d, i in zip(enc.ptr, enc.da, enc.inn):
            f.write(struct.pack("<3I", len(p), len(d), len(i)))
        for p, d, i in zip(enc.ptr, enc.da, enc.inn):
            f.write(np.asarray(p, "<i4").tobytes())
            f.write(np.asarray(i, "<i4").tobytes())
            f.write(np.asarray(d, "<f4").tobytes())


def read_encoding(path) -> CpoEncoding:
    """Load a dump. Structural damage to the streams surfaces later, when they are walked."""
    raw = Path(path).read_bytes()
    schemes = {v: k for k, v in DUMP_MAGIC.items()}
    if raw[:4] not in schemes:
        raise CorruptionError(f"{path}: not an encoding dump")
    try:
        (version,) = struct.unpack_from("<I", raw, 4)
        if version != VERSION:
            raise CorruptionError(f"{path}: unsupported version {version}")
        config = ConvConfig(*struct.unpack_from("<10i", raw, 8))
        n, c = struct.unpack_from("<2I", raw, 48)
        lens = np.frombuffer(raw, "<u4", 3 * n, 56).reshape(n, 3).astype(np.int64)
    except (struct.error, ValueError) as e:
        raise CorruptionError(f"{path}: bad header ({e})") from e
    pos = 56 + 12 * n
    if len(raw) != pos + 4 * int(lens.sum()):
        raise CorruptionError(f"{path}: stream lengths do not match file size")
    ptrs, das, ins = [], [], []
    for lp, ld, li in lens:
        for out, count, dt in ((ptrs, lp, "<i4"), (ins, li, "<i4"), (das, ld, "<f4")):
            a = np.frombuffer(raw, dt, count, pos).astype(np.float32 if dt == "<f4" else np.int32)
            a.flags.writeable = False
            out.append(a)
            pos += 4 * count
    empty = tuple(np.zeros((0, 5), np.int64) for _ in range(n))
    return CpoEncoding(config, c, tuple(ptrs), tuple(das), tuple(ins), empty, schemes[raw[:4]])


def write_profile_csv(path, rows) -> None:
    """rows: mappings with the nine CSV_COLUMNS keys."""
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: r[k] for k in CSV_COLUMNS})


def read_profile_csv(path) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise CorruptionError(f"{path}: expected columns {CSV_COLUMNS}")
        rows = []
        for r in reader:
            rows.append({
                "layer_id": int(r["layer_id"]), "algo": r["algo"],
                "density": float(r["density"]),
                **{k: int(r[k]) for k in ("encode_ns", "conv_ns", "total_ns", "mac_count", "size_elems")},
                "cr_vs_im2col": float(r["cr_vs_im2col"]),
            })
    return rows


def _data_lines(path):
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line.split()


def write_density_profile(path, densities: dict[int, float]) -> None:
    with open(path, "w") as f:
        for lid in sorted(densities):
            f.write(f"{lid} {densities[lid]:.6g}\n")


def read_density_profile(path) -> dict[int, float]:
    out = {}
    for parts in _data_lines(path):
        if len(parts) != 2:
            raise CorruptionError(f"{path}: expected 'layer_id density', got {' '.join(parts)!r}")
        d = float(parts[1])
        if not 0.0 <= d <= 1.0:
            raise CorruptionError(f"{path}: density {d} outside [0, 1]")
        out[int(parts[0])] = d
    return out


def write_plan(path, choices: dict[int, str], mode: str, seed: int) -> None:
    with open(path, "w") as f:
        f.write(f"# mode {mode}\n# seed {seed}\n")
        for lid in sorted(choices):
            f.write(f"{lid} {choices[lid]}\n")


def read_plan(path) -> tuple[str, int, dict[int, str]]:
    mode, seed, choices = None, None, {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("# mode "):
            mode = line.split()[2]
        elif line.startswith("# seed "):
            seed = int(line.split()[2])
    for parts in _data_lines(path):
        choices[int(parts[0])] = parts[1]
    if mode is None:
        raise CorruptionError(f"{path}: plan header lacks a mode line")
    return mode, seed, choices
