"""CPO: overlap-aware CSR-like encoding of activation maps and its SpMv convolution.

Every padded input column w is covered by the kernel windows of output
columns lo(w)..hi(w). Its overlap type is hi - lo (0 for NOP columns, Kw-1
for overlapKw), it belongs to the partition lo(w) where it first appears, and
inside that partition it sits at local column w - lo(w). One NZE at padded row
h is stored as its value plus the row-major local index local + h * Kw.

Stream layout per channel (all counts relative to the block start):

* NOP block, only when pad_left == 0: ``[0, nnz(first col), nnz(first + last col)]``
* one block per overlap type t = max(1, pad_left) .. Kw-1:
  ``[t + 1, c_0 .. c_{Ow-1}]`` with c_s the cumulative NZE count through
  partition s, or -1 when partition s owns no column of this type; a block
  without NZEs collapses to ``[t + 1, NPF]``
* a channel without NZEs collapses to ``[NPC]``
* Kw == 1 uses a single block ``[0, c_0 .. c_{Ow-1}]``, one column per partition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import ConfigError, CorruptionError, ShapeError, UnsupportedConfigError
from .tensor import ActivationMap, ConvConfig, Kernel, OutputMap

NPC = int(K.NPC)
NPF = int(K.NPF)


@dataclass(frozen=True)
class ColumnClassification:
    overlap_type: np.ndarray  # per padded column
    owner: np.ndarray
    local_col: np.ndarray
    ow: int
    kw: int

    def columns_of_type(self, t: int) -> np.ndarray:
        return np.flatnonzero(self.overlap_type == t)


def classify_columns(config: ConvConfig, iw_padded: int | None = None) -> ColumnClassification:
    if config.sw != 1:
        raise UnsupportedConfigError("column classification needs sw == 1")
    wp = config.wp if iw_padded is None else iw_padded
    kw = config.kw
    ow = wp - kw + 1
    if ow < 1:
        raise ConfigError(f"padded width {wp} smaller than kernel width {kw}")
    w = np.arange(wp)
    lo = np.maximum(0, w - kw + 1)
    hi = np.minimum(ow - 1, w)
    return ColumnClassification(
        overlap_type=(hi - lo).astype(np.int64),
        owner=lo.astype(np.int64),
        local_col=(w - lo).astype(np.int64),
        ow=ow,
        kw=kw,
    )


@dataclass(frozen=True)
class BlockLayout:
    """Flattened per-channel block plan consumed by the compiled encoder."""

    nop: bool
    single: bool
    first_tag: int
    n_blocks: int  # overlap blocks after the optional NOP
    kind: np.ndarray
    tag: np.ndarray
    start: np.ndarray
    col_w: np.ndarray
    col_owner: np.ndarray
    col_local: np.ndarray
    ow: int


def check_sparse_config(config: ConvConfig) -> None:
    if not config.unit_stride:
        raise UnsupportedConfigError("CPO/CPS paths need sh == sw == 1")
    if config.pointwise:
        raise UnsupportedConfigError("CPO/CPS paths exclude pointwise (1x1) kernels")


def block_layout(config: ConvConfig) -> BlockLayout:
    check_sparse_config(config)
    cls = classify_columns(config)
    kw, ow = config.kw, cls.ow
    if kw == 1:
        w = np.arange(config.wp)
        return BlockLayout(
            nop=False, single=True, first_tag=0, n_blocks=1,
            kind=np.array([K.KIND_SINGLE], np.int64), tag=np.array([0], np.int64),
            start=np.array([0, config.wp], np.int64),
            col_w=w.astype(np.int64), col_owner=w.astype(np.int64),
            col_local=np.zeros(config.wp, np.int64), ow=ow,
        )
    nop = config.pad_left == 0
    m = max(1, config.pad_left)
    data_cols = np.arange(config.pad_left, config.pad_left + config.iw)
    lowest = 0 if nop else m
    if cls.overlap_type[data_cols].min() < lowest:
        raise UnsupportedConfigError(
            "left padding exceeds the overlap types present on the right edge; "
            "pad_left must not exceed pad_right and must stay below Kw"
        )
    kinds, tags, starts = [], [], [0]
    col_w, col_owner, col_local = [], [], []
    types = ([0] if nop else []) + list(range(m, kw))
    for t in types:
        cols = cls.columns_of_type(t)
        cols = cols[np.lexsort((cols, cls.owner[cols]))]
        kinds.append(K.KIND_NOP if t == 0 else K.KIND_OVERLAP)
        tags.append(0 if t == 0 else t + 1)
        col_w.extend(cols)
        col_owner.extend(cls.owner[cols])
        col_local.extend(cls.local_col[cols])
        starts.append(len(col_w))
    arr = lambda xs: np.asarray(xs, dtype=np.int64)
    return BlockLayout(
        nop=nop, single=False, first_tag=m + 1, n_blocks=kw - m,
        kind=arr(kinds), tag=arr(tags), start=arr(starts),
        col_w=arr(col_w), col_owner=arr(col_owner), col_local=arr(col_local), ow=ow,
    )


@dataclass(frozen=True)
class CpoEncoding:
    """ptr / DA / IN streams, one triple per image.

    ``block_bases[n]`` holds rows (channel, tag, ptr offset, DA offset, IN
    offset) marking where each emitted block starts; NPC channels get one
    row tagged NPC. It is bookkeeping only and not part of the stored size.
    """

    config: ConvConfig
    channels: int
    ptr: tuple
    da: tuple
    inn: tuple
    block_bases: tuple
    scheme: str = "cpo"

    @property
    def n_images(self) -> int:
        return len(self.ptr)

    @property
    def ptr_len(self) -> int:
        return sum(len(p) for p in self.ptr)

    @property
    def da_len(self) -> int:
        return sum(len(d) for d in self.da)

    @property
    def in_len(self) -> int:
        return sum(len(i) for i in self.inn)

    @property
    def total(self) -> int:
        return self.ptr_len + self.da_len + self.in_len

    @property
    def count_npc(self) -> int:
        return sum(int(np.count_nonzero(p == NPC)) for p in self.ptr)

    @property
    def count_npf(self) -> int:
        return sum(int(np.count_nonzero(p == NPF)) for p in self.ptr)


def encode(amap: ActivationMap, config: ConvConfig, scheme: str = "cpo") -> CpoEncoding:
    config.for_map(amap)
    lay = block_layout(config)
    cps = scheme == "cps" and not lay.single
    n_ch = amap.channels
    ptr_cap = n_ch * (3 * int(lay.nop) + lay.n_blocks * (1 + lay.ow))
    rows_cap = n_ch * len(lay.kind)
    ptrs, das, ins, bases = [], [], [], []
    for img in amap.data:
        nnz = int(np.count_nonzero(img))
        ptr = np.empty(ptr_cap, np.int32)
        da = np.empty(nnz, np.float32)
        inn = np.empty(nnz, np.int32)
        bb = np.empty((rows_cap, 5), np.int64)
        pl, dl, il, bl = K.encode_image(
            img, config.pad_top, config.pad_left, config.iw, config.hp, config.kw, lay.ow,
            lay.kind, lay.tag, lay.start, lay.col_w, lay.col_owner, lay.col_local,
            cps, ptr, da, inn, bb,
        )
        assert dl == nnz
        for a in (ptr[:pl], da, inn[:il], bb[:bl]):
            a.flags.writeable = False
        ptrs.append(ptr[:pl])
        das.append(da)
        ins.append(inn[:il])
        bases.append(bb[:bl])
    return CpoEncoding(config, n_ch, tuple(ptrs), tuple(das), tuple(ins), tuple(bases), scheme)


def cpo_encode(amap: ActivationMap, config: ConvConfig) -> CpoEncoding:
    return encode(amap, config, "cpo")


def _walk(enc: CpoEncoding, mode: int, kernel: Kernel | None = None, n_kernels: int = 1):
    cfg = enc.config
    lay = block_layout(cfg)
    oh, ow = cfg.oh, cfg.ow
    cps = enc.scheme == "cps" and not lay.single
    if kernel is not None:
        w = kernel.flat()
        if w.shape[0] != enc.channels:
            raise ShapeError(f"kernel has {w.shape[0]} channels, encoding has {enc.channels}")
        if (kernel.kh, kernel.kw) != (cfg.kh, cfg.kw):
            raise ShapeError("kernel geometry does not match the encoding's config")
        nk = kernel.n_kernels
    else:
        nk = n_kernels
        w = np.zeros((1, nk, 1))
    results = []
    for n in range(enc.n_images):
        ptr, da, inn = enc.ptr[n], enc.da[n], enc.inn[n]
        if mode == K.MODE_CONV:
            out = np.zeros((nk, oh, ow))
        else:
            out = np.zeros((1, 1, 1))
        cap = len(da) if mode == K.MODE_DECODE else 0
        dec = np.zeros((cap, 5), np.int64)
        dec_vals = np.zeros(cap, np.float32)
        stats = np.zeros(3, np.int64)
        status, where = K.walk(
            ptr, da, inn, enc.channels, cfg.kh, cfg.kw, oh, ow, cfg.hp, lay.nop,
            lay.first_tag, lay.n_blocks, lay.single, cps, mode, w, out, dec, dec_vals, stats,
        )
        if status != K.OK:
            raise CorruptionError(
                f"image {n}: {K.STATUS_TEXT.get(status, 'corrupt stream')} (ptr position {where})"
            )
        results.append((out, dec[: stats[2]], dec_vals[: stats[2]], stats))
    return results


def cpo_conv(enc: CpoEncoding, kernel: Kernel, config: ConvConfig | None = None) -> OutputMap:
    """Sum of per-overlap-type partial outputs, one scatter per stored NZE."""
    if config is not None and config != enc.config:
        raise ConfigError("encoding was produced under a different config")
    res = _walk(enc, K.MODE_CONV, kernel)
    return OutputMap(np.stack([r[0] for r in res]).astype(np.float32))


def scatter_stats(enc: CpoEncoding, n_kernels: int = 1) -> tuple[int, int]:
    """(multiply-accumulates, scatter calls) a convolution would perform."""
    res = _walk(enc, K.MODE_COUNT, n_kernels=n_kernels)
    return int(sum(r[3][0] for r in res)), int(sum(r[3][1] for r in res))


def cpo_mac_count(enc: CpoEncoding, config: ConvConfig | None = None, n_kernels: int = 1) -> int:
    return scatter_stats(enc, n_kernels)[0]


def decode(enc: CpoEncoding) -> list[np.ndarray]:
    """Replay the streams into (channel, padded h, padded w, value) rows per image."""
    out = []
    for _, dec, vals, _ in _walk(enc, K.MODE_DECODE):
        rows = np.empty((len(vals), 4), np.float64)
        rows[:, :3] = dec[:, :3]
        rows[:, 3] = vals
        out.append(rows)
    return out


def decoded_indices(enc: CpoEncoding) -> list[np.ndarray]:
    """Per image, (ptype, local index) of every NZE in stream order."""
    return [dec[:, 3:5].copy() for _, dec, _, _ in _walk(enc, K.MODE_DECODE)]


def conv_spmv(da_value: float, local_index: int, ptype: int, s: int,
              kernel_slice: np.ndarray, output_plane: np.ndarray, kh: int, kw: int) -> int:
    """Scatter one NZE into ``output_plane`` (Oh x Ow, float64, in place).

    ``kernel_slice`` is the row-major Kh*Kw weight vector of one (channel,
    kernel) pair. The NZE reaches output rows ``local_index // kw - l`` for
    every kernel row l still inside the output, and columns s .. s + ptype.
    Returns the number of multiply-accumulates performed.
    """
    oh, ow = output_plane.shape
    if not 0 <= local_index < (oh + kh - 1) * kw:
        raise ValueError(f"local index {local_index} outside the partition frame")
    w = np.asarray(kernel_slice, np.float64).reshape(1, 1, kh * kw)
    out = output_plane.reshape(1, oh, ow)
    macs = K.scatter(float(da_value), int(local_index), int(ptype), int(s), 0,
                     kh, kw, oh, ow, w, out)
    if macs < 0:
        raise ValueError("NZE footprint falls outside the output or kernel")
    return macs
