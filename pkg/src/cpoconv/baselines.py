"""Dense ground truth and the lowering-based baselines (im2col, CSCC)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import _kernels as K
from .errors import ConfigError, ShapeError, UnsupportedConfigError
from .tensor import ActivationMap, ConvConfig, Kernel, OutputMap


def direct_conv(amap: ActivationMap, kernel: Kernel, config: ConvConfig) -> OutputMap:
    """Plain definition of 2-D convolution (cross-correlation), pad cells read as 0.

    Accumulates per output in (channel, kernel row, kernel column) order.
    """
    kernel.check(amap, config)
    x = amap.padded(config).astype(np.float64)
    wts = kernel.data.astype(np.float64)
    oh, ow, sh, sw = config.oh, config.ow, config.sh, config.sw
    out = np.zeros((amap.n_images, kernel.n_kernels, oh, ow))
    for c in range(amap.channels):
        for h in range(config.kh):
            for w in range(config.kw):
                patch = x[:, c, h:h + sh * (oh - 1) + 1:sh, w:w + sw * (ow - 1) + 1:sw]
                out += patch[:, None] * wts[None, :, c, h, w, None, None]
    return OutputMap(out.astype(np.float32))


@dataclass(frozen=True)
class LoweredMatrix:
    data: np.ndarray  # (In, rows, cols) for im2col, (In, Ic, rows, cols) for mec
    scheme: str
    out_hw: tuple[int, int]

    @property
    def rows(self) -> int:
        return self.data.shape[-2]

    @property
    def cols(self) -> int:
        return self.data.shape[-1]

    @property
    def size(self) -> int:
        return int(self.data.size)


def _windows(amap: ActivationMap, config: ConvConfig) -> np.ndarray:
    x = amap.padded(config)
    win = sliding_window_view(x, (config.kh, config.kw), axis=(2, 3))
    return win[:, :, ::config.sh, ::config.sw]  # (In, Ic, Oh, Ow, Kh, Kw)


def im2col_lower(amap: ActivationMap, config: ConvConfig) -> LoweredMatrix:
    """One row per output site, holding that site's patch for every channel."""
    win = _windows(amap, config)
    n, c, oh, ow, kh, kw = win.shape
    rows = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh * ow, c * kh * kw)
    return LoweredMatrix(np.ascontiguousarray(rows), "im2col", (oh, ow))


def gemm_conv(lowered: LoweredMatrix, kernel: Kernel) -> OutputMap:
    if lowered.scheme != "im2col":
        raise ConfigError(f"gemm_conv needs an im2col lowering, got {lowered.scheme}")
    kmat = kernel.data.reshape(kernel.n_kernels, -1).astype(np.float64).T
    if lowered.cols != kmat.shape[0]:
        raise ShapeError(f"lowered matrix has {lowered.cols} columns, kernel needs {kmat.shape[0]}")
    out = lowered.data.astype(np.float64) @ kmat  # (In, Oh*Ow, K)
    oh, ow = lowered.out_hw
    out = out.transpose(0, 2, 1).reshape(-1, kernel.n_kernels, oh, ow)
    return OutputMap(out.astype(np.float32))


def mec_lower(amap: ActivationMap, config: ConvConfig) -> LoweredMatrix:
    """Per channel, row s is the Hp x Kw partition starting at column s, row-major."""
    if config.sw != 1:
        raise UnsupportedConfigError("partition lowering implemented for sw == 1 only")
    x = amap.padded(config)
    win = sliding_window_view(x, config.kw, axis=3)  # (In, Ic, Hp, Ow, Kw)
    n, c, hp, ow, kw = win.shape
    rows = win.transpose(0, 1, 3, 2, 4).reshape(n, c, ow, hp * kw)
    return LoweredMatrix(np.ascontiguousarray(rows), "mec", (config.oh, ow))


@dataclass(frozen=True)
class CsccEncoding:
    """CSR of the partition-lowered matrix, one (Ow + 1)-entry offset row per (image, channel).

    ``chan_start`` locates each channel's first nonzero in the concatenated
    values / col_indices; it is bookkeeping and not part of the stored size.
    """

    config: ConvConfig
    row_offsets: np.ndarray  # (In, Ic, Ow + 1)
    values: np.ndarray
    col_indices: np.ndarray
    chan_start: np.ndarray  # (In, Ic + 1)
    lowered_shape: tuple[int, int]

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def rho_hat(self) -> float:
        """Lowered-matrix density summed over images."""
        n, c = self.row_offsets.shape[:2]
        rows, cols = self.lowered_shape
        return self.nnz / (rows * cols * c)

    @property
    def total(self) -> int:
        return int(self.row_offsets.size) + 2 * self.nnz


def cscc_encode(amap: ActivationMap, config: ConvConfig) -> CsccEncoding:
    if not config.unit_stride:
        raise UnsupportedConfigError("CSCC is implemented for unit strides only")
    low = mec_lower(amap, config)
    n, c, ow, cols = low.data.shape
    nz = np.nonzero(low.data)
    values = low.data[nz].astype(np.float32)
    col_idx = nz[3].astype(np.int32)
    row_id = (nz[0] * c + nz[1]) * ow + nz[2]
    per_row = np.bincount(row_id, minlength=n * c * ow).reshape(n, c, ow)
    offsets = np.zeros((n, c, ow + 1), np.int64)
    np.cumsum(per_row, axis=2, out=offsets[:, :, 1:])
    per_chan = offsets[:, :, -1]
    chan_start = np.zeros((n, c + 1), np.int64)
    np.cumsum(per_chan, axis=1, out=chan_start[:, 1:])
    img_start = np.concatenate([[0], np.cumsum(chan_start[:, -1])])
    chan_start = chan_start + img_start[:-1, None]
    return CsccEncoding(config, offsets, values, col_idx, chan_start, (ow, cols))


def cscc_conv(enc: CsccEncoding, kernel: Kernel, config: ConvConfig | None = None) -> OutputMap:
    cfg = enc.config
    if config is not None and config != cfg:
        raise ConfigError("encoding was produced under a different config")
    n, c = enc.row_offsets.shape[:2]
    if kernel.channels != c:
        raise ShapeError(f"kernel has {kernel.channels} channels, encoding has {c}")
    w = kernel.flat()
    out = np.zeros((n, kernel.n_kernels, cfg.oh, cfg.ow))
    for i in range(n):
        K.cscc_spmv(enc.row_offsets[i], enc.values, enc.col_indices, enc.chan_start[i],
                    c, cfg.kh, cfg.kw, cfg.oh, w, out[i])
    return OutputMap(out.astype(np.float32))


def mac_count_direct(amap: ActivationMap, config: ConvConfig, n_kernels: int = 1) -> int:
    """Count (output site, kernel offset) pairs that meet a nonzero input, times K.

    Enumerates every window placement directly, independent of any encoding.
    """
    if not config.unit_stride:
        raise UnsupportedConfigError("MAC oracle is defined for unit strides")
    nz = amap.padded(config) != 0
    oh, ow = config.oh, config.ow
    total = 0
    for l in range(config.kh):
        for j in range(config.kw):
            total += int(np.count_nonzero(nz[:, :, l:l + oh, j:j + ow]))
    return total * n_kernels


def dense_mac_count(config: ConvConfig, channels: int, n_kernels: int, n_images: int = 1) -> int:
    return n_images * config.oh * config.ow * config.kh * config.kw * channels * n_kernels
