import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpoconv.baselines import (cscc_conv, cscc_encode, dense_mac_count, direct_conv, gemm_conv,
                               im2col_lower, mac_count_direct, mec_lower)
from cpoconv.errors import ConfigError, ShapeError, UnsupportedConfigError
from cpoconv.tensor import ActivationMap, ConvConfig, Kernel, gen_random_kernel, gen_random_map
from oracles import naive_conv, naive_macs
from strategies import config_and_map


def _kernel(cfg, c, k=2, seed=0):
    return gen_random_kernel((k, c, cfg.kh, cfg.kw), (-3, 3), seed=seed, integer=True)


@given(config_and_map(max_side=7))
def test_direct_matches_scalar_loops(case):
    cfg, m = case
    w = _kernel(cfg, m.channels)
    assert np.array_equal(direct_conv(m, w, cfg).data, naive_conv(m.data, w.data, cfg))


@pytest.mark.parametrize("cfg", [ConvConfig.valid(9, 7, 3, 3, 2, 2), ConvConfig(8, 8, 2, 3, 2, 1, 0, 0, 1, 1),
                                 ConvConfig.valid(6, 6, 1, 1, 1, 1)])
def test_strided_and_pointwise_baselines(cfg):
    m = gen_random_map((2, 3, cfg.ih, cfg.iw), 0.5, (-3, 3), seed=1, integer=True)
    w = _kernel(cfg, 3)
    ref = naive_conv(m.data, w.data, cfg)
    assert np.array_equal(direct_conv(m, w, cfg).data, ref)
    assert np.array_equal(gemm_conv(im2col_lower(m, cfg), w).data, ref)


def test_im2col_shape_and_rows():
    m = ActivationMap(np.arange(2 * 16, dtype=np.float32).reshape(1, 2, 4, 4))
    cfg = ConvConfig.valid(4, 4, 3, 3)
    low = im2col_lower(m, cfg)
    assert low.data.shape == (1, 4, 18)
    assert low.size == 4 * 18  # Oh*Ow*Ic*Kh*Kw
    # first row: channel 0 patch at (0, 0) then channel 1 patch
    assert low.data[0, 0, :9].tolist() == [0, 1, 2, 4, 5, 6, 8, 9, 10]
    assert low.data[0, 0, 9] == 16


def test_gemm_rejects_wrong_scheme_and_width():
    m = gen_random_map((1, 2, 5, 5), 0.5, seed=0)
    cfg = ConvConfig.valid(5, 5, 3, 3)
    with pytest.raises(ConfigError):
        gemm_conv(mec_lower(m, cfg), _kernel(cfg, 2))
    with pytest.raises(ShapeError):
        gemm_conv(im2col_lower(m, cfg), _kernel(cfg, 3))


def test_mec_lowering_size():
    m = gen_random_map((1, 1, 8, 8), 1.0, seed=0)
    low = mec_lower(m, ConvConfig.valid(8, 8, 4, 4))
    assert low.data.shape == (1, 1, 5, 32)
    assert low.size == 160
    # row s is the 8x4 slab starting at column s, row-major
    assert np.array_equal(low.data[0, 0, 2].reshape(8, 4), m.data[0, 0, :, 2:6])


@given(config_and_map(max_side=9))
def test_cscc_structure(case):
    cfg, m = case
    enc = cscc_encode(m, cfg)
    low = mec_lower(m, cfg).data
    assert enc.nnz == np.count_nonzero(low)
    assert enc.row_offsets.shape == (m.n_images, m.channels, cfg.ow + 1)
    assert enc.total == m.n_images * m.channels * (cfg.ow + 1) + 2 * enc.nnz
    # rebuild the dense lowered matrix from the CSR rows
    rebuilt = np.zeros_like(low)
    for n in range(m.n_images):
        for c in range(m.channels):
            base = enc.chan_start[n, c]
            offs = enc.row_offsets[n, c]
            for s in range(cfg.ow):
                lo, hi = base + offs[s], base + offs[s + 1]
                rebuilt[n, c, s, enc.col_indices[lo:hi]] = enc.values[lo:hi]
    assert np.array_equal(rebuilt, low)


@given(config_and_map(max_side=9))
def test_cscc_conv_exact(case):
    cfg, m = case
    w = _kernel(cfg, m.channels, k=3)
    assert np.array_equal(cscc_conv(cscc_encode(m, cfg), w).data, direct_conv(m, w, cfg).data)


def test_cscc_refuses_strides_and_config_mismatch():
    m = gen_random_map((1, 1, 9, 9), 0.5, seed=0)
    with pytest.raises(UnsupportedConfigError):
        cscc_encode(m, ConvConfig.valid(9, 9, 3, 3, 2, 2))
    enc = cscc_encode(m, ConvConfig.valid(9, 9, 3, 3))
    with pytest.raises(ConfigError):
        cscc_conv(enc, _kernel(ConvConfig.valid(9, 9, 3, 3), 1), ConvConfig.same(9, 9, 3, 3))


@given(config_and_map(max_side=7), st.integers(1, 3))
def test_mac_oracle(case, nk):
    cfg, m = case
    assert mac_count_direct(m, cfg, nk) == naive_macs(m.data, cfg, nk)


def test_dense_macs():
    cfg = ConvConfig.valid(8, 8, 4, 4)
    m = gen_random_map((1, 2, 8, 8), 1.0, seed=0)
    assert dense_mac_count(cfg, 2, 3) == 25 * 16 * 2 * 3
    assert mac_count_direct(m, cfg, 3) == dense_mac_count(cfg, 2, 3)
