from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpoconv.baselines import cscc_encode, im2col_lower, mec_lower
from cpoconv.cpo import cpo_encode
from cpoconv.cps import set4_census
from cpoconv.errors import ConfigError
from cpoconv.space import (compression_ratio, density_bound_vs_cscc, density_bound_vs_im2col,
                           density_bound_vs_mec, size_cpo_analytic, size_cpo_worst_case,
                           size_cps_analytic, size_cscc, size_im2col, size_mec, size_report)
from cpoconv.tensor import ActivationMap, ConvConfig, gen_random_map, measure_density
from strategies import config_and_map, sparse_configs


def test_im2col_size():
    assert size_im2col(ConvConfig.valid(8, 8, 4, 4), 1, 1) == 400
    assert size_im2col(ConvConfig.same(7, 7, 3, 3), 1, 512) == 225_792
    assert size_im2col(ConvConfig.valid(6, 5, 1, 1), 2, 3) == 6 * 5 * 3 * 2
    m = gen_random_map((1, 2, 6, 6), 0.5, seed=0)
    assert im2col_lower(m, ConvConfig.same(6, 6, 3, 3)).size == size_im2col(ConvConfig.same(6, 6, 3, 3), 1, 2)


def test_mec_size():
    assert size_mec(ConvConfig.valid(8, 8, 4, 4), 1, 1) == 160
    assert size_mec(ConvConfig.valid(5, 6, 2, 6), 1, 3) == 6 * 5 * 3  # Kw = Iw: one full copy
    assert size_mec(ConvConfig.valid(5, 6, 3, 1), 1, 1) == 6 * 5
    m = gen_random_map((1, 1, 8, 8), 0.5, seed=0)
    assert mec_lower(m, ConvConfig.valid(8, 8, 4, 4)).size == 160


def test_cscc_size():
    cfg = ConvConfig.valid(8, 8, 4, 4)
    assert size_cscc(cfg, 1, 2, 0) == 2 * 6
    assert size_cscc(cfg, 1, 2, 1) == 2 * 6 + 2 * 160 * 2
    with pytest.raises(ConfigError):
        size_cscc(cfg, 1, 1, 1.5)
    with pytest.raises(ConfigError):
        size_cscc(cfg, 1, 1, -0.1)


def test_cpo_analytic_examples(example8):
    cfg = ConvConfig.valid(8, 8, 4, 4)
    zero = np.zeros((2, 3))
    assert size_cpo_analytic(cfg, zero, 0).total == 6
    full = gen_random_map((1, 1, 8, 8), 1.0, seed=0)
    pred = size_cpo_analytic(cfg, measure_density(full).per_channel, 0)
    assert pred.ptr == 3 + 3 * 6 == cpo_encode(full, cfg).ptr_len
    m, _ = example8
    enc = cpo_encode(m, cfg)
    pred = size_cpo_analytic(cfg, measure_density(m).per_channel, enc.count_npf)
    assert (pred.ptr, pred.da, pred.inn) == (17, 10, 10) == (enc.ptr_len, enc.da_len, enc.in_len)


def test_kw1_pointer_size():
    cfg = ConvConfig.valid(6, 4, 3, 1)
    m = gen_random_map((1, 2, 6, 4), 1.0, seed=0)
    assert size_cpo_analytic(cfg, measure_density(m).per_channel, 0).ptr == 2 * (1 + 4)
    assert cpo_encode(m, cfg).ptr_len == 10


def test_cps_analytic_coefficients():
    cfg = ConvConfig.valid(8, 8, 3, 3)
    x = np.zeros((1, 1, 8, 8), np.float32)
    x[0, 0, :, 2:6] = 1
    m = ActivationMap(x)
    cen = set4_census(m, cfg)
    pred = size_cps_analytic(cfg, measure_density(m).per_channel, cen, cpo_encode(m, cfg).count_npf)
    assert pred.inn == 2 * cen.c_dprime[4] == 16
    assert pred.da == 32


@given(config_and_map(max_side=12))
def test_reconciliation_exact(case):
    cfg, m = case
    for algo in ("cpo", "cps", "cscc"):
        rep = size_report(m, cfg, algo)
        assert rep.total == rep.elements_ptr + rep.elements_da + rep.elements_in
        assert rep.analytic_total == rep.total, algo
    assert size_report(m, cfg, "cps").total <= size_report(m, cfg, "cpo").total


def test_cscc_formula_matches_measured_rho_hat():
    cfg = ConvConfig.valid(10, 9, 3, 3)
    m = gen_random_map((1, 4, 10, 9), 0.3, seed=2)
    enc = cscc_encode(m, cfg)
    assert size_cscc(cfg, 1, 4, Fraction(enc.nnz, 7 * 3 * 10 * 4)) == enc.total
    assert enc.rho_hat == pytest.approx(enc.nnz / (7 * 3 * 10 * 4))


def test_compression_ratio():
    cfg = ConvConfig.valid(8, 8, 4, 4)
    zero = ActivationMap(np.zeros((1, 3, 8, 8)))
    im2col, cpo = size_report(zero, cfg, "im2col"), size_report(zero, cfg, "cpo")
    assert compression_ratio(im2col, im2col) == 1.0
    assert compression_ratio(im2col, cpo) == 400 * 3 / 3
    assert cpo.cr_vs_im2col == compression_ratio(im2col, cpo)


def test_cr_monotone_in_density():
    cfg = ConvConfig.same(19, 19, 3, 3)
    crs = [size_report(gen_random_map((1, 16, 19, 19), d, seed=4), cfg, "cpo").cr_vs_im2col
           for d in (0.0, 0.05, 0.1, 0.3, 0.6, 1.0)]
    assert all(a >= b for a, b in zip(crs, crs[1:]))


def test_bound_examples():
    cfg = ConvConfig.valid(8, 8, 4, 4)
    b = density_bound_vs_im2col(cfg, 1, 1)
    assert b.raw_threshold == Fraction(379, 128) and b.rho_threshold == 1
    b = density_bound_vs_mec(cfg, 1, 1)
    assert b.raw_threshold == Fraction(139, 128) and b.rho_threshold == 1
    assert b.holds_for(1) and not b.holds_for(Fraction(129, 128))


def test_bound_clamps_to_zero_and_rejects_empty_range():
    # 1x7 kernel on a 1x7 map: im2col holds 7 elements, worst-case CPO ptr alone is 15
    cfg = ConvConfig.valid(1, 7, 1, 7)
    b = density_bound_vs_im2col(cfg, 1, 1)
    assert b.raw_threshold < 0 and b.rho_threshold == 0
    assert size_cpo_worst_case(cfg, 1, 1, 0) > size_im2col(cfg, 1, 1)
    # the clamped interval alone would admit rho = 0, which is a counterexample
    assert 0 <= 0 <= b.rho_threshold
    assert not b.holds_for(0)


def test_cscc_bound_examples(example8):
    m, cfg = example8
    enc = cscc_encode(m, cfg)
    b = density_bound_vs_cscc(cfg, 1, 1, Fraction(enc.nnz, 5 * 4 * 8))
    rho = Fraction(10, 64)
    if b.holds_for(rho):
        assert size_cpo_worst_case(cfg, 1, 1, rho) <= enc.total
    # rho_hat = rho = 0: CSCC keeps In*Ic*(Ow+1) offsets, worst-case CPO keeps 21 pointers
    b0 = density_bound_vs_cscc(cfg, 1, 1, 0)
    assert b0.holds_for(0) == (size_cpo_worst_case(cfg, 1, 1, 0) <= size_cscc(cfg, 1, 1, 0))


@given(sparse_configs(max_side=16, kernels=[(3, 3), (4, 4), (5, 5), (1, 7), (7, 1), (1, 3), (2, 2)]),
       st.integers(1, 3), st.integers(1, 4), st.sampled_from([0.0, 0.05, 0.3, 0.6, 1.0]),
       st.integers(0, 10_000))
def test_bounds_sound(cfg, n, c, d, seed):
    if not cfg.is_valid_padding:
        cfg = ConvConfig.valid(cfg.ih, cfg.iw, cfg.kh, cfg.kw)
    m = gen_random_map((n, c, cfg.ih, cfg.iw), d, seed=seed)
    rho = Fraction(int(np.count_nonzero(m.data)), cfg.ih * cfg.iw)
    worst = size_cpo_worst_case(cfg, n, c, rho)
    if density_bound_vs_im2col(cfg, n, c).holds_for(rho):
        assert worst <= size_im2col(cfg, n, c)
    if density_bound_vs_mec(cfg, n, c).holds_for(rho):
        assert worst <= size_mec(cfg, n, c)
    enc = cscc_encode(m, cfg)
    rho_hat = Fraction(enc.nnz, cfg.ow * cfg.kw * cfg.ih * c)
    if density_bound_vs_cscc(cfg, n, c, rho_hat).holds_for(rho):
        assert worst <= enc.total
