"""Element-count model of every representation, and the break-even density bounds.

One stored scalar (value, index, pointer or offset) counts as one element.
The CPO/CPS predictions take the actual skip-flag counts, so for any encoded
map they must match the measured stream lengths exactly. The bounds use the
worst case instead: NOP present, no NPC, no NPF, M = 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import NamedTuple

import numpy as np

from .baselines import cscc_encode
from .cps import Set4Census, set4_census
from .cpo import encode
from .errors import ConfigError
from .tensor import ActivationMap, ConvConfig, measure_density


class Streams(NamedTuple):
    ptr: int
    da: int
    inn: int

    @property
    def total(self) -> int:
        return self.ptr + self.da + self.inn


def size_im2col(config: ConvConfig, n_images: int, channels: int) -> int:
    return n_images * config.oh * config.ow * channels * config.kw * config.kh


def size_mec(config: ConvConfig, n_images: int, channels: int) -> int:
    return n_images * config.ow * config.kw * config.ih * channels


def size_cscc(config: ConvConfig, n_images: int, channels: int, rho_hat) -> int:
    """Row offsets plus (value, column) pairs; rho_hat is summed over images."""
    if not 0 <= rho_hat <= n_images:
        raise ConfigError(f"lowered-matrix density {rho_hat} outside [0, {n_images}]")
    lm = config.ow * config.kw * config.hp * channels
    return n_images * channels * (config.ow + 1) + round(2 * lm * Fraction(rho_hat))


def nop_size(config: ConvConfig) -> int:
    return 3 if config.pad_left == 0 and config.kw > 1 else 0


def op_size(config: ConvConfig) -> int:
    if config.kw == 1 and config.sw == 1:
        return 1 + config.ow
    m = max(1, config.pad_left)
    return (ceil(config.kw / config.sw) - m) * (1 + config.ow)


def ptr_size(config: ConvConfig, densities: np.ndarray, count_npf: int) -> int:
    """One NPC entry per empty channel, full layout otherwise, minus the NPF discount."""
    per_channel = nop_size(config) + op_size(config)
    nonempty = int(np.count_nonzero(np.asarray(densities) > 0))
    empty = np.asarray(densities).size - nonempty
    return nonempty * max(1, per_channel) + empty - count_npf * (config.ow - 1)


def _nze(config: ConvConfig, densities) -> int:
    return round(config.ih * config.iw * float(np.sum(densities)))


def size_cpo_analytic(config: ConvConfig, densities, count_npf: int) -> Streams:
    """densities: per (image, channel) rho; count_npf: NPF flags in the encoding."""
    nze = _nze(config, densities)
    return Streams(ptr_size(config, densities, count_npf), nze, nze)


def size_cps_analytic(config: ConvConfig, densities, census: Set4Census, count_npf: int) -> Streams:
    return Streams(ptr_size(config, densities, count_npf), _nze(config, densities), census.in_size)


def size_cpo_worst_case(config: ConvConfig, n_images: int, channels: int, rho_sum) -> Fraction:
    """CPO size with every channel and block fully present (the bounds' accounting)."""
    if config.kw == 1:
        ptr = 1 + config.ow
    else:
        ptr = 3 + (ceil(config.kw / config.sw) - 1) * (1 + config.ow)
    return n_images * channels * ptr + 2 * config.ih * config.iw * Fraction(rho_sum)


@dataclass(frozen=True)
class SizeReport:
    algo: str
    elements_ptr: int
    elements_da: int
    elements_in: int
    analytic_total: int
    cr_vs_im2col: float

    @property
    def total(self) -> int:
        return self.elements_ptr + self.elements_da + self.elements_in


def compression_ratio(base: SizeReport, other: SizeReport) -> float:
    return base.total / other.total


def size_report(amap: ActivationMap, config: ConvConfig, algo: str, encoding=None) -> SizeReport:
    """Measured element counts for ``algo`` next to the closed-form prediction."""
    n, c = amap.n_images, amap.channels
    im2col = size_im2col(config, n, c)
    if algo == "im2col":
        return SizeReport(algo, 0, im2col, 0, im2col, 1.0)
    if algo == "mec":
        s = size_mec(config, n, c)
        return SizeReport(algo, 0, s, 0, s, im2col / s)
    if algo == "cscc":
        enc = encoding or cscc_encode(amap, config)
        off = int(enc.row_offsets.size)
        rep = (off, enc.nnz, enc.nnz)
        analytic = size_cscc(config, n, c, Fraction(enc.nnz, enc.lowered_shape[0]
                                                    * enc.lowered_shape[1] * c))
        return SizeReport(algo, *rep, analytic, im2col / sum(rep))
    if algo not in ("cpo", "cps"):
        raise ConfigError(f"unknown algorithm {algo!r}")
    enc = encoding or encode(amap, config, algo)
    dens = measure_density(amap).per_channel
    if algo == "cpo":
        pred = size_cpo_analytic(config, dens, enc.count_npf)
    else:
        pred = size_cps_analytic(config, dens, set4_census(amap, config), enc.count_npf)
    rep = (enc.ptr_len, enc.da_len, enc.in_len)
    return SizeReport(algo, *rep, pred.total, im2col / sum(rep))


@dataclass(frozen=True)
class BoundReport:
    """Largest aggregate density at which worst-case CPO is no bigger than a baseline.

    ``raw_threshold`` is the unclamped bound; ``rho_threshold`` applies the
    min(1, max(0, .)) clamp. A negative raw bound means no density qualifies:
    even an empty map's worst-case pointer array outgrows the baseline.
    """

    baseline: str
    raw_threshold: Fraction
    rho_hat_threshold: Fraction | None = None
    rho_hat: Fraction | None = None

    @property
    def rho_threshold(self) -> Fraction:
        return min(Fraction(1), max(Fraction(0), self.raw_threshold))

    def holds_for(self, rho_sum, rho_hat=None) -> bool:
        rho = Fraction(rho_sum)
        if self.raw_threshold < 0 or not 0 <= rho <= self.rho_threshold:
            return False
        if self.rho_hat_threshold is not None:
            rh = self.rho_hat if rho_hat is None else Fraction(rho_hat)
            return rh >= self.rho_hat_threshold
        return True


def _kfrac(config: ConvConfig) -> int:
    return ceil(config.kw / config.sw)


def density_bound_vs_im2col(config: ConvConfig, n_images: int, channels: int) -> BoundReport:
    ih, iw, oh, ow, kh, kw = config.ih, config.iw, config.oh, config.ow, config.kh, config.kw
    scale = Fraction(n_images * channels, 2 * ih * iw)
    if kw > config.sw:
        c = _kfrac(config)
        raw = scale * (ow * (kw * kh * oh + 1 - c) - 2 - c)
    else:
        raw = scale * (oh * ow * kh * kw - (1 + ow))
    return BoundReport("im2col", raw)


def density_bound_vs_mec(config: ConvConfig, n_images: int, channels: int) -> BoundReport:
    ih, iw, ow, kw = config.ih, config.iw, config.ow, config.kw
    scale = Fraction(n_images * channels, 2 * ih * iw)
    if kw > config.sw:
        c = _kfrac(config)
        raw = scale * (ow * (kw * ih + 1 - c) - 2 - c)
    else:
        raw = scale * (ow * kw * ih - (1 + ow))
    return BoundReport("mec", raw)


def density_bound_vs_cscc(config: ConvConfig, n_images: int, channels: int, rho_hat) -> BoundReport:
    """Aggregate-density bound given the lowered-matrix density rho_hat (summed over images)."""
    ih, iw, ow, kw = config.ih, config.iw, config.ow, config.kw
    nc = n_images * channels
    rh = Fraction(rho_hat)
    c = _kfrac(config) if kw > config.sw else 1
    if kw > config.sw:
        slack = nc * (ow + 1) * (2 - c) - 3 * nc
    else:
        slack = 0  # pointer arrays coincide: In*Ic*(Ow+1) on both sides
    raw = Fraction(1, iw) * (ow * kw * channels * rh + Fraction(slack, 2 * ih))
    rho_hat_min = Fraction(-slack, 2 * ow * channels * ih * kw)
    return BoundReport("cscc", raw, rho_hat_min, rh)
