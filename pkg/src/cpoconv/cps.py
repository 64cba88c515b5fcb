"""CPS: CPO with set4 pattern compression of IN inside the overlapKw region.

Each overlapKw column is cut into groups of four padded rows starting at row
0. Bit b of a group's pattern is set when row ``4 * g + b`` holds an NZE, so
the lowest bit is the top row of the group. Groups with 3 or 4 NZEs store
``{index of the first NZE, pattern}``; groups with 1 or 2 NZEs store each
member index negated. ptr and DA are identical to CPO.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .cpo import CpoEncoding, check_sparse_config, classify_columns, cpo_conv, encode
from .errors import CorruptionError
from .tensor import ActivationMap, ConvConfig, Kernel, OutputMap

PATTERN_CODES = K.PATTERN_CODES

CpsEncoding = CpoEncoding


def cps_encode(amap: ActivationMap, config: ConvConfig) -> CpsEncoding:
    return encode(amap, config, "cps")


def cps_conv(enc: CpsEncoding, kernel: Kernel, config: ConvConfig | None = None) -> OutputMap:
    return cpo_conv(enc, kernel, config)


def pattern_size(code: int) -> int:
    """How many NZEs follow the first one in a set4 entry.

    Negative inputs are singleton markers and give 0.
    """
    n = K.pattern_size_code(int(code))
    if n < 0:
        raise CorruptionError(f"{code} is not a set4 pattern code {PATTERN_CODES}")
    return n


def next_offset(code: int, g: int) -> int:
    """Row distance from the (g-1)th to the gth NZE of a pattern, bottom bit first."""
    if code not in PATTERN_CODES:
        raise CorruptionError(f"{code} is not a set4 pattern code {PATTERN_CODES}")
    if not 1 <= g <= pattern_size(code):
        raise ValueError(f"g={g} outside 1..{pattern_size(code)} for pattern {code}")
    return K.next_offset_code(code, g)


@dataclass(frozen=True)
class Set4Census:
    """Index k holds the number of set4 groups with exactly k NZEs (k = 1..4)."""

    c_prime: np.ndarray  # outside overlapKw
    c_dprime: np.ndarray  # inside overlapKw

    @property
    def nze_total(self) -> int:
        k = np.arange(5)
        return int((k * (self.c_prime + self.c_dprime)).sum())

    @property
    def in_size(self) -> int:
        cp, cd = self.c_prime, self.c_dprime
        return int(cp[1] + 2 * cp[2] + 3 * cp[3] + 4 * cp[4]
                   + cd[1] + 2 * cd[2] + 2 * cd[3] + 2 * cd[4])


def set4_census(amap: ActivationMap, config: ConvConfig) -> Set4Census:
    config.for_map(amap)
    check_sparse_config(config)
    cls = classify_columns(config)
    hp4 = -(-config.hp // 4) * 4
    nz = np.zeros(amap.shape[:2] + (hp4, config.wp), dtype=np.int64)
    nz[:, :, config.pad_top:config.pad_top + config.ih,
       config.pad_left:config.pad_left + config.iw] = amap.data != 0
    groups = nz.reshape(amap.shape[:2] + (hp4 // 4, 4, config.wp)).sum(axis=3)
    kw_region = (cls.overlap_type == config.kw - 1) & (config.kw >= 2)
    inside = np.bincount(groups[..., kw_region].ravel(), minlength=5)[:5]
    outside = np.bincount(groups[..., ~kw_region].ravel(), minlength=5)[:5]
    inside[0] = outside[0] = 0
    return Set4Census(outside.astype(np.int64), inside.astype(np.int64))
