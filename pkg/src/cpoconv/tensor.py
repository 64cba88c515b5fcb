"""Tensor containers, logical padding and synthetic activation maps.

All tensors are channel-planar: activation maps are (n, c, h, w), kernels are
(k, c, kh, kw) so every (k, c) plane is row-major and the flat weight position
of (h, w) is ``h * kw + w``; outputs are (n, k, y, x).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

DTYPE = np.float32


def _frozen(a: np.ndarray, ndim: int, what: str) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=DTYPE)
    if a.ndim != ndim:
        raise ShapeError(f"{what} must be {ndim}-D, got shape {a.shape}")
    if min(a.shape) < 1:
        raise ShapeError(f"{what} dimensions must be >= 1, got {a.shape}")
    a.flags.writeable = False
    return a


def output_dims(ih: int, iw: int, config: "ConvConfig") -> tuple[int, int]:
    """Output spatial size ``1 + (padded - kernel) / stride`` for an ih x iw input."""
    dims = []
    for size, k, s, p0, p1 in (
        (ih, config.kh, config.sh, config.pad_top, config.pad_bottom),
        (iw, config.kw, config.sw, config.pad_left, config.pad_right),
    ):
        padded = size + p0 + p1
        if padded < k:
            raise ConfigError(f"padded extent {padded} smaller than kernel extent {k}")
        if (padded - k) % s:
            raise ConfigError(f"(padded {padded} - kernel {k}) not divisible by stride {s}")
        dims.append(1 + (padded - k) // s)
    return dims[0], dims[1]


@dataclass(frozen=True)
class ConvConfig:
    """Input size plus kernel geometry, strides and (logical) zero padding."""

    ih: int
    iw: int
    kh: int
    kw: int
    sh: int = 1
    sw: int = 1
    pad_top: int = 0
    pad_bottom: int = 0
    pad_left: int = 0
    pad_right: int = 0

    def __post_init__(self):
        for name in ("ih", "iw", "kh", "kw", "sh", "sw"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("pad_top", "pad_bottom", "pad_left", "pad_right"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        output_dims(self.ih, self.iw, self)

    @classmethod
    def valid(cls, ih, iw, kh, kw, sh=1, sw=1):
        return cls(ih, iw, kh, kw, sh, sw)

    @classmethod
    def same(cls, ih, iw, kh, kw):
        # stride-1 SAME; the odd pad cell goes to the bottom/right
        th, tw = kh - 1, kw - 1
        return cls(ih, iw, kh, kw, 1, 1, th // 2, th - th // 2, tw // 2, tw - tw // 2)

    @property
    def oh(self) -> int:
        return output_dims(self.ih, self.iw, self)[0]

    @property
    def ow(self) -> int:
        return output_dims(self.ih, self.iw, self)[1]

    @property
    def hp(self) -> int:
        return self.ih + self.pad_top + self.pad_bottom

    @property
    def wp(self) -> int:
        return self.iw + self.pad_left + self.pad_right

    @property
    def unit_stride(self) -> bool:
        return self.sh == 1 and self.sw == 1

    @property
    def pointwise(self) -> bool:
        return self.kh == 1 and self.kw == 1

    @property
    def is_valid_padding(self) -> bool:
        return not (self.pad_top or self.pad_bottom or self.pad_left or self.pad_right)

    def for_map(self, amap: "ActivationMap") -> None:
        if (amap.height, amap.width) != (self.ih, self.iw):
            raise ShapeError(
                f"map is {amap.height}x{amap.width}, config expects {self.ih}x{self.iw}"
            )


@dataclass(frozen=True)
class ActivationMap:
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(self.data, 4, "activation map"))

    @property
    def n_images(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[2]

    @property
    def width(self) -> int:
        return self.data.shape[3]

    @property
    def shape(self):
        return self.data.shape

    def padded(self, config: ConvConfig) -> np.ndarray:
        """Materialized padded copy. Only the dense baselines use this."""
        config.for_map(self)
        return np.pad(
            self.data,
            ((0, 0), (0, 0), (config.pad_top, config.pad_bottom),
             (config.pad_left, config.pad_right)),
        )


@dataclass(frozen=True)
class Kernel:
    data: np.ndarray  # (K, Ic, Kh, Kw)

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(self.data, 4, "kernel"))

    @property
    def n_kernels(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def kh(self) -> int:
        return self.data.shape[2]

    @property
    def kw(self) -> int:
        return self.data.shape[3]

    def flat(self) -> np.ndarray:
        """(Ic, K, Kh*Kw) float64 view used by the scatter kernels."""
        K, C, kh, kw = self.data.shape
        return np.ascontiguousarray(
            self.data.astype(np.float64).transpose(1, 0, 2, 3).reshape(C, K, kh * kw)
        )

    def check(self, amap: ActivationMap, config: ConvConfig) -> None:
        if self.channels != amap.channels:
            raise ShapeError(
                f"kernel has {self.channels} channels, map has {amap.channels}"
            )
        if (self.kh, self.kw) != (config.kh, config.kw):
            raise ShapeError(
                f"kernel is {self.kh}x{self.kw}, config says {config.kh}x{config.kw}"
            )


@dataclass(frozen=True)
class OutputMap:
    data: np.ndarray  # (In, K, Oh, Ow)

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(self.data, 4, "output map"))

    @property
    def n_images(self) -> int:
        return self.data.shape[0]

    @property
    def n_kernels(self) -> int:
        return self.data.shape[1]

    @property
    def oh(self) -> int:
        return self.data.shape[2]

    @property
    def ow(self) -> int:
        return self.data.shape[3]


@dataclass(frozen=True)
class DensityProfile:
    counts: np.ndarray  # (In, Ic) nonzeros per channel plane
    plane_size: int
    per_channel: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "per_channel", self.counts / self.plane_size)

    @property
    def aggregate_sum(self) -> float:
        """Sum of per-channel densities; may exceed 1 for multi-channel maps."""
        return float(self.per_channel.sum())

    @property
    def nnz(self) -> int:
        return int(self.counts.sum())

    @property
    def mean(self) -> float:
        return float(self.per_channel.mean())

    @property
    def variance(self) -> float:
        return float(self.per_channel.var())

    def image_means(self) -> np.ndarray:
        """Average channel density of each image."""
        return self.per_channel.mean(axis=1)


def measure_density(amap: ActivationMap) -> DensityProfile:
    counts = np.count_nonzero(amap.data, axis=(2, 3)).astype(np.int64)
    return DensityProfile(counts, amap.height * amap.width)


def padded_get(amap: ActivationMap, n: int, c: int, h: int, w: int, config: ConvConfig) -> float:
    """Read (h, w) in padded-frame offsets relative to the unpadded origin.

    ``h = -1`` with ``pad_top = 1`` is the first pad row and reads 0.
    """
    if not (-config.pad_top <= h < amap.height + config.pad_bottom):
        raise IndexError(f"row {h} outside padded frame")
    if not (-config.pad_left <= w < amap.width + config.pad_right):
        raise IndexError(f"column {w} outside padded frame")
    if 0 <= h < amap.height and 0 <= w < amap.width:
        return float(amap.data[n, c, h, w])
    return 0.0


def _rng(seed: int) -> np.random.Generator:
    # PCG64 is numpy's documented default bit generator; its streams are
    # stable across platforms for a given seed.
    return np.random.Generator(np.random.PCG64(seed))


def _nonzero_values(rng, size, value_range, integer):
    lo, hi = value_range
    if integer:
        choices = np.array([v for v in range(int(lo), int(hi) + 1) if v != 0], dtype=np.int64)
        if choices.size == 0:
            raise ConfigError(f"value range {value_range} has no nonzero integers")
        return choices[rng.integers(0, choices.size, size=size)].astype(DTYPE)
    if not hi > lo:
        raise ConfigError(f"empty value range {value_range}")
    vals = rng.uniform(lo, hi, size=size).astype(DTYPE)
    zero = vals == 0
    while zero.any():
        vals[zero] = rng.uniform(lo, hi, size=int(zero.sum())).astype(DTYPE)
        zero = vals == 0
    return vals


def gen_random_map(dims, target_density: float, value_range=(0.0, 1.0), seed: int = 0,
                   integer: bool = False) -> ActivationMap:
    """Bernoulli(target_density) sparsity with nonzero values uniform over value_range.

    The occupancy draw comes first from the stream, so two maps with the same
    seed and dims are nested: every nonzero at density d is nonzero at d' > d.
    ``integer=True`` draws small nonzero integers so that every convolution
    path is exactly representable and comparisons can be bit-exact.
    """
    if not 0.0 <= target_density <= 1.0:
        raise ConfigError(f"target density {target_density} outside [0, 1]")
    dims = tuple(int(d) for d in dims)
    if len(dims) != 4:
        raise ConfigError(f"dims must be (In, Ic, Ih, Iw), got {dims}")
    rng = _rng(seed)
    occupied = rng.random(dims) < target_density
    vals = _nonzero_values(rng, dims, value_range, integer)
    return ActivationMap(np.where(occupied, vals, DTYPE(0)))


def gen_random_kernel(shape, value_range=(-1.0, 1.0), seed: int = 0, integer: bool = False) -> Kernel:
    """Dense kernel of shape (K, Ic, Kh, Kw)."""
    rng = _rng(seed)
    lo, hi = value_range
    if integer:
        w = rng.integers(int(lo), int(hi) + 1, size=shape).astype(DTYPE)
    else:
        if not hi > lo:
            raise ConfigError(f"empty value range {value_range}")
        w = rng.uniform(lo, hi, size=shape).astype(DTYPE)
    return Kernel(w)
