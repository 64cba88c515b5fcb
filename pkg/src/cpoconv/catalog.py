"""Layer shapes of six ImageNet CNNs: every non-pointwise, unit-stride conv layer.

Rows are stored verbatim in ``data/<network>.csv``. Padding is not listed in
the source tables, so it is inferred: SAME when the output keeps the input
size, VALID otherwise.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError
from .tensor import ConvConfig

NETWORKS = ("resnet50", "resnet101", "resnet152", "iv1", "iv3", "iv4")


@dataclass(frozen=True)
class LayerSpec:
    layer_id: int
    ih: int
    iw: int
    oh: int
    ow: int
    kh: int
    kw: int
    sh: int
    sw: int
    ic: int
    k: int
    network: str = ""

    def __post_init__(self):
        dims = (self.ih, self.iw, self.oh, self.ow, self.kh, self.kw, self.sh, self.sw, self.ic, self.k)
        if min(dims) < 1:
            raise ConfigError(f"layer {self.layer_id}: non-positive dimension in {dims}")
        cfg = self.config  # raises when oh/ow cannot be produced by either padding
        if (cfg.oh, cfg.ow) != (self.oh, self.ow):
            raise ConfigError(f"layer {self.layer_id}: output {self.oh}x{self.ow} "
                              f"inconsistent with inferred padding")

    @property
    def pointwise(self) -> bool:
        return self.kh == 1 and self.kw == 1

    @property
    def padding(self) -> str:
        unit = self.sh == 1 and self.sw == 1
        same = unit and (self.oh, self.ow) == (self.ih, self.iw) and not self.pointwise
        return "same" if same else "valid"

    @property
    def eligible(self) -> bool:
        """Whether the sparse paths apply (non-pointwise, unit stride)."""
        return not self.pointwise and self.sh == 1 and self.sw == 1

    @property
    def config(self) -> ConvConfig:
        if self.padding == "same":
            return ConvConfig.same(self.ih, self.iw, self.kh, self.kw)
        return ConvConfig.valid(self.ih, self.iw, self.kh, self.kw, self.sh, self.sw)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        """Activation map dims for one image."""
        return (1, self.ic, self.ih, self.iw)

    @property
    def kernel_shape(self) -> tuple[int, int, int, int]:
        return (self.k, self.ic, self.kh, self.kw)


def layer_catalog(network: str) -> list[LayerSpec]:
    if network not in NETWORKS:
        raise KeyError(f"unknown network {network!r}; known: {', '.join(NETWORKS)}")
    text = resources.files("cpoconv").joinpath(f"data/{network}.csv").read_text()
    rows = csv.DictReader(text.splitlines())
    return [LayerSpec(**{k: int(v) for k, v in r.items()}, network=network) for r in rows]
