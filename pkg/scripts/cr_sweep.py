"""Per-layer compression ratio vs im2col for CPO, CPS and CSCC over a density grid.

    python scripts/cr_sweep.py --network resnet50 --densities 0.05 0.1 0.3 0.6
"""
import argparse
import csv
import sys
from dataclasses import dataclass, field

from cpoconv.catalog import NETWORKS, layer_catalog
from cpoconv.space import size_report
from cpoconv.tensor import gen_random_map


@dataclass
class SweepConfig:
    network: str = "resnet50"
    densities: list = field(default_factory=lambda: [0.05, 0.1, 0.3, 0.6])
    seed: int = 0
    algos: tuple = ("cpo", "cps", "cscc")


def run(cfg: SweepConfig, out=sys.stdout):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["layer_id", "ih", "kh", "kw", "ic", "density", *[f"cr_{a}" for a in cfg.algos]])
    for spec in layer_catalog(cfg.network):
        for d in cfg.densities:
            m = gen_random_map(spec.dims, d, seed=cfg.seed + spec.layer_id)
            crs = [size_report(m, spec.config, a).cr_vs_im2col for a in cfg.algos]
            w.writerow([spec.layer_id, spec.ih, spec.kh, spec.kw, spec.ic, d, *[f"{c:.3f}" for c in crs]])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--network", choices=NETWORKS, default="resnet50")
    ap.add_argument("--densities", type=float, nargs="+", default=[0.05, 0.1, 0.3, 0.6])
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    run(SweepConfig(a.network, a.densities, a.seed))
