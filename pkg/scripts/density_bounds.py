"""Break-even aggregate densities of worst-case CPO against im2col and MEC for each catalog layer.

    python scripts/density_bounds.py --network iv3
"""
import argparse
from dataclasses import dataclass

from cpoconv.catalog import NETWORKS, layer_catalog
from cpoconv.space import density_bound_vs_im2col, density_bound_vs_mec


@dataclass
class BoundConfig:
    network: str = "resnet50"
    n_images: int = 1


def run(cfg: BoundConfig):
    print("layer  shape            kernel  raw_vs_im2col  per_channel  raw_vs_mec  per_channel")
    for s in layer_catalog(cfg.network):
        conv = s.config
        # the thresholds bound the sum over channels; divide by In*Ic for a per-plane density
        b1 = density_bound_vs_im2col(conv, cfg.n_images, s.ic)
        b2 = density_bound_vs_mec(conv, cfg.n_images, s.ic)
        per = cfg.n_images * s.ic
        print(f"{s.layer_id:>5}  {s.ih:>3}x{s.iw:<3}x{s.ic:<5}  {s.kh}x{s.kw}    "
              f"{float(b1.raw_threshold):>13.2f}  {float(b1.raw_threshold) / per:>11.3f}  "
              f"{float(b2.raw_threshold):>10.2f}  {float(b2.raw_threshold) / per:>11.3f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--network", choices=NETWORKS, default="resnet50")
    ap.add_argument("--images", type=int, default=1)
    a = ap.parse_args()
    run(BoundConfig(a.network, a.images))
