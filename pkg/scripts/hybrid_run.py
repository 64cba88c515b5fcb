"""Profile a network on synthetic maps, build both hybrid plans and replay them on fresh maps.

    python scripts/hybrid_run.py --network resnet50 --m 5 --iterations 10
"""
import argparse
from dataclasses import dataclass

from cpoconv.catalog import NETWORKS, layer_catalog
from cpoconv.hybrid import (default_density_profile, density_stationarity, profile_layer, sample_maps,
                            select_plan, simulate_inference)


@dataclass
class HybridConfig:
    network: str = "resnet50"
    m: int = 5
    iterations: int = 10
    seed: int = 0
    max_layers: int | None = None


def run(cfg: HybridConfig):
    specs = layer_catalog(cfg.network)[: cfg.max_layers]
    dens = default_density_profile(specs, cfg.seed)
    maps = {s.layer_id: sample_maps(s, dens[s.layer_id], cfg.m, cfg.seed) for s in specs}
    var = density_stationarity(maps)
    print(f"max per-layer density variance over {cfg.m} maps: {max(var.values()):.2e}")
    profs = [profile_layer(s, maps[s.layer_id], cfg.iterations, seed=cfg.seed + s.layer_id) for s in specs]
    fresh = {s.layer_id: sample_maps(s, dens[s.layer_id], 1, cfg.seed + 1)[0] for s in specs}
    for mode in ("favour_time", "favour_space"):
        plan = select_plan(profs, mode)
        rep = simulate_inference(plan, specs, fresh, cfg.iterations, cfg.seed)
        print(f"{mode}: fraction {plan.selection_fraction:.2f}, profiled Part {plan.part_saving:.1f}% "
              f"E2E(conv) {plan.e2e_saving:.1f}% CR {plan.avg_cr:.2f}x | fresh maps Part "
              f"{rep.part_saving:.1f}% E2E(conv) {rep.e2e_saving:.1f}% CR {rep.avg_cr:.2f}x")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--network", choices=NETWORKS, default="resnet50")
    ap.add_argument("--m", type=int, default=5)
    ap.add_argument("--iterations", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-layers", type=int)
    a = ap.parse_args()
    run(HybridConfig(a.network, a.m, a.iterations, a.seed, a.max_layers))
