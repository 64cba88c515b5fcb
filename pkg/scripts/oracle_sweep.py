"""Randomized equivalence sweep: direct == im2col == CSCC == CPO == CPS, plus MAC and size checks.

    python scripts/oracle_sweep.py --cases 5000 --max-side 32
"""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from cpoconv.baselines import cscc_conv, cscc_encode, direct_conv, gemm_conv, im2col_lower, mac_count_direct
from cpoconv.cpo import cpo_conv, cpo_mac_count, encode
from cpoconv.space import size_report
from cpoconv.tensor import ConvConfig, gen_random_kernel, gen_random_map

KERNELS = [(3, 3), (4, 4), (5, 5), (1, 7), (7, 1), (2, 2), (1, 3), (3, 1)]


@dataclass
class OracleConfig:
    cases: int = 1000
    max_side: int = 32
    max_channels: int = 8
    max_kernels: int = 4
    seed: int = 0
    rtol: float = 1e-4


def run(cfg: OracleConfig) -> int:
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    failures = 0
    t0 = time.perf_counter()
    for i in range(cfg.cases):
        kh, kw = KERNELS[i % len(KERNELS)]
        ih, iw = int(rng.integers(kh, cfg.max_side + 1)), int(rng.integers(kw, cfg.max_side + 1))
        conv = ConvConfig.same(ih, iw, kh, kw) if i % 2 else ConvConfig.valid(ih, iw, kh, kw)
        ic, nk = int(rng.integers(1, cfg.max_channels + 1)), int(rng.integers(1, cfg.max_kernels + 1))
        integer = i % 3 == 0
        vr = (-4, 4) if integer else (-1.0, 1.0)
        m = gen_random_map((1, ic, ih, iw), float(rng.random()), vr, seed=i, integer=integer)
        w = gen_random_kernel((nk, ic, kh, kw), vr, seed=i, integer=integer)
        ref = direct_conv(m, w, conv).data.astype(np.float64)
        outs = [gemm_conv(im2col_lower(m, conv), w), cscc_conv(cscc_encode(m, conv), w)]
        for scheme in ("cpo", "cps"):
            enc = encode(m, conv, scheme)
            outs.append(cpo_conv(enc, w))
            rep = size_report(m, conv, scheme, enc)
            failures += rep.total != rep.analytic_total
        failures += cpo_mac_count(encode(m, conv), n_kernels=nk) != mac_count_direct(m, conv, nk)
        scale = max(np.abs(ref).max(), 1e-30)
        for o in outs:
            dev = np.abs(o.data - ref).max()
            failures += bool(dev != 0 if integer else dev / scale > cfg.rtol)
    print(f"{cfg.cases} cases, {failures} failures, {time.perf_counter() - t0:.1f}s")
    return failures


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, default=1000)
    ap.add_argument("--max-side", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    raise SystemExit(1 if run(OracleConfig(a.cases, a.max_side, seed=a.seed)) else 0)
