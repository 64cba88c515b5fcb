"""Command-line front end: ``cpoconv {gen,encode,conv,verify,bench,select,report}``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .baselines import cscc_conv, cscc_encode, direct_conv, gemm_conv, im2col_lower
from .catalog import NETWORKS, layer_catalog
from .cpo import cpo_conv, encode
from .errors import ConfigError, CorruptionError, IncompleteProfileError
from .hybrid import (MODES, default_density_profile, profile_layer, profile_rows,
                     profiles_from_rows, sample_maps, select_plan)
from .tensor import ActivationMap, ConvConfig, gen_random_kernel, gen_random_map

ALGOS = ("direct", "im2col", "cscc", "cpo", "cps")
RTOL = 1e-4


def _ints(text: str, sep: str = ",") -> list[int]:
    try:
        return [int(x) for x in text.split(sep)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers separated by {sep!r}: {text}")


def _kernel_hw(text: str) -> tuple[int, int]:
    hw = _ints(text.lower(), "x")
    if len(hw) != 2:
        raise argparse.ArgumentTypeError("kernel must look like 3x3")
    return hw[0], hw[1]


def _density(text: str) -> float:
    d = float(text)
    if not 0.0 <= d <= 1.0:
        raise argparse.ArgumentTypeError(f"density {d} outside [0, 1]")
    return d


def _mode(text: str) -> str:
    mode = text.replace("-", "_")
    if mode not in MODES:
        raise argparse.ArgumentTypeError(f"mode must be favour-time or favour-space")
    return mode


def _add_conv_flags(p):
    p.add_argument("--kernel", type=_kernel_hw, default=(3, 3), help="KHxKW, default 3x3")
    p.add_argument("--padding", choices=("valid", "same"), default="valid")
    p.add_argument("--pad", type=_ints, help="explicit top,bottom,left,right padding")
    p.add_argument("--stride", type=_ints, default=[1, 1], help="sh,sw (baselines only when > 1)")
    p.add_argument("--k", type=int, default=1, help="number of kernels")
    p.add_argument("--kernel-seed", type=int, default=0)
    p.add_argument("--integer", action="store_true", help="integer-valued kernel weights")


def _config(args, amap: ActivationMap) -> ConvConfig:
    kh, kw = args.kernel
    sh, sw = args.stride
    if args.pad:
        if len(args.pad) != 4:
            raise ConfigError("--pad takes four values")
        return ConvConfig(amap.height, amap.width, kh, kw, sh, sw, *args.pad)
    if args.padding == "same":
        if (sh, sw) != (1, 1):
            raise ConfigError("SAME padding is defined here for unit strides")
        return ConvConfig.same(amap.height, amap.width, kh, kw)
    return ConvConfig.valid(amap.height, amap.width, kh, kw, sh, sw)


def _kernel(args, channels: int, config: ConvConfig):
    rng = (-4, 4) if args.integer else (-1.0, 1.0)
    return gen_random_kernel((args.k, channels, config.kh, config.kw), rng,
                             seed=args.kernel_seed, integer=args.integer)


def _run(algo: str, amap, kernel, config):
    if algo == "direct":
        return direct_conv(amap, kernel, config)
    if algo == "im2col":
        return gemm_conv(im2col_lower(amap, config), kernel)
    if algo == "cscc":
        return cscc_conv(cscc_encode(amap, config), kernel)
    return cpo_conv(encode(amap, config, algo), kernel)


def cmd_gen(args) -> int:
    dims = args.dims
    if len(dims) != 4 or min(dims) < 1:
        raise ConfigError("--dims takes four positive integers n,c,h,w")
    rng = tuple(args.range)
    amap = gen_random_map(dims, args.density, rng, seed=args.seed, integer=args.integer)
    io.write_tensor(args.output, amap.data)
    return 0


def cmd_encode(args) -> int:
    amap = io.load_map(args.input)
    enc = encode(amap, _config(args, amap), args.scheme)
    io.write_encoding(args.output, enc)
    print(f"{args.scheme} ptr={enc.ptr_len} da={enc.da_len} in={enc.in_len} total={enc.total} "
          f"npc={enc.count_npc} npf={enc.count_npf}")
    return 0


def cmd_conv(args) -> int:
    if args.input.endswith((".cpoe", ".cpse")) or args.from_dump:
        enc = io.read_encoding(args.input)
        out = cpo_conv(enc, _kernel(args, enc.channels, enc.config))
    else:
        amap = io.load_map(args.input)
        cfg = _config(args, amap)
        out = _run(args.algo, amap, _kernel(args, amap.channels, cfg), cfg)
    io.write_tensor(args.output, out.data)
    return 0


def cmd_verify(args) -> int:
    amap = io.load_map(args.input)
    cfg = _config(args, amap)
    kernel = _kernel(args, amap.channels, cfg)
    ref = direct_conv(amap, kernel, cfg).data.astype(np.float64)
    algos = ["im2col"]
    if cfg.unit_stride:
        algos.append("cscc")
        if not cfg.pointwise:
            algos += ["cpo", "cps"]
    outs = {a: _run(a, amap, kernel, cfg).data for a in algos}
    if args.dump:
        enc = io.read_encoding(args.dump)
        if enc.config != cfg:
            raise ConfigError("dump was encoded under a different config")
        outs[f"dump:{enc.scheme}"] = cpo_conv(enc, kernel).data
    exact = args.integer and bool(np.all(amap.data == np.round(amap.data)))
    scale = max(float(np.abs(ref).max()), 1e-30)
    ok = True
    for name, out in outs.items():
        dev = float(np.abs(out.astype(np.float64) - ref).max()) if out.size else 0.0
        good = dev == 0.0 if exact else dev / scale <= RTOL
        ok &= good
        tol = "exact" if exact else f"rel<={RTOL:g}"
        print(f"direct vs {name:<10} max_abs_dev={dev:.3e} ({tol}) {'ok' if good else 'FAIL'}")
    print("verify: " + ("PASS" if ok else "FAIL"))
    return 0 if ok else 1


def _layers(args):
    specs = layer_catalog(args.network)
    if args.layers:
        keep = set(args.layers)
        specs = [s for s in specs if s.layer_id in keep]
    return specs


def _densities(args, specs) -> dict[int, float]:
    if args.density_profile:
        dens = io.read_density_profile(args.density_profile)
        missing = [s.layer_id for s in specs if s.layer_id not in dens]
        if missing:
            raise ConfigError(f"density profile lacks layers {missing}")
        return dens
    if args.density is not None:
        return {s.layer_id: args.density for s in specs}
    return default_density_profile(specs, args.seed)


def _profile(args, specs, dens):
    profs = []
    for s in specs:
        maps = sample_maps(s, dens[s.layer_id], args.m, args.seed)
        profs.append(profile_layer(s, maps, args.iterations, seed=args.seed + s.layer_id))
    return profs


def cmd_bench(args) -> int:
    specs = _layers(args)
    dens = _densities(args, specs)
    rows = profile_rows(_profile(args, specs, dens), dens)
    if args.csv:
        io.write_profile_csv(args.csv, rows)
    else:
        io.write_profile_csv("/dev/stdout", rows)
    return 0


def _print_plan(plan, n_layers: int):
    sparse = "cpo" if plan.mode == "favour_time" else "cps"
    print(f"mode {plan.mode}: {sum(a == sparse for a in plan.choices.values())}/{n_layers} layers "
          f"on {sparse} (selection fraction {plan.selection_fraction:.3f})")
    print(f"{sparse} alone   Part {plan.sparse_part_saving:6.2f}%  E2E(conv) "
          f"{plan.sparse_e2e_saving:6.2f}%  CR {plan.sparse_avg_cr:.2f}x")
    print(f"hybrid      Part {plan.part_saving:6.2f}%  E2E(conv) "
          f"{plan.e2e_saving:6.2f}%  CR {plan.avg_cr:.2f}x")


def cmd_select(args) -> int:
    if args.replay:
        specs = layer_catalog(args.network) if args.network else None
        profs = profiles_from_rows(io.read_profile_csv(args.replay), specs)
    else:
        if not args.network:
            raise ConfigError("select needs --network or --replay")
        specs = _layers(args)
        profs = _profile(args, specs, _densities(args, specs))
    plan = select_plan(profs, args.mode)
    if args.plan:
        io.write_plan(args.plan, plan.choices, plan.mode, args.seed)
    _print_plan(plan, len(profs))
    return 0


def cmd_report(args) -> int:
    rows = io.read_profile_csv(args.csv)
    specs = layer_catalog(args.network) if args.network else None
    profs = profiles_from_rows(rows, specs)
    print(f"{'algo':<8}{'layers':>7}{'total_ms':>12}{'avg_CR':>9}{'MACs':>16}")
    for algo in ("im2col", "cpo", "cps"):
        sel = [r for r in rows if r["algo"] == algo]
        if sel:
            print(f"{algo:<8}{len(sel):>7}{sum(r['total_ns'] for r in sel) / 1e6:>12.3f}"
                  f"{np.mean([r['cr_vs_im2col'] for r in sel]):>9.2f}{sum(r['mac_count'] for r in sel):>16}")
    for mode in MODES:
        try:
            _print_plan(select_plan(profs, mode), len(profs))
        except IncompleteProfileError as e:
            print(f"mode {mode}: {e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cpoconv", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random sparse activation map")
    p.add_argument("--dims", type=_ints, required=True, help="n,c,h,w")
    p.add_argument("--density", type=_density, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--range", type=float, nargs=2, default=(0.0, 1.0))
    p.add_argument("--integer", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("encode", help="encode a tensor file as a CPO/CPS dump")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--scheme", choices=("cpo", "cps"), default="cpo")
    p.add_argument("-o", "--output", required=True)
    _add_conv_flags(p)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("conv", help="convolve a tensor file or an encoding dump")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--algo", choices=ALGOS, default="cpo")
    p.add_argument("--from-dump", action="store_true", help="treat input as an encoding dump")
    p.add_argument("-o", "--output", required=True)
    _add_conv_flags(p)
    p.set_defaults(fn=cmd_conv)

    p = sub.add_parser("verify", help="check every algorithm against direct convolution")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--dump", help="also convolve this encoding dump")
    _add_conv_flags(p)
    p.set_defaults(fn=cmd_verify)

    for name, fn, hlp in (("bench", cmd_bench, "profile a network's layers to CSV"),
                          ("select", cmd_select, "build a hybrid selection plan")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--network", choices=NETWORKS, required=name == "bench")
        p.add_argument("--layers", type=_ints, help="subset of layer ids")
        p.add_argument("--density", type=_density)
        p.add_argument("--density-profile", help="file of 'layer_id density' lines")
        p.add_argument("--m", type=int, default=5 if name == "select" else 1, help="maps per layer")
        p.add_argument("--iterations", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(fn=fn)
        if name == "bench":
            p.add_argument("--csv", help="output path (stdout when omitted)")
        else:
            p.add_argument("--mode", type=_mode, default="favour_time")
            p.add_argument("--replay", help="recorded profile CSV; skips timing")
            p.add_argument("--plan", help="write the plan file here")

    p = sub.add_parser("report", help="summarise a profile CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--network", choices=NETWORKS)
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CorruptionError as e:
        print(f"corrupt input: {e}", file=sys.stderr)
        return 2
    except (ConfigError, IncompleteProfileError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
