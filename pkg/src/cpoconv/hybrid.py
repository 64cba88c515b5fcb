"""Per-layer profiling and the hybrid im2col / sparse selector.

Each eligible layer is profiled on M sample maps. For every algorithm the
wall time of encode (or lowering) plus convolution is averaged over the
iterations and summed over the maps. favour_time then picks the faster of
im2col and CPO per layer, favour_space the faster of im2col and CPS. Layers
the sparse paths cannot run (pointwise, strided) always stay on im2col.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import gemm_conv, im2col_lower
from .catalog import LayerSpec
from .cpo import encode, cpo_conv, scatter_stats
from .errors import IncompleteProfileError, InsufficientDataError, ShapeError
from .space import size_report
from .tensor import ActivationMap, Kernel, gen_random_kernel, gen_random_map, measure_density

MODES = ("favour_time", "favour_space")
SPARSE_FOR_MODE = {"favour_time": "cpo", "favour_space": "cps"}


@dataclass
class AlgoStats:
    encode_ns: int
    conv_ns: int
    size: int
    macs: int
    cr_vs_im2col: float

    @property
    def total_ns(self) -> int:
        return self.encode_ns + self.conv_ns


@dataclass
class LayerProfile:
    layer_id: int
    eligible: bool
    algos: dict[str, AlgoStats] = field(default_factory=dict)
    density_mean: float = 0.0
    density_var: float = 0.0


def _timed(fn, iterations: int) -> tuple[object, int]:
    fn()  # warm-up, also triggers JIT compilation on first use
    t0 = time.perf_counter_ns()
    for _ in range(iterations):
        out = fn()
    return out, max(1, (time.perf_counter_ns() - t0) // iterations)


def run_algo(algo: str, amap: ActivationMap, kernel: Kernel, spec: LayerSpec, iterations: int = 1):
    """Average (encode_ns, conv_ns) of one algorithm on one map, plus its size and MACs."""
    cfg = spec.config
    if algo == "im2col":
        low, enc_ns = _timed(lambda: im2col_lower(amap, cfg), iterations)
        _, conv_ns = _timed(lambda: gemm_conv(low, kernel), iterations)
        rep = size_report(amap, cfg, "im2col")
        macs = cfg.oh * cfg.ow * cfg.kh * cfg.kw * amap.channels * kernel.n_kernels * amap.n_images
        return enc_ns, conv_ns, rep, macs
    enc, enc_ns = _timed(lambda: encode(amap, cfg, algo), iterations)
    _, conv_ns = _timed(lambda: cpo_conv(enc, kernel), iterations)
    rep = size_report(amap, cfg, algo, encoding=enc)
    return enc_ns, conv_ns, rep, scatter_stats(enc, kernel.n_kernels)[0]


def profile_layer(spec: LayerSpec, maps, iterations: int = 100, kernel: Kernel | None = None,
                  seed: int = 0, algos=("im2col", "cpo", "cps")) -> LayerProfile:
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    maps = list(maps)
    for m in maps:
        if m.shape[1:] != spec.dims[1:]:
            raise ShapeError(f"layer {spec.layer_id}: map {m.shape} does not match {spec.dims}")
    if kernel is None:
        kernel = gen_random_kernel(spec.kernel_shape, seed=seed)
    prof = LayerProfile(spec.layer_id, spec.eligible)
    run = [a for a in algos if a == "im2col" or spec.eligible]
    for algo in run:
        enc_ns = conv_ns = size = macs = 0
        crs = []
        for m in maps:
            e, c, rep, k = run_algo(algo, m, kernel, spec, iterations)
            enc_ns, conv_ns = enc_ns + e, conv_ns + c
            size, macs = size + rep.total, macs + k
            crs.append(rep.cr_vs_im2col)
        prof.algos[algo] = AlgoStats(enc_ns, conv_ns, size, macs, float(np.mean(crs)))
    means = [measure_density(m).mean for m in maps]
    prof.density_mean = float(np.mean(means))
    prof.density_var = float(np.var(means, ddof=1)) if len(means) > 1 else 0.0
    return prof


def sample_maps(spec: LayerSpec, density: float, m: int, seed: int = 0) -> list[ActivationMap]:
    """M synthetic single-image maps for a layer, seeded per (layer, sample)."""
    return [gen_random_map(spec.dims, density, seed=seed * 1_000_003 + spec.layer_id * 1009 + i)
            for i in range(m)]


@dataclass(frozen=True)
class SelectionPlan:
    mode: str
    choices: dict[int, str]
    selection_fraction: float
    part_saving: float  # percent, eligible layers only
    e2e_saving: float  # percent, over every conv layer
    avg_cr: float
    plan_ns: int
    im2col_ns: int
    sparse_ns: int  # the sparse algorithm on every eligible layer
    sparse_part_saving: float
    sparse_e2e_saving: float
    sparse_avg_cr: float


def _pct(base: int, new: int) -> float:
    return 100.0 * (base - new) / base if base else 0.0


def select_plan(profiles, mode: str = "favour_time") -> SelectionPlan:
    """Per-layer argmin of total time; ties go to the sparse algorithm."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    sparse = SPARSE_FOR_MODE[mode]
    choices = {}
    base_elig = plan_elig = sparse_elig = base_other = 0
    crs, sparse_crs = [], []
    for p in profiles:
        if "im2col" not in p.algos:
            raise IncompleteProfileError(f"layer {p.layer_id}: no im2col timing")
        t_base = p.algos["im2col"].total_ns
        if not p.eligible:
            choices[p.layer_id] = "im2col"
            base_other += t_base
            continue
        if sparse not in p.algos:
            raise IncompleteProfileError(f"layer {p.layer_id}: no {sparse} timing")
        s = p.algos[sparse]
        pick = sparse if s.total_ns <= t_base else "im2col"
        choices[p.layer_id] = pick
        base_elig += t_base
        sparse_elig += s.total_ns
        plan_elig += min(s.total_ns, t_base)
        crs.append(s.cr_vs_im2col if pick == sparse else 1.0)
        sparse_crs.append(s.cr_vs_im2col)
    n_elig = len(crs)
    return SelectionPlan(
        mode=mode, choices=choices,
        selection_fraction=sum(choices[k] == sparse for k in choices) / n_elig if n_elig else 0.0,
        part_saving=_pct(base_elig, plan_elig),
        e2e_saving=_pct(base_elig + base_other, plan_elig + base_other),
        avg_cr=float(np.mean(crs)) if crs else 1.0,
        plan_ns=plan_elig + base_other, im2col_ns=base_elig + base_other,
        sparse_ns=sparse_elig + base_other,
        sparse_part_saving=_pct(base_elig, sparse_elig),
        sparse_e2e_saving=_pct(base_elig + base_other, sparse_elig + base_other),
        sparse_avg_cr=float(np.mean(sparse_crs)) if sparse_crs else 1.0,
    )


def profiles_from_rows(rows, specs: list[LayerSpec] | None = None) -> list[LayerProfile]:
    """Rebuild profiles from recorded CSV rows.

    With ``specs`` eligibility comes from the layer shapes; without them a
    layer counts as eligible when any sparse row was recorded for it.
    """
    by_layer: dict[int, LayerProfile] = {}
    dens: dict[int, list[float]] = {}
    for r in rows:
        lid = r["layer_id"]
        p = by_layer.setdefault(lid, LayerProfile(lid, False))
        p.algos[r["algo"]] = AlgoStats(r["encode_ns"], r["conv_ns"], r["size_elems"],
                                       r["mac_count"], r["cr_vs_im2col"])
        dens.setdefault(lid, []).append(r["density"])
    elig = {s.layer_id: s.eligible for s in specs} if specs else None
    for lid, p in by_layer.items():
        p.eligible = elig[lid] if elig is not None else any(a != "im2col" for a in p.algos)
        p.density_mean = float(np.mean(dens[lid]))
    return [by_layer[k] for k in sorted(by_layer)]


def profile_rows(profiles, densities: dict[int, float] | None = None) -> list[dict]:
    """Flatten profiles into the nine-column CSV schema."""
    rows = []
    for p in profiles:
        d = densities.get(p.layer_id, p.density_mean) if densities else p.density_mean
        for algo, s in p.algos.items():
            rows.append({
                "layer_id": p.layer_id, "algo": algo, "density": round(d, 6),
                "encode_ns": s.encode_ns, "conv_ns": s.conv_ns, "total_ns": s.total_ns,
                "mac_count": s.macs, "size_elems": s.size, "cr_vs_im2col": round(s.cr_vs_im2col, 6),
            })
    return rows


@dataclass(frozen=True)
class InferenceReport:
    part_saving: float
    e2e_saving: float  # convolution layers only
    avg_cr: float
    plan_ns: int
    im2col_ns: int
    macs: int


def simulate_inference(plan: SelectionPlan, specs: list[LayerSpec], maps: dict,
                       iterations: int = 1, seed: int = 0) -> InferenceReport:
    """Run every layer with its planned algorithm on fresh maps and account the savings.

    Layers kept on im2col reuse the same measurement for plan and baseline,
    so a pure-im2col plan reports exactly zero savings.
    """
    base_elig = plan_elig = base_other = macs = 0
    crs = []
    for spec in specs:
        algo = plan.choices.get(spec.layer_id, "im2col")
        if algo != "im2col" and not spec.eligible:
            raise ValueError(f"layer {spec.layer_id} cannot run {algo}")
        amap = maps[spec.layer_id]
        kernel = gen_random_kernel(spec.kernel_shape, seed=seed + spec.layer_id)
        e, c, _, k = run_algo("im2col", amap, kernel, spec, iterations)
        t_base = e + c
        t_plan, cr, k_plan = t_base, 1.0, k
        if algo != "im2col":
            e, c, rep, k_plan = run_algo(algo, amap, kernel, spec, iterations)
            t_plan, cr = e + c, rep.cr_vs_im2col
        macs += k_plan
        if spec.eligible:
            base_elig += t_base
            plan_elig += t_plan
            crs.append(cr)
        else:
            base_other += t_base
    return InferenceReport(
        part_saving=_pct(base_elig, plan_elig),
        e2e_saving=_pct(base_elig + base_other, plan_elig + base_other),
        avg_cr=float(np.mean(crs)) if crs else 1.0,
        plan_ns=plan_elig + base_other, im2col_ns=base_elig + base_other, macs=macs,
    )


def density_stationarity(maps_per_layer: dict) -> dict[int, float]:
    """Unbiased variance of the per-map mean density, per layer.

    Values may be ActivationMaps or plain per-map densities.
    """
    out = {}
    for lid, items in maps_per_layer.items():
        items = list(items)
        if len(items) < 2:
            raise InsufficientDataError(f"layer {lid}: need at least 2 maps, got {len(items)}")
        d = [measure_density(m).mean if isinstance(m, ActivationMap) else float(m) for m in items]
        out[lid] = float(np.var(d, ddof=1))
    return out


def default_density_profile(specs: list[LayerSpec], seed: int = 0) -> dict[int, float]:
    """Synthetic stand-in densities: 40% of layers in [0.05, 0.5], the rest in (0.5, 0.9]."""
    rng = np.random.Generator(np.random.PCG64(seed))
    ids = [s.layer_id for s in specs]
    sparse_ids = set(rng.permutation(ids)[: round(0.4 * len(ids))].tolist())
    return {lid: round(float(rng.uniform(0.05, 0.5) if lid in sparse_ids else rng.uniform(0.5, 0.9)), 4)
            for lid in ids}
