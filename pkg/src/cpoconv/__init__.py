"""Overlap-aware sparse encodings (CPO, CPS) for convolution on sparse activation maps."""
from .baselines import (CsccEncoding, LoweredMatrix, cscc_conv, cscc_encode, dense_mac_count,
                        direct_conv, gemm_conv, im2col_lower, mac_count_direct, mec_lower)
from .catalog import NETWORKS, LayerSpec, layer_catalog
from .cpo import (NPC, NPF, CpoEncoding, classify_columns, conv_spmv, cpo_conv, cpo_encode,
                  cpo_mac_count, decode, encode, scatter_stats)
from .cps import CpsEncoding, Set4Census, cps_conv, cps_encode, next_offset, pattern_size, set4_census
from .errors import (ConfigError, CorruptionError, IncompleteProfileError, InsufficientDataError,
                     ShapeError, UnsupportedConfigError)
from .hybrid import (LayerProfile, SelectionPlan, density_stationarity, profile_layer, select_plan,
                     simulate_inference)
from .space import (BoundReport, SizeReport, compression_ratio, density_bound_vs_cscc,
                    density_bound_vs_im2col, density_bound_vs_mec, size_cpo_analytic,
                    size_cps_analytic, size_cscc, size_im2col, size_mec, size_report)
from .tensor import (ActivationMap, ConvConfig, DensityProfile, Kernel, OutputMap, gen_random_kernel,
                     gen_random_map, measure_density, padded_get)

__version__ = "0.1.0"
