"""Exact transportation norms over valued fields."""

from .appendix import appendix_example, complex_norm_small, support_restricted_complex_inf, weiszfeld
from .classical import MetricSpace, kantorovich_real, reduce_real_decomposition, transport_bipartite, validate_metric
from .group_norms import graev_norm, graev_threshold, tk_usp_compare
from .instances import InstanceError, load_instance, parse_instance, random_dendrogram_instance
from .na_norm import (
    NormCertificate,
    bounds,
    na_norm,
    na_norm_bruteforce,
    na_norm_pointed,
    reduce_decomposition,
    reduce_to_subgroup,
    verify_certificate,
    zero_distance_presentation,
)
from .scalars import Cost, FieldError, FieldSpec, Magnitude, Scalar
from .ultrametric import ZERO, MetricError, UltraSpace, build_dendrogram, extend_with_zero, validate_ultrametric
from .vectors import FreeVector, decompose, evaluate, gu_membership, normalize, support_info

__all__ = [
    "appendix_example",
    "complex_norm_small",
    "support_restricted_complex_inf",
    "weiszfeld",
    "MetricSpace",
    "kantorovich_real",
    "reduce_real_decomposition",
    "transport_bipartite",
    "validate_metric",
    "graev_norm",
    "graev_threshold",
    "tk_usp_compare",
    "InstanceError",
    "load_instance",
    "parse_instance",
    "random_dendrogram_instance",
    "NormCertificate",
    "bounds",
    "na_norm",
    "na_norm_bruteforce",
    "na_norm_pointed",
    "reduce_decomposition",
    "reduce_to_subgroup",
    "verify_certificate",
    "zero_distance_presentation",
    "Cost",
    "FieldError",
    "FieldSpec",
    "Magnitude",
    "Scalar",
    "ZERO",
    "MetricError",
    "UltraSpace",
    "build_dendrogram",
    "extend_with_zero",
    "validate_ultrametric",
    "FreeVector",
    "decompose",
    "evaluate",
    "gu_membership",
    "normalize",
    "support_info",
]

__version__ = "0.1.0"
