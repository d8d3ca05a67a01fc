"""HLA typing domain: antigens, profiles, broad/split hierarchy, mismatches."""

from graftsurv.hla.antigen import HlaAntigen, HlaProfile, Locus, parse_antigen
from graftsurv.hla.broadsplit import (
    BroadSplitTable,
    default_broad_split_table,
    load_broad_split_table,
)
from graftsurv.hla.mismatch import expand, expand_profile, mismatch_count, total_mismatch

__all__ = [
    "HlaAntigen",
    "HlaProfile",
    "Locus",
    "parse_antigen",
    "BroadSplitTable",
    "default_broad_split_table",
    "load_broad_split_table",
    "expand",
    "expand_profile",
    "mismatch_count",
    "total_mismatch",
]
