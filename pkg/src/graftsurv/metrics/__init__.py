from graftsurv.metrics.concordance import ConcordanceResult, concordance_index
from graftsurv.metrics.dynamic_auc import DynamicAucResult, dynamic_auc, mean_dynamic_auc
from graftsurv.metrics.significance import (
    TestResult,
    bonferroni,
    paired_t_greater,
    wilcoxon_greater,
)

__all__ = [
    "ConcordanceResult",
    "concordance_index",
    "DynamicAucResult",
    "dynamic_auc",
    "mean_dynamic_auc",
    "TestResult",
    "bonferroni",
    "paired_t_greater",
    "wilcoxon_greater",
]
