"""Concordance index for right-censored survival data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from graftsurv.exceptions import DataError
from graftsurv.survival.targets import check_survival_target


@dataclass(frozen=True)
class ConcordanceResult:
    value: float
    n_concordant: int
    n_discordant: int
    n_tied_risk: int
    n_comparable: int


def concordance_index(y, risk):
    """Fraction of comparable pairs ordered correctly by the risk score.

    A pair is comparable iff the two times differ and the row with the
    smaller time is an event. Pairs with tied times are never comparable,
    regardless of event status. Tied risks on comparable pairs count 0.5.
    Higher risk must go with shorter survival to count as concordant.
    """
    y = check_survival_target(y)
    risk = np.asarray(risk, dtype=np.float64)
    if risk.ndim != 1 or risk.shape[0] != y.shape[0]:
        raise DataError(
            f"risk must be 1d with {y.shape[0]} entries, got shape {risk.shape}"
        )
    if not np.all(np.isfinite(risk)):
        raise DataError("risk scores must be finite")

    time = y["time"]
    event = y["event"]

    order = np.argsort(time, kind="stable")
    t = time[order]
    e = event[order]
    r = risk[order]

    n = t.shape[0]
    n_conc = 0
    n_disc = 0
    n_tied = 0

    # Walk groups of tied times; an event row is comparable with every
    # strictly later row. Risk comparisons are ranked against the sorted
    # suffix so each group costs O(k log m) rather than O(k m).
    i = 0
    while i < n:
        j = i
        while j < n and t[j] == t[i]:
            j += 1
        if j < n:
            suffix = np.sort(r[j:])
            m = suffix.shape[0]
            for k in range(i, j):
                if not e[k]:
                    continue
                lo = np.searchsorted(suffix, r[k], side="left")
                hi = np.searchsorted(suffix, r[k], side="right")
                # Concordant: later row has strictly lower risk.
                n_conc += int(lo)
                n_tied += int(hi - lo)
                n_disc += m - int(hi)
        i = j

    n_comp = n_conc + n_disc + n_tied
    if n_comp == 0:
        raise DataError("no comparable pairs: need differing times with an event first")
    value = (n_conc + 0.5 * n_tied) / n_comp
    return ConcordanceResult(value, n_conc, n_disc, n_tied, n_comp)
