"""Antigen expansion and donor -> recipient mismatch counting.

A donor antigen is a mismatch when the recipient carries nothing compatible
with it; compatibility is judged on expansion sets so a split and its parent
broad match each other. The count is asymmetric by construction: it asks
what the recipient's immune system can see in the graft, not the reverse.
"""

from __future__ import annotations

from graftsurv.hla.antigen import HlaAntigen, HlaProfile, Locus
from graftsurv.hla.broadsplit import BroadSplitTable

__all__ = ["expand", "expand_profile", "mismatch_count", "total_mismatch"]


def expand(antigen: HlaAntigen, table: BroadSplitTable) -> frozenset[HlaAntigen]:
    """The antigen plus its parent broad, if it has one.

    Broads and antigens absent from the table expand to themselves, which
    keeps rare or unlisted codes usable (they simply never match anything
    but an identical code).
    """
    broad = table.broad_of(antigen)
    if broad is None:
        return frozenset((antigen,))
    return frozenset((antigen, broad))


def expand_profile(profile: HlaProfile, table: BroadSplitTable) -> dict[Locus, frozenset[HlaAntigen]]:
    """Per-locus union of the expansion sets of a profile's antigens."""
    out: dict[Locus, frozenset[HlaAntigen]] = {}
    for locus in Locus:
        acc: frozenset[HlaAntigen] = frozenset()
        for antigen in profile.typed(locus):
            acc |= expand(antigen, table)
        out[locus] = acc
    return out


def mismatch_count(
    donor: HlaProfile, recipient: HlaProfile, table: BroadSplitTable, locus: Locus
) -> int:
    """Number of distinct donor antigens at `locus` the recipient cannot match.

    A donor antigen matches when its expansion set intersects the recipient's
    expanded antigen set at the locus. Homozygous donor loci contribute at
    most one mismatch because duplicates are collapsed first. Range 0..2.
    """
    recipient_expanded: frozenset[HlaAntigen] = frozenset()
    for antigen in recipient.typed(locus):
        recipient_expanded |= expand(antigen, table)
    return sum(
        1 for d in donor.typed(locus) if not (expand(d, table) & recipient_expanded)
    )


def total_mismatch(donor: HlaProfile, recipient: HlaProfile, table: BroadSplitTable) -> int:
    """Sum of per-locus mismatch counts over A, B, DR. Range 0..6."""
    return sum(mismatch_count(donor, recipient, table, locus) for locus in Locus)
