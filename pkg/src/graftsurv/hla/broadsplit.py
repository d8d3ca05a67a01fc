"""Broad/split antigen hierarchy.

Serological typing has two granularities: some antigens (broads, e.g. A9)
were later resolved into finer splits (A23, A24). A registry may report
either level for the same molecule, so matching logic must treat a split and
its broad as compatible. The hierarchy is exactly one level deep.

The packaged table (``data/broad_splits.csv``) follows the OPTN/UNOS
serological equivalences; a custom table can be loaded from any CSV with a
``split,broad`` header, ``#`` comment lines allowed.
"""

from __future__ import annotations

import csv
import io
from functools import lru_cache
from importlib import resources

from graftsurv.exceptions import DataError, ParseError
from graftsurv.hla.antigen import HlaAntigen, parse_antigen

__all__ = ["BroadSplitTable", "load_broad_split_table", "default_broad_split_table"]


class BroadSplitTable:
    """Immutable split -> broad mapping with depth-1 and locus invariants.

    Parameters
    ----------
    pairs : iterable of (HlaAntigen, HlaAntigen)
        (split, broad) entries. A split maps to exactly one broad, broads
        never appear as splits, and both members of a pair share a locus.
    """

    def __init__(self, pairs) -> None:
        mapping: dict[HlaAntigen, HlaAntigen] = {}
        for split, broad in pairs:
            if split.locus is not broad.locus:
                raise DataError(f"split {split} and broad {broad} are on different loci")
            if split == broad:
                raise DataError(f"antigen {split} cannot be its own broad")
            if split in mapping and mapping[split] != broad:
                raise DataError(f"split {split} maps to both {mapping[split]} and {broad}")
            mapping[split] = broad
        for split, broad in mapping.items():
            if broad in mapping:
                raise DataError(
                    f"broad {broad} also appears as a split; the hierarchy must be one level deep"
                )
        self._split_to_broad = mapping
        self._broads = frozenset(mapping.values())

    def broad_of(self, antigen: HlaAntigen) -> HlaAntigen | None:
        """The parent broad of a split, or None when the antigen is not a split."""
        return self._split_to_broad.get(antigen)

    def splits_of(self, broad: HlaAntigen) -> frozenset[HlaAntigen]:
        """All splits whose parent is the given antigen (possibly empty)."""
        return frozenset(s for s, b in self._split_to_broad.items() if b == broad)

    def is_split(self, antigen: HlaAntigen) -> bool:
        return antigen in self._split_to_broad

    def is_known(self, antigen: HlaAntigen) -> bool:
        """True when the antigen appears in the table as a split or a broad."""
        return antigen in self._split_to_broad or antigen in self._broads

    def __len__(self) -> int:
        return len(self._split_to_broad)

    def __iter__(self):
        return iter(sorted(self._split_to_broad.items()))


def _parse_table(text: str, source: str) -> BroadSplitTable:
    # Filter comments up front; csv would otherwise split on commas inside them.
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(lines)))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: empty broad/split table") from None
    if [h.strip().lower() for h in header] != ["split", "broad"]:
        raise DataError(f"{source}: expected header 'split,broad', got {header!r}")
    pairs = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise DataError(f"{source}: line {lineno}: expected 2 columns, got {len(row)}")
        pairs.append((parse_antigen(row[0]), parse_antigen(row[1])))
    return BroadSplitTable(pairs)


def load_broad_split_table(path) -> BroadSplitTable:
    """Load a broad/split table from a CSV file path."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return _parse_table(fh.read(), str(path))
    except OSError as exc:
        raise ParseError(f"cannot read broad/split table {path}: {exc}") from exc


@lru_cache(maxsize=1)
def default_broad_split_table() -> BroadSplitTable:
    """The packaged OPTN-style serological table."""
    text = resources.files("graftsurv.hla").joinpath("data/broad_splits.csv").read_text("utf-8")
    return _parse_table(text, "graftsurv.hla/data/broad_splits.csv")
