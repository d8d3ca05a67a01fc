"""Serological HLA antigens and six-antigen typing profiles.

Antigens live on one of the three loci used for kidney allocation (A, B, DR)
and are identified by their serological code, e.g. ``A23`` or ``DR15``. Codes
are categories: the integer part carries no ordinal meaning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from graftsurv.exceptions import ParseError

__all__ = ["Locus", "HlaAntigen", "HlaProfile", "parse_antigen"]


class Locus(str, Enum):
    """HLA locus considered in mismatch counting."""

    A = "A"
    B = "B"
    DR = "DR"


_ANTIGEN_RE = re.compile(r"^(DR|A|B)0*([1-9]\d*)$")


@dataclass(frozen=True, order=True)
class HlaAntigen:
    """One serological antigen, e.g. A23.

    The ordering defined here (locus name, then code) is used only to make
    derived column orders deterministic; it is not biologically meaningful.
    """

    locus: Locus
    code: int

    def __post_init__(self) -> None:
        if not isinstance(self.locus, Locus):
            raise ParseError(f"unknown locus {self.locus!r}")
        if not isinstance(self.code, int) or self.code <= 0:
            raise ParseError(f"antigen code must be a positive integer, got {self.code!r}")

    def __str__(self) -> str:
        return f"{self.locus.value}{self.code}"

    def __repr__(self) -> str:
        return f"HlaAntigen({self})"


def parse_antigen(text: str) -> HlaAntigen:
    """Parse a textual antigen label like ``"A23"`` or ``"DR15"``.

    Leading zeros in the numeric part are tolerated (``"A09"`` == ``"A9"``).

    Raises
    ------
    ParseError
        If the locus is not one of A/B/DR or the code is not a positive
        integer. The message names the offending token.
    """
    if not isinstance(text, str):
        raise ParseError(f"antigen label must be a string, got {text!r}")
    m = _ANTIGEN_RE.match(text.strip())
    if m is None:
        raise ParseError(f"cannot parse antigen label {text!r}")
    return HlaAntigen(Locus(m.group(1)), int(m.group(2)))


def _locus_pair(antigens: tuple, locus: Locus) -> tuple[HlaAntigen, HlaAntigen]:
    pair = tuple(sorted(a for a in antigens if a.locus is locus))
    if len(pair) != 2:
        raise ParseError(
            f"profile needs exactly 2 antigens at locus {locus.value}, got {len(pair)}"
        )
    return pair


@dataclass(frozen=True)
class HlaProfile:
    """Six-antigen typing for one person: two antigens per locus.

    Slots within a locus are unordered; construction normalizes them to a
    canonical sorted order so two profiles that differ only in slot order
    compare equal. A locus may be homozygous (both slots equal).
    """

    a: tuple[HlaAntigen, HlaAntigen]
    b: tuple[HlaAntigen, HlaAntigen]
    dr: tuple[HlaAntigen, HlaAntigen]

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _locus_pair(self.a, Locus.A))
        object.__setattr__(self, "b", _locus_pair(self.b, Locus.B))
        object.__setattr__(self, "dr", _locus_pair(self.dr, Locus.DR))

    @classmethod
    def from_antigens(cls, antigens) -> "HlaProfile":
        """Build a profile from any iterable of six antigens, two per locus."""
        ags = tuple(antigens)
        if len(ags) != 6:
            raise ParseError(f"profile needs exactly 6 antigens, got {len(ags)}")
        return cls(
            a=_locus_pair(ags, Locus.A),
            b=_locus_pair(ags, Locus.B),
            dr=_locus_pair(ags, Locus.DR),
        )

    @classmethod
    def from_labels(cls, labels) -> "HlaProfile":
        """Build a profile from six textual labels like ``["A1", "A2", ...]``."""
        return cls.from_antigens(parse_antigen(s) for s in labels)

    def at(self, locus: Locus) -> tuple[HlaAntigen, HlaAntigen]:
        """The two antigens at one locus, canonical order."""
        if locus is Locus.A:
            return self.a
        if locus is Locus.B:
            return self.b
        return self.dr

    def typed(self, locus: Locus) -> frozenset[HlaAntigen]:
        """Distinct antigens at one locus (a single antigen if homozygous)."""
        return frozenset(self.at(locus))

    def antigens(self) -> tuple[HlaAntigen, ...]:
        """All six antigens in locus order A, A, B, B, DR, DR."""
        return self.a + self.b + self.dr

    def is_homozygous(self, locus: Locus) -> bool:
        pair = self.at(locus)
        return pair[0] == pair[1]
