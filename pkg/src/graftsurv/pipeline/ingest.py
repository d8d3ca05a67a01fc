"""Raw transplant CSV ingestion: parsing, cohort filters, attrition logging.

The input schema is bit-exact: a header row with the columns below, HLA
cells in textual antigen form ("A23"), empty cell = missing value. Fields
that drive the inclusion filters or the outcome (id, tx_year, peak_pra,
donor_type, prior_tx, graft_days, event) must always be present; a row
missing one of them is malformed, not merely incomplete.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from graftsurv.exceptions import DataError, ParseError
from graftsurv.features.records import (
    PersonCovariates,
    PostTransplant,
    Race,
    Sex,
    TransplantRecord,
)
from graftsurv.hla.antigen import HlaAntigen, HlaProfile, parse_antigen
from graftsurv.hla.broadsplit import load_broad_split_table
from graftsurv.ioutil import atomic_write_text

__all__ = [
    "INPUT_COLUMNS",
    "CaseRow",
    "IngestConfig",
    "AttritionLog",
    "parse_case_rows",
    "apply_filters",
    "rows_to_records",
    "write_case_rows",
    "ingest",
]

INPUT_COLUMNS = (
    "id",
    "don_a1",
    "don_a2",
    "don_b1",
    "don_b2",
    "don_dr1",
    "don_dr2",
    "rec_a1",
    "rec_a2",
    "rec_b1",
    "rec_b2",
    "rec_dr1",
    "rec_dr2",
    "don_age",
    "don_sex",
    "don_race",
    "don_bmi",
    "rec_age",
    "rec_sex",
    "rec_race",
    "rec_bmi",
    "tx_year",
    "peak_pra",
    "donor_type",
    "prior_tx",
    "don_creat",
    "rec_creat_tx",
    "rec_creat_dis",
    "dialysis_wk1",
    "cit_hours",
    "graft_days",
    "event",
)

_HLA_FIELDS = (
    "don_a1",
    "don_a2",
    "don_b1",
    "don_b2",
    "don_dr1",
    "don_dr2",
    "rec_a1",
    "rec_a2",
    "rec_b1",
    "rec_b2",
    "rec_dr1",
    "rec_dr2",
)


@dataclass(frozen=True)
class IngestConfig:
    """Inclusion-filter settings; defaults reproduce the cohort rules."""

    input_path: str = ""
    broadsplit_path: str | None = None
    year_min: int = 2000
    year_max: int = 2016
    min_recipient_age: float = 18.0
    max_peak_pra: float = 80.0
    deceased_only: bool = True
    first_transplant_only: bool = True

    def __post_init__(self) -> None:
        if self.year_min > self.year_max:
            raise DataError(
                f"year_min {self.year_min} exceeds year_max {self.year_max}"
            )
        if not 0.0 <= self.max_peak_pra <= 100.0:
            raise DataError(f"max_peak_pra must be in [0, 100], got {self.max_peak_pra}")


@dataclass(frozen=True)
class CaseRow:
    """One parsed input row; None marks a missing optional cell."""

    id: str
    don_a1: HlaAntigen | None
    don_a2: HlaAntigen | None
    don_b1: HlaAntigen | None
    don_b2: HlaAntigen | None
    don_dr1: HlaAntigen | None
    don_dr2: HlaAntigen | None
    rec_a1: HlaAntigen | None
    rec_a2: HlaAntigen | None
    rec_b1: HlaAntigen | None
    rec_b2: HlaAntigen | None
    rec_dr1: HlaAntigen | None
    rec_dr2: HlaAntigen | None
    don_age: float | None
    don_sex: Sex | None
    don_race: Race | None
    don_bmi: float | None
    rec_age: float | None
    rec_sex: Sex | None
    rec_race: Race | None
    rec_bmi: float | None
    tx_year: int
    peak_pra: float
    donor_type: str
    prior_tx: int
    don_creat: float | None
    rec_creat_tx: float | None
    rec_creat_dis: float | None
    dialysis_wk1: bool | None
    cit_hours: float | None
    graft_days: float
    event: bool

    def hla_slots(self):
        return tuple(getattr(self, f) for f in _HLA_FIELDS)


@dataclass(frozen=True)
class AttritionLog:
    """Rows removed per filter rule, in application order."""

    total: int
    steps: tuple[tuple[str, int], ...]
    retained: int

    def __post_init__(self) -> None:
        removed = sum(n for _, n in self.steps)
        if removed + self.retained != self.total:
            raise DataError("attrition rows do not sum to the input count")

    def lines(self) -> list[str]:
        width = max(len(name) for name, _ in (("input", 0), ("retained", 0), *self.steps))
        out = [f"{'input':<{width}}  {self.total:>8}"]
        out += [f"{name:<{width}}  {-n:>8}" for name, n in self.steps]
        out.append(f"{'retained':<{width}}  {self.retained:>8}")
        return out

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "rows"])
        w.writerow(["input", self.total])
        for name, n in self.steps:
            w.writerow([name, -n])
        w.writerow(["retained", self.retained])
        return buf.getvalue()


def _opt(cell, parser):
    return None if cell == "" else parser(cell)


def _sex(cell):
    return Sex(cell)


def _race(cell):
    return Race(cell)


def _bool(cell):
    if cell == "0":
        return False
    if cell == "1":
        return True
    raise ValueError(f"expected 0 or 1, got {cell!r}")


def _donor_type(cell):
    if cell not in ("deceased", "living"):
        raise ValueError(f"donor_type must be deceased or living, got {cell!r}")
    return cell


def _num(cell):
    v = float(cell)
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {cell!r}")
    return v


def _pos(cell):
    v = _num(cell)
    if v <= 0:
        raise ValueError(f"expected a positive number, got {cell!r}")
    return v


def _parse_row(parts):
    f = dict(zip(INPUT_COLUMNS, parts))
    if f["id"] == "":
        raise ValueError("id must be non-empty")
    graft_days = _num(f["graft_days"])
    if graft_days < 0:
        raise ValueError(f"graft_days must be >= 0, got {graft_days}")

    return CaseRow(
        id=f["id"],
        **{name: _opt(f[name], parse_antigen) for name in _HLA_FIELDS},
        don_age=_opt(f["don_age"], _num),
        don_sex=_opt(f["don_sex"], _sex),
        don_race=_opt(f["don_race"], _race),
        don_bmi=_opt(f["don_bmi"], _pos),
        rec_age=_opt(f["rec_age"], _num),
        rec_sex=_opt(f["rec_sex"], _sex),
        rec_race=_opt(f["rec_race"], _race),
        rec_bmi=_opt(f["rec_bmi"], _pos),
        tx_year=int(f["tx_year"]),
        peak_pra=_num(f["peak_pra"]),
        donor_type=_donor_type(f["donor_type"]),
        prior_tx=int(f["prior_tx"]),
        don_creat=_opt(f["don_creat"], _pos),
        rec_creat_tx=_opt(f["rec_creat_tx"], _pos),
        rec_creat_dis=_opt(f["rec_creat_dis"], _pos),
        dialysis_wk1=_opt(f["dialysis_wk1"], _bool),
        cit_hours=_opt(f["cit_hours"], _pos),
        graft_days=graft_days,
        event=_bool(f["event"]),
    )


def parse_case_rows(path) -> list[CaseRow]:
    """Parse an input CSV; malformed rows raise one ParseError listing lines."""
    rows = []
    bad = []
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if tuple(header) != INPUT_COLUMNS:
            raise ParseError(
                f"{path}: header does not match the input schema "
                f"(got {len(header)} columns, first difference at "
                f"{_first_header_diff(header)})"
            )
        for line_no, parts in enumerate(reader, start=2):
            if not parts:
                continue
            if len(parts) != len(INPUT_COLUMNS):
                bad.append((line_no, f"{len(parts)} fields, expected {len(INPUT_COLUMNS)}"))
                continue
            try:
                rows.append(_parse_row(parts))
            except (ValueError, ParseError) as exc:
                bad.append((line_no, str(exc)))
    if bad:
        shown = "; ".join(f"line {ln}: {msg}" for ln, msg in bad[:5])
        more = f" (and {len(bad) - 5} more)" if len(bad) > 5 else ""
        raise ParseError(f"{path}: {len(bad)} unparseable rows: {shown}{more}")
    return rows


def _first_header_diff(header):
    for i, want in enumerate(INPUT_COLUMNS):
        got = header[i] if i < len(header) else "<missing>"
        if got != want:
            return f"column {i + 1}: expected {want!r}, got {got!r}"
    return f"column {len(INPUT_COLUMNS) + 1}: unexpected extra column"


_REQUIRED_FIELDS = _HLA_FIELDS + (
    "don_age",
    "don_sex",
    "don_race",
    "don_bmi",
    "rec_age",
    "rec_sex",
    "rec_race",
    "rec_bmi",
    "don_creat",
    "rec_creat_tx",
    "rec_creat_dis",
    "dialysis_wk1",
)


def _has_missing(row: CaseRow) -> bool:
    return any(getattr(row, f) is None for f in _REQUIRED_FIELDS)


def apply_filters(rows, config: IngestConfig):
    """Apply the inclusion filters in their documented order.

    Returns (retained rows, AttritionLog). Rows whose age is missing pass
    the age filter untouched and fall to the missing-value rule, so each
    removal is attributed to exactly one step.
    """
    total = len(rows)
    steps = []
    current = list(rows)

    def step(name, keep):
        nonlocal current
        kept = [r for r in current if keep(r)]
        steps.append((name, len(current) - len(kept)))
        current = kept

    if config.deceased_only:
        step("deceased_donor", lambda r: r.donor_type == "deceased")
    if config.first_transplant_only:
        step("first_transplant", lambda r: r.prior_tx == 0)
    step(
        "recipient_age",
        lambda r: r.rec_age is None or r.rec_age >= config.min_recipient_age,
    )
    step("transplant_year", lambda r: config.year_min <= r.tx_year <= config.year_max)
    step("peak_pra", lambda r: r.peak_pra < config.max_peak_pra)
    step("missing_values", lambda r: not _has_missing(r))

    return current, AttritionLog(total=total, steps=tuple(steps), retained=len(current))


def rows_to_records(rows) -> list[TransplantRecord]:
    """Build TransplantRecords; rows still missing required fields error."""
    incomplete = [r.id for r in rows if _has_missing(r)]
    if incomplete:
        shown = ", ".join(incomplete[:5])
        more = f" (and {len(incomplete) - 5} more)" if len(incomplete) > 5 else ""
        raise DataError(f"{len(incomplete)} rows have missing required fields: {shown}{more}")
    records = []
    for r in rows:
        slots = r.hla_slots()
        records.append(
            TransplantRecord(
                id=r.id,
                donor_hla=HlaProfile.from_antigens(slots[:6]),
                recipient_hla=HlaProfile.from_antigens(slots[6:]),
                donor=PersonCovariates(age=r.don_age, sex=r.don_sex, race=r.don_race, bmi=r.don_bmi),
                recipient=PersonCovariates(age=r.rec_age, sex=r.rec_sex, race=r.rec_race, bmi=r.rec_bmi),
                time=r.graft_days,
                event=r.event,
                post_transplant=PostTransplant(
                    donor_creatinine=r.don_creat,
                    recipient_creatinine_tx=r.rec_creat_tx,
                    recipient_creatinine_discharge=r.rec_creat_dis,
                    dialysis_first_week=r.dialysis_wk1,
                    cold_ischemia_hours=r.cit_hours,
                ),
            )
        )
    return records


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (Sex, Race)):
        return value.value
    if isinstance(value, HlaAntigen):
        return str(value)
    if isinstance(value, float):
        return str(int(value)) if value == int(value) else repr(value)
    return str(value)


def write_case_rows(path, rows) -> None:
    """Write rows back out in the input schema (round-trip safe)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(INPUT_COLUMNS)
    for r in rows:
        w.writerow([_cell(getattr(r, name)) for name in INPUT_COLUMNS])
    atomic_write_text(path, buf.getvalue())


def ingest(config: IngestConfig):
    """Parse, filter, and build records.

    Returns (records, retained rows, attrition log). An empty post-filter
    cohort is an error: every later stage needs at least one record.
    """
    if config.broadsplit_path is not None:
        # Fail fast: downstream encoders will need this table.
        load_broad_split_table(config.broadsplit_path)
    rows = parse_case_rows(config.input_path)
    retained, log = apply_filters(rows, config)
    if not retained:
        raise DataError("no records remain after the ingestion filters")
    return rows_to_records(retained), retained, log
