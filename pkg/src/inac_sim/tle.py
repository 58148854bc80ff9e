"""
Two-line element (TLE) catalog ingestion.

Parses NORAD/Celestrak two-line element sets (with or without a name line)
into :class:`TwoLineElements` records, validating line length, the mod-10
checksum and the physical range of every element.  Also formats records
back to text, which the synthetic-constellation builder and the round-trip
tests rely on.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from decimal import Decimal
from pathlib import Path

from .constants import MU_EARTH, SECONDS_PER_DAY, TWO_PI, WGS84_A
from .errors import (ChecksumMismatch, ElementOutOfRange, FieldParse,
                     MalformedLine, TleError)

TLE_LINE_LENGTH = 69

_ALPHA5 = "ABCDEFGHJKLMNPQRSTUVWXYZ"  # I and O are skipped
_EXP_FIELD = re.compile(r"([+-]?)(\d{1,5})([+-]\d)")


@dataclass(frozen=True)
class TwoLineElements:
    name: str
    catalog_number: int
    epoch_utc: datetime
    inclination: float  # deg
    raan: float  # deg
    eccentricity: float
    arg_perigee: float  # deg
    mean_anomaly: float  # deg
    mean_motion: float  # rev/day
    bstar: float = 0.0  # 1/earth radii, not used by the propagator
    classification: str = "U"
    intl_designator: str = ""
    mean_motion_dot: float = 0.0
    mean_motion_ddot: float = 0.0
    ephemeris_type: int = 0
    element_set_number: int = 0
    rev_number: int = 0

    @property
    def mean_motion_rad_s(self) -> float:
        return self.mean_motion * TWO_PI / SECONDS_PER_DAY

    @property
    def semi_major_axis(self) -> float:
        """Two-body semi-major axis in meters, a = (mu / n^2)^(1/3)."""
        return (MU_EARTH / self.mean_motion_rad_s ** 2) ** (1.0 / 3.0)

    @property
    def period(self) -> float:
        return TWO_PI / self.mean_motion_rad_s


def tle_checksum(line: str) -> int:
    """Mod-10 checksum of the first 68 characters of a TLE line.

    Digits count at face value, '-' counts 1, everything else counts 0.
    """
    total = 0
    for ch in line[:68]:
        if "0" <= ch <= "9":
            total += ord(ch) - 48
        elif ch == "-":
            total += 1
    return total % 10


# --- field parsers ---------------------------------------------------------

def _catalog(field: str) -> int:
    field = field.strip()
    if not field:
        raise ValueError("empty catalog number")
    if field[0].isalpha():
        head = _ALPHA5.index(field[0].upper())  # ValueError if I/O/other
        return (head + 10) * 10_000 + int(field[1:])
    return int(field)


def _format_catalog(number: int) -> str:
    if number < 100_000:
        return f"{number:05d}"
    head, tail = divmod(number, 10_000)
    return f"{_ALPHA5[head - 10]}{tail:04d}"


def _implied_exp(field: str) -> float:
    """Parse the ' 12345-6' style field: 0.12345e-6, sign optional."""
    text = field.strip()
    if not text:
        return 0.0
    m = _EXP_FIELD.fullmatch(text)
    if m is None:
        raise ValueError(f"bad exponent field {field!r}")
    sign = -1.0 if m.group(1) == "-" else 1.0
    return sign * float("0." + m.group(2)) * 10.0 ** int(m.group(3))


def _format_implied_exp(value: float) -> str:
    if value == 0.0:
        return " 00000-0"
    sign = "-" if value < 0 else " "
    exp = math.floor(math.log10(abs(value))) + 1
    mant = round(abs(value) / 10.0 ** exp * 1e5)
    if mant >= 100_000:
        mant //= 10
        exp += 1
    exp_sign = "+" if exp > 0 else "-"
    return f"{sign}{mant:05d}{exp_sign}{abs(exp):d}"


def _format_ndot(value: float) -> str:
    body = f"{abs(value):.8f}"
    if body.startswith("0"):
        body = body[1:]
    return ("-" if value < 0 else " ") + body.rjust(9)


def _int_or_zero(field: str) -> int:
    field = field.strip()
    return int(field) if field else 0


def _epoch(year_field: str, day_field: str) -> datetime:
    yy = int(year_field)
    year = 2000 + yy if yy < 57 else 1900 + yy
    day = Decimal(day_field.strip())
    if not (1 <= day < 367):
        raise ValueError(f"epoch day {day_field!r} out of range")
    micro = int(((day - 1) * 86_400_000_000).to_integral_value())
    return datetime(year, 1, 1, tzinfo=timezone.utc) + timedelta(microseconds=micro)


def _format_epoch(epoch: datetime) -> str:
    start = datetime(epoch.year, 1, 1, tzinfo=timezone.utc)
    micro = (epoch - start) // timedelta(microseconds=1)
    day = Decimal(micro) / Decimal(86_400_000_000) + 1
    return f"{epoch.year % 100:02d}{day.quantize(Decimal('1e-8')):012.8f}"


def _implied_decimal(field: str) -> float:
    text = field.strip()
    if not text.isdigit():
        raise ValueError(f"bad eccentricity field {field!r}")
    return float("0." + text)


# --- record parsing ----------------------------------------------------------

def _check_line(line: str, number: int, lineno: int) -> None:
    if len(line) != TLE_LINE_LENGTH:
        raise MalformedLine(
            f"line {number} of record must be {TLE_LINE_LENGTH} characters, "
            f"got {len(line)}", lineno)
    if line[0] != str(number) or line[1] != " ":
        raise MalformedLine(f"expected TLE line {number}", lineno)
    last = line[68]
    if not ("0" <= last <= "9"):
        raise ChecksumMismatch(f"checksum column holds {last!r}", lineno)
    expected = tle_checksum(line)
    if int(last) != expected:
        raise ChecksumMismatch(
            f"checksum {last} does not match computed {expected}", lineno)


def parse_tle_lines(line1: str, line2: str, name: str | None = None,
                    first_lineno: int = 1) -> TwoLineElements:
    """Parse and validate one record from its two data lines."""
    line1 = line1.rstrip("\r\n ")
    line2 = line2.rstrip("\r\n ")
    n1, n2 = first_lineno, first_lineno + 1
    _check_line(line1, 1, n1)
    _check_line(line2, 2, n2)

    try:
        catnum = _catalog(line1[2:7])
        classification = line1[7]
        intl = line1[9:17].strip()
        epoch = _epoch(line1[18:20], line1[20:32])
        ndot = float(line1[33:43])
        nddot = _implied_exp(line1[44:52])
        bstar = _implied_exp(line1[53:61])
        eph_type = _int_or_zero(line1[62])
        elset = _int_or_zero(line1[64:68])
    except (ValueError, IndexError, ArithmeticError) as exc:
        raise FieldParse(str(exc), n1) from None

    try:
        catnum2 = _catalog(line2[2:7])
        incl = float(line2[8:16])
        raan = float(line2[17:25])
        ecc = _implied_decimal(line2[26:33])
        argp = float(line2[34:42])
        mean_anom = float(line2[43:51])
        mean_motion = float(line2[52:63])
        revs = _int_or_zero(line2[63:68])
    except (ValueError, IndexError, ArithmeticError) as exc:
        raise FieldParse(str(exc), n2) from None

    if catnum != catnum2:
        raise MalformedLine(
            f"catalog number {catnum2} differs from line 1 ({catnum})", n2)
    values = (incl, raan, ecc, argp, mean_anom, mean_motion, ndot, nddot, bstar)
    if not all(math.isfinite(v) for v in values):
        raise FieldParse("non-finite element", n2)
    if not 0.0 <= incl <= 180.0:
        raise ElementOutOfRange(f"inclination {incl} outside [0, 180]", n2)
    if not 0.0 <= ecc < 1.0:
        raise ElementOutOfRange(f"eccentricity {ecc} outside [0, 1)", n2)
    if mean_motion <= 0.0:
        raise ElementOutOfRange(f"mean motion {mean_motion} must be positive", n2)

    name = (name or "").strip()
    if name.startswith("0 "):
        name = name[2:].strip()
    record = TwoLineElements(
        name=name or f"SAT-{catnum}",
        catalog_number=catnum,
        epoch_utc=epoch,
        inclination=incl,
        raan=raan % 360.0,
        eccentricity=ecc,
        arg_perigee=argp % 360.0,
        mean_anomaly=mean_anom % 360.0,
        mean_motion=mean_motion,
        bstar=bstar,
        classification=classification,
        intl_designator=intl,
        mean_motion_dot=ndot,
        mean_motion_ddot=nddot,
        ephemeris_type=eph_type,
        element_set_number=elset,
        rev_number=revs,
    )
    if record.semi_major_axis <= WGS84_A:
        raise ElementOutOfRange(
            f"mean motion {mean_motion} rev/day puts the orbit inside the Earth", n2)
    return record


def _is_data_line(line: str, number: int) -> bool:
    return len(line) >= 2 and line[0] == str(number) and line[1] == " "


def scan_tle_file(text: str) -> tuple[list[TwoLineElements], list[TleError]]:
    """Parse a catalog, collecting per-record errors instead of raising.

    Accepts 3-line (name, line 1, line 2) and bare 2-line records, with
    blank lines ignored. Returns ``(records, errors)`` in file order.
    """
    lines = [ln.rstrip("\r\n") for ln in text.splitlines()]
    records: list[TwoLineElements] = []
    errors: list[TleError] = []
    i, count = 0, len(lines)
    while i < count:
        if not lines[i].strip():
            i += 1
            continue
        name = None
        if not _is_data_line(lines[i], 1):
            if _is_data_line(lines[i], 2):
                errors.append(MalformedLine("line 2 without preceding line 1", i + 1))
                i += 1
                continue
            name = lines[i]
            i += 1
        if i >= count or not _is_data_line(lines[i], 1):
            errors.append(MalformedLine("expected TLE line 1", min(i, count - 1) + 1))
            continue
        if i + 1 >= count or not _is_data_line(lines[i + 1], 2):
            errors.append(MalformedLine("expected TLE line 2", min(i + 1, count - 1) + 1))
            i += 1
            continue
        try:
            records.append(parse_tle_lines(lines[i], lines[i + 1], name, i + 1))
        except TleError as exc:
            errors.append(exc)
        i += 2
    return records, errors


def parse_tle_file(text: str) -> list[TwoLineElements]:
    """Parse a whole catalog; raise the first located error, if any."""
    records, errors = scan_tle_file(text)
    if errors:
        raise errors[0]
    return records


def load_tle_file(path) -> list[TwoLineElements]:
    return parse_tle_file(Path(path).read_text(encoding="utf-8", errors="replace"))


def catalog_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --- formatting ------------------------------------------------------------

def _with_checksum(body: str) -> str:
    assert len(body) == 68, body
    return body + str(tle_checksum(body))


def format_tle(rec: TwoLineElements) -> tuple[str, str]:
    """Render a record as its two 69-character data lines."""
    line1 = (
        f"1 {_format_catalog(rec.catalog_number)}{rec.classification[:1] or 'U'} "
        f"{rec.intl_designator:<8.8} {_format_epoch(rec.epoch_utc)} "
        f"{_format_ndot(rec.mean_motion_dot)} "
        f"{_format_implied_exp(rec.mean_motion_ddot)} "
        f"{_format_implied_exp(rec.bstar)} "
        f"{rec.ephemeris_type % 10:d} {rec.element_set_number % 10_000:4d}"
    )
    ecc = f"{rec.eccentricity:.7f}"[2:]
    line2 = (
        f"2 {_format_catalog(rec.catalog_number)} "
        f"{rec.inclination:8.4f} {rec.raan:8.4f} {ecc} "
        f"{rec.arg_perigee:8.4f} {rec.mean_anomaly:8.4f} "
        f"{rec.mean_motion:11.8f}{rec.rev_number % 100_000:5d}"
    )
    return _with_checksum(line1), _with_checksum(line2)


def format_tle_file(records, with_names: bool = True) -> str:
    out = []
    for rec in records:
        if with_names:
            out.append(rec.name)
        out.extend(format_tle(rec))
    return "\n".join(out) + ("\n" if out else "")
