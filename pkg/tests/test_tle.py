from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings, strategies as st

from inac_sim.errors import (ChecksumMismatch, ElementOutOfRange, FieldParse,
                             MalformedLine, TleError)
from inac_sim.tle import (TwoLineElements, catalog_hash, format_tle,
                          format_tle_file, parse_tle_file, parse_tle_lines,
                          scan_tle_file, tle_checksum)

ISS_1 = "1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927"
ISS_2 = "2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537"


def _data_lines(text):
    return [ln for ln in text.splitlines() if ln[:2] in ("1 ", "2 ")]


def test_checksum_matches_printed_digit_on_every_real_line(real_tle_text):
    lines = _data_lines(real_tle_text)
    assert len(lines) == 74
    for line in lines:
        assert tle_checksum(line) == int(line[68]), line


def test_checksum_rules():
    # digits count at face value, '-' counts 1, everything else 0
    body = "1 " + "-" * 5 + "A+. " + "0" * 57
    assert len(body) == 68
    assert tle_checksum(body + "0") == (1 + 5) % 10


def test_parse_reference_record():
    rec = parse_tle_lines(ISS_1, ISS_2, "ISS (ZARYA)")
    assert rec.catalog_number == 25544
    assert rec.name == "ISS (ZARYA)"
    assert rec.intl_designator == "98067A"
    assert rec.inclination == pytest.approx(51.6416)
    assert rec.raan == pytest.approx(247.4627)
    assert rec.eccentricity == pytest.approx(0.0006703)
    assert rec.arg_perigee == pytest.approx(130.5360)
    assert rec.mean_anomaly == pytest.approx(325.0288)
    assert rec.mean_motion == pytest.approx(15.72125391)
    assert rec.bstar == pytest.approx(-0.11606e-4)
    assert rec.mean_motion_dot == pytest.approx(-0.00002182)
    assert rec.rev_number == 56353
    expected = datetime(2008, 1, 1, tzinfo=timezone.utc) + timedelta(days=263.51782528)
    assert abs((rec.epoch_utc - expected).total_seconds()) < 1e-6
    # ~340 km circular orbit
    assert 6.6e6 < rec.semi_major_axis < 6.8e6
    assert rec.period == pytest.approx(86400 / 15.72125391)


def test_two_digit_year_pivot():
    line1 = ISS_1[:18] + "57" + ISS_1[20:68]
    line1 += str(tle_checksum(line1 + "0"))
    rec = parse_tle_lines(line1, ISS_2)
    assert rec.epoch_utc.year == 1957


def test_bad_checksum_reports_line_number():
    bad = ISS_1[:68] + str((int(ISS_1[68]) + 1) % 10)
    with pytest.raises(ChecksumMismatch) as info:
        parse_tle_lines(bad, ISS_2, first_lineno=11)
    assert info.value.line_number == 11
    assert "line 11" in str(info.value)


def test_wrong_length_is_malformed():
    with pytest.raises(MalformedLine):
        parse_tle_lines(ISS_1[:60], ISS_2)


def test_catalog_mismatch_between_lines():
    line2 = ISS_2[:2] + "25545" + ISS_2[7:68]
    line2 += str(tle_checksum(line2 + "0"))
    with pytest.raises(MalformedLine):
        parse_tle_lines(ISS_1, line2)


def test_garbage_field_is_field_parse():
    line2 = ISS_2[:8] + "  5x.641" + ISS_2[16:68]
    line2 += str(tle_checksum(line2 + "0"))
    with pytest.raises(FieldParse):
        parse_tle_lines(ISS_1, line2)


def test_inclination_out_of_range():
    line2 = ISS_2[:8] + "190.0000" + ISS_2[16:68]
    line2 += str(tle_checksum(line2 + "0"))
    with pytest.raises(ElementOutOfRange):
        parse_tle_lines(ISS_1, line2)


def test_tle_errors_are_value_errors():
    assert issubclass(TleError, ValueError)


def test_scan_collects_errors_and_keeps_going(real_tle_text):
    lines = real_tle_text.splitlines()
    broken = lines[:2] + [lines[2][:68] + "x"] + lines[3:]
    records, errors = scan_tle_file("\n".join(broken))
    assert len(records) == 36
    assert len(errors) == 1 and errors[0].line_number == 3
    with pytest.raises(ChecksumMismatch):
        parse_tle_file("\n".join(broken))


def test_three_line_and_two_line_records_mix():
    text = f"ISS (ZARYA)\n{ISS_1}\n{ISS_2}\n\n{ISS_1}\n{ISS_2}\n0 SPACE STATION\n{ISS_1}\n{ISS_2}\n"
    recs = parse_tle_file(text)
    assert [r.name for r in recs] == ["ISS (ZARYA)", "SAT-25544", "SPACE STATION"]


def test_real_catalog_parses(real_tle_text):
    recs = parse_tle_file(real_tle_text)
    assert len(recs) == 37
    assert all(0 <= r.eccentricity < 1 for r in recs)


def test_format_round_trips_real_lines(real_tle_text):
    for rec in parse_tle_file(real_tle_text):
        again = parse_tle_lines(*format_tle(rec), rec.name)
        for f in ("catalog_number", "inclination", "raan", "eccentricity", "arg_perigee",
                  "mean_anomaly", "mean_motion", "bstar", "mean_motion_ddot",
                  "element_set_number", "rev_number", "intl_designator"):
            assert getattr(again, f) == pytest.approx(getattr(rec, f), rel=1e-9, abs=1e-12), f
        assert abs((again.epoch_utc - rec.epoch_utc).total_seconds()) < 1e-3


def test_alpha5_catalog_numbers_round_trip():
    rec = parse_tle_lines(ISS_1, ISS_2)
    big = TwoLineElements(**{**rec.__dict__, "catalog_number": 123456})
    l1, l2 = format_tle(big)
    assert l1[2:7] == "C3456"
    assert parse_tle_lines(l1, l2).catalog_number == 123456


def test_catalog_hash_is_stable():
    assert catalog_hash("abc") == catalog_hash("abc") != catalog_hash("abd")


elements = st.fixed_dictionaries({
    "inclination": st.floats(0, 180),
    "raan": st.floats(0, 359.9999),
    "eccentricity": st.floats(0, 0.9),
    "arg_perigee": st.floats(0, 359.9999),
    "mean_anomaly": st.floats(0, 359.9999),
    "mean_motion": st.floats(1.0, 16.0),
    "catalog_number": st.integers(1, 339999),
})


@settings(max_examples=200, deadline=None)
@given(elements)
def test_format_parse_round_trip_property(fields):
    rec = TwoLineElements(name="X", epoch_utc=datetime(2024, 5, 1, 3, 4, 5, tzinfo=timezone.utc), **fields)
    l1, l2 = format_tle(rec)
    assert len(l1) == len(l2) == 69
    back = parse_tle_lines(l1, l2)
    assert back.catalog_number == rec.catalog_number
    assert back.inclination == pytest.approx(rec.inclination, abs=5e-5)
    assert back.eccentricity == pytest.approx(rec.eccentricity, abs=5e-8)
    assert back.mean_motion == pytest.approx(rec.mean_motion, abs=5e-9)
    angle_err = (back.raan - rec.raan + 180) % 360 - 180
    assert abs(angle_err) < 5e-5
    assert format_tle_file([back]).count("\n") == 3
