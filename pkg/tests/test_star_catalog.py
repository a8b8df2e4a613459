import io

import pytest

from app.core.errors import DataValidationError
from app.services.star_catalog import parse_catalog, positions, serialize_catalog


def _parse(text: str):
    return parse_catalog(io.StringIO(text), "test.csv")


def test_parse_polaris_row():
    catalog = _parse("id,ra_deg,dec_deg,mag\nHIP11767,37.9546,89.2641,1.97\n")
    star = catalog.get("HIP11767")
    assert (star.ra, star.dec, star.mag) == (37.9546, 89.2641, 1.97)
    assert len(catalog) == 1


def test_extra_columns_are_ignored():
    catalog = _parse("name,id,ra_deg,dec_deg,mag,spectral\nPolaris,HIP11767,37.9546,89.2641,1.97,F7\n")
    assert "HIP11767" in catalog


def test_dec_out_of_range_reports_line():
    with pytest.raises(DataValidationError) as exc:
        _parse("id,ra_deg,dec_deg,mag\nA,10,20,1\nB,10,95,1\n")
    assert exc.value.line == 3
    assert "dec out of range" in str(exc.value)


@pytest.mark.parametrize("ra", ["360", "-0.5"])
def test_ra_out_of_range(ra):
    with pytest.raises(DataValidationError):
        _parse(f"id,ra_deg,dec_deg,mag\nA,{ra},0,1\n")


def test_duplicate_id():
    with pytest.raises(DataValidationError, match="duplicate id"):
        _parse("id,ra_deg,dec_deg,mag\nA,1,0,1\nA,2,0,1\n")


def test_malformed_row():
    with pytest.raises(DataValidationError, match="malformed"):
        _parse("id,ra_deg,dec_deg,mag\nA,one,0,1\n")


def test_missing_column():
    with pytest.raises(DataValidationError, match="mag"):
        _parse("id,ra_deg,dec_deg\nA,1,0\n")


def test_unknown_star_lookup(bright_catalog):
    with pytest.raises(DataValidationError, match="unknown star"):
        bright_catalog.get("HIP1")


def test_serialize_round_trip(bright_catalog):
    again = _parse(serialize_catalog(bright_catalog))
    assert {s.id: (s.ra, s.dec, s.mag) for s in again} == {s.id: (s.ra, s.dec, s.mag) for s in bright_catalog}


def test_positions_are_unit_vectors(bright_catalog):
    pos = positions(bright_catalog, ["HIP27989", "HIP11767"])
    for vec in pos.values():
        assert sum(c * c for c in vec) == pytest.approx(1.0, abs=1e-12)
    assert pos["HIP11767"][2] > 0.999
