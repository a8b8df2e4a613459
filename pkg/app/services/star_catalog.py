"""Star catalog ingest and position lookups."""

import csv
import io
import logging
from typing import Iterable, Optional, TextIO

import numpy as np

from app.core.errors import DataValidationError
from app.models.catalog import Star, StarCatalog, UnitVector
from app.services.spherical import to_unit_vector

logger = logging.getLogger("skysig.catalog")

CATALOG_COLUMNS = ("id", "ra_deg", "dec_deg", "mag")


def parse_catalog(stream: TextIO, source: Optional[str] = None) -> StarCatalog:
    """
    Parse a header-bearing CSV catalog (``id,ra_deg,dec_deg,mag``).

    Raises:
        DataValidationError: missing columns, malformed row, coordinates out of
            range, or duplicate id. The error carries the 1-based line number.
    """
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    missing = [col for col in CATALOG_COLUMNS if col not in header]
    if missing:
        raise DataValidationError(f"catalog header missing columns: {', '.join(missing)}", source, 1)

    stars: dict[str, Star] = {}
    for row in reader:
        lineno = reader.line_num
        star_id = (row.get("id") or "").strip()
        try:
            ra = float(row["ra_deg"])
            dec = float(row["dec_deg"])
            mag = float(row["mag"])
        except (TypeError, ValueError):
            raise DataValidationError(f"malformed catalog row for id {star_id!r}", source, lineno) from None
        if not star_id:
            raise DataValidationError("empty star id", source, lineno)
        if not -90.0 <= dec <= 90.0:
            raise DataValidationError(f"dec out of range: {dec}", source, lineno)
        if not 0.0 <= ra < 360.0:
            raise DataValidationError(f"ra out of range: {ra}", source, lineno)
        if star_id in stars:
            raise DataValidationError(f"duplicate id {star_id!r}", source, lineno)
        stars[star_id] = Star(id=star_id, ra=ra, dec=dec, mag=mag)

    logger.info("Loaded %d stars%s", len(stars), f" from {source}" if source else "")
    return StarCatalog(stars=stars)


def serialize_catalog(catalog: StarCatalog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CATALOG_COLUMNS)
    for star in sorted(catalog, key=lambda s: s.id):
        writer.writerow([star.id, repr(star.ra), repr(star.dec), repr(star.mag)])
    return buf.getvalue()


def star_vector(catalog: StarCatalog, star_id: str) -> UnitVector:
    star = catalog.get(star_id)
    return to_unit_vector(star.ra, star.dec)


def positions(catalog: StarCatalog, star_ids: Iterable[str]) -> dict[str, np.ndarray]:
    """Unit vectors (as arrays) for the given stars, keyed by id."""
    out: dict[str, np.ndarray] = {}
    for star_id in star_ids:
        out[star_id] = np.array(star_vector(catalog, star_id).as_tuple())
    return out
