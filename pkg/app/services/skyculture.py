"""
Sky culture ingest: line-figure files, culture metadata, use overrides,
faint-star pruning and dataset validation.
"""

import csv
import io
import logging
from dataclasses import replace
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional, TextIO

import networkx as nx
import numpy as np

from app.core.errors import DataValidationError, EmptyFigureError
from app.models.catalog import StarCatalog
from app.models.pipeline import PipelineConfig, Reconnection
from app.models.skyculture import (
    UNCATEGORIZED,
    Ancestry,
    CultureRecord,
    Dataset,
    LineFigure,
    Predictor,
    Transmission,
    Use,
    normalize_edge,
)
from app.services.spherical import angular_separation
from app.services.star_catalog import parse_catalog, positions

logger = logging.getLogger("skysig.skyculture")

FIGURE_FILE = "constellationship.fab"

TRANSMISSION_TOKENS = {
    "w": Transmission.WRITTEN,
    "written": Transmission.WRITTEN,
    "o": Transmission.ORAL,
    "oral": Transmission.ORAL,
}

USE_TOKENS = {
    "nv": Use.NAVIGATION,
    "navigation": Use.NAVIGATION,
    "re": Use.RELIGIOUS,
    "religious": Use.RELIGIOUS,
    "po": Use.POLITICAL,
    "political": Use.POLITICAL,
    "fo": Use.FOLK,
    "folk": Use.FOLK,
}

ANCESTRY_CODES = {
    "G": Ancestry.IAU_GREEK,
    "I": Ancestry.IAU_GREEK,
    "M": Ancestry.MESOPOTAMIAN,
    "In": Ancestry.INDIAN,
    "C": Ancestry.CHINESE,
    "A": Ancestry.AUSTRONESIAN,
    "P": Ancestry.POLYNESIAN,
    "nA": Ancestry.N_AMERICAN,
    "sA": Ancestry.S_AMERICAN,
    "Sa": Ancestry.SAMI,
    "E": Ancestry.EGYPTIAN,
    "-": Ancestry.UNCATEGORIZED,
}

# full names, matched case-insensitively
ANCESTRY_NAMES = {
    "iau": Ancestry.IAU_GREEK,
    "greek": Ancestry.IAU_GREEK,
    "iau/greek-descended": Ancestry.IAU_GREEK,
    "mesopotamian": Ancestry.MESOPOTAMIAN,
    "indian": Ancestry.INDIAN,
    "chinese": Ancestry.CHINESE,
    "austronesian": Ancestry.AUSTRONESIAN,
    "polynesian": Ancestry.POLYNESIAN,
    "n-american": Ancestry.N_AMERICAN,
    "s-american": Ancestry.S_AMERICAN,
    "sami": Ancestry.SAMI,
    "egyptian": Ancestry.EGYPTIAN,
    "uncategorized": Ancestry.UNCATEGORIZED,
}


# ---------------------------------------------------------------------------
# Line-figure files
# ---------------------------------------------------------------------------


def _star_token(token: str, prefix: str) -> str:
    return f"{prefix}{token}" if prefix and token.isdigit() else token


def parse_skyculture(
    stream: TextIO,
    culture_id: str,
    star_id_prefix: str = "",
    source: Optional[str] = None,
) -> list[LineFigure]:
    """
    Parse a constellationship file: ``figure_id n_lines s1 s2 s2 s3 ...``.

    Star resolution against the catalog is deferred to dataset validation.
    Duplicate pairs inside a figure are collapsed with a warning.
    """
    figures: list[LineFigure] = []
    seen_ids: set[str] = set()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise DataValidationError("expected 'figure_id n_lines star star ...'", source, lineno)
        figure_id, count_token, stars = tokens[0], tokens[1], tokens[2:]
        try:
            n_lines = int(count_token)
        except ValueError:
            raise DataValidationError(f"{figure_id}: line count {count_token!r} is not an integer", source, lineno) from None
        if n_lines <= 0 or not stars:
            raise DataValidationError(f"{figure_id}: zero lines", source, lineno)
        if len(stars) % 2:
            raise DataValidationError(f"{figure_id}: odd number of star ids ({len(stars)})", source, lineno)
        if len(stars) // 2 != n_lines:
            raise DataValidationError(
                f"{figure_id}: declared {n_lines} lines but found {len(stars) // 2}", source, lineno
            )
        if figure_id in seen_ids:
            raise DataValidationError(f"duplicate figure id {figure_id!r} in culture {culture_id}", source, lineno)
        seen_ids.add(figure_id)

        edges: list[tuple[str, str]] = []
        seen_edges: set[tuple[str, str]] = set()
        for a, b in zip(stars[0::2], stars[1::2]):
            a = _star_token(a, star_id_prefix)
            b = _star_token(b, star_id_prefix)
            if a == b:
                raise DataValidationError(f"{figure_id}: self-loop on star {a}", source, lineno)
            edge = normalize_edge(a, b)
            if edge in seen_edges:
                logger.warning("%s/%s: duplicate line %s-%s collapsed", culture_id, figure_id, a, b)
                continue
            seen_edges.add(edge)
            edges.append(edge)
        figures.append(LineFigure(culture_id=culture_id, figure_id=figure_id, edges=tuple(sorted(edges))))
    return figures


def serialize_skyculture(figures: Iterable[LineFigure]) -> str:
    lines = []
    for fig in figures:
        flat = " ".join(f"{a} {b}" for a, b in fig.edges)
        lines.append(f"{fig.figure_id} {len(fig.edges)} {flat}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Metadata and overrides
# ---------------------------------------------------------------------------


def _parse_ancestry(value: str, source: Optional[str], lineno: int) -> Ancestry:
    # short codes are case-sensitive: sA and Sa name different groups
    token = value.strip() or "-"
    if token in ANCESTRY_CODES:
        return ANCESTRY_CODES[token]
    if token.lower() in ANCESTRY_NAMES:
        return ANCESTRY_NAMES[token.lower()]
    raise DataValidationError(f"unknown ancestry {token!r}", source, lineno)


def _parse_uses(value: str, source: Optional[str], lineno: int) -> frozenset[Use]:
    tokens = [tok.strip().lower() for tok in value.replace(",", ";").split(";") if tok.strip()]
    if tokens == [UNCATEGORIZED]:
        return frozenset()
    if not tokens:
        raise DataValidationError("uses may be empty only when marked 'uncategorized'", source, lineno)
    uses = set()
    for tok in tokens:
        if tok not in USE_TOKENS:
            raise DataValidationError(f"unknown use {tok!r}", source, lineno)
        uses.add(USE_TOKENS[tok])
    return frozenset(uses)


def parse_culture_metadata(stream: TextIO, source: Optional[str] = None) -> list[CultureRecord]:
    """
    Parse ``culture_id,transmission,uses,ancestry[,name,timestamp_note]``.

    Raises:
        DataValidationError: unknown transmission/use/ancestry token or duplicate culture id.
    """
    reader = csv.DictReader(stream)
    required = ("culture_id", "transmission", "uses", "ancestry")
    missing = [col for col in required if col not in (reader.fieldnames or [])]
    if missing:
        raise DataValidationError(f"metadata header missing columns: {', '.join(missing)}", source, 1)

    records: list[CultureRecord] = []
    seen: set[str] = set()
    for row in reader:
        lineno = reader.line_num
        culture_id = (row.get("culture_id") or "").strip()
        if not culture_id:
            raise DataValidationError("empty culture_id", source, lineno)
        if culture_id in seen:
            raise DataValidationError(f"duplicate culture_id {culture_id!r}", source, lineno)
        seen.add(culture_id)

        transmission_tok = (row.get("transmission") or "").strip().lower()
        if transmission_tok not in TRANSMISSION_TOKENS:
            raise DataValidationError(f"unknown transmission {transmission_tok!r}", source, lineno)

        records.append(
            CultureRecord(
                culture_id=culture_id,
                transmission=TRANSMISSION_TOKENS[transmission_tok],
                uses=_parse_uses(row.get("uses") or "", source, lineno),
                ancestry=_parse_ancestry(row.get("ancestry") or "", source, lineno),
                name=(row.get("name") or "").strip() or None,
                timestamp_note=(row.get("timestamp_note") or "").strip(),
            )
        )
    return records


def parse_use_overrides(stream: TextIO, source: Optional[str] = None) -> dict[str, Use]:
    """Parse ``figure_id,use`` where figure_id is the qualified ``culture/figure`` key."""
    reader = csv.DictReader(stream)
    if not {"figure_id", "use"} <= set(reader.fieldnames or []):
        raise DataValidationError("overrides header must contain figure_id,use", source, 1)
    overrides: dict[str, Use] = {}
    for row in reader:
        lineno = reader.line_num
        key = (row.get("figure_id") or "").strip()
        token = (row.get("use") or "").strip().lower()
        if token not in USE_TOKENS:
            raise DataValidationError(f"unknown use {token!r}", source, lineno)
        if key in overrides:
            raise DataValidationError(f"duplicate override for {key!r}", source, lineno)
        overrides[key] = USE_TOKENS[token]
    return overrides


def serialize_culture_metadata(cultures: Iterable[CultureRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["culture_id", "transmission", "uses", "ancestry", "name", "timestamp_note"])
    for record in cultures:
        uses = ";".join(sorted(use.value for use in record.uses)) or UNCATEGORIZED
        writer.writerow(
            [
                record.culture_id,
                record.transmission.value,
                uses,
                record.ancestry.value,
                record.name or "",
                record.timestamp_note,
            ]
        )
    return buffer.getvalue()


def serialize_use_overrides(overrides: Mapping[str, Use]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["figure_id", "use"])
    for key in sorted(overrides):
        writer.writerow([key, overrides[key].value])
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Graph view and pruning
# ---------------------------------------------------------------------------


def figure_graph(figure: LineFigure) -> nx.Graph:
    """Undirected graph of the figure; nodes are the stars incident to a link."""
    graph = nx.Graph()
    graph.add_nodes_from(figure.stars)
    graph.add_edges_from(figure.edges)
    return graph


def _chain_links(neighbours: list[str], pos: Mapping[str, np.ndarray]) -> list[tuple[str, str]]:
    # Nearest-neighbour chain grown from the closest pair
    dist = {
        (u, v): angular_separation(pos[u], pos[v]) for u, v in combinations(neighbours, 2)
    }

    def d(u: str, v: str) -> float:
        return dist[(u, v)] if (u, v) in dist else dist[(v, u)]

    first = min(dist, key=lambda pair: (dist[pair], pair))
    chain = list(first)
    remaining = [n for n in neighbours if n not in first]
    while remaining:
        best = None
        for candidate in remaining:
            for at_head, end in ((True, chain[0]), (False, chain[-1])):
                score = (d(end, candidate), not at_head, candidate)
                if best is None or score < best[0]:
                    best = (score, at_head, candidate)
        _, at_head, candidate = best
        if at_head:
            chain.insert(0, candidate)
        else:
            chain.append(candidate)
        remaining.remove(candidate)
    return list(zip(chain[:-1], chain[1:]))


def _hub_links(
    removed: str, neighbours: list[str], pos: Mapping[str, np.ndarray]
) -> list[tuple[str, str]]:
    hub = min(neighbours, key=lambda n: (angular_separation(pos[removed], pos[n]), n))
    return [(hub, n) for n in neighbours if n != hub]


def prune_faint(
    figure: LineFigure,
    catalog: StarCatalog,
    max_mag: float = 7.0,
    reconnection: Reconnection = Reconnection.CHAIN,
) -> LineFigure:
    """
    Remove stars fainter than ``max_mag`` and reconnect their former neighbours.

    Stars of degree 1 are dropped without adding links. Faint stars are
    processed in id order, so the result is deterministic and idempotent.

    Raises:
        EmptyFigureError: if no link survives.
    """
    graph = figure_graph(figure)
    faint = sorted(star for star in graph.nodes if catalog.get(star).mag > max_mag)
    if not faint:
        return figure

    pos = positions(catalog, graph.nodes)
    for star in faint:
        neighbours = sorted(graph.neighbors(star))
        graph.remove_node(star)
        if len(neighbours) < 2:
            continue
        if reconnection == Reconnection.STAR_TO_NEAREST:
            links = _hub_links(star, neighbours, pos)
        else:
            links = _chain_links(neighbours, pos)
        for u, v in links:
            if u != v and not graph.has_edge(u, v):
                graph.add_edge(u, v)

    edges = tuple(sorted(normalize_edge(u, v) for u, v in graph.edges))
    if not edges:
        raise EmptyFigureError(
            f"{figure.key}: no links left after removing stars fainter than {max_mag}"
        )
    logger.debug("%s: pruned %d faint star(s)", figure.key, len(faint))
    return replace(figure, edges=edges)


# ---------------------------------------------------------------------------
# Dataset assembly
# ---------------------------------------------------------------------------


def discover_culture_files(skycultures_dir: Path) -> list[tuple[str, Path]]:
    """``<culture>/constellationship.fab`` directories or ``<culture>.fab`` files, sorted."""
    if not skycultures_dir.is_dir():
        raise DataValidationError("sky culture directory not found", str(skycultures_dir))
    found: list[tuple[str, Path]] = []
    for entry in sorted(skycultures_dir.iterdir()):
        if entry.is_dir() and (entry / FIGURE_FILE).is_file():
            found.append((entry.name, entry / FIGURE_FILE))
        elif entry.is_file() and entry.suffix == ".fab":
            found.append((entry.stem, entry))
    if not found:
        raise DataValidationError("no sky culture files found", str(skycultures_dir))
    return found


def build_dataset(
    catalog: StarCatalog,
    cultures: list[CultureRecord],
    figures: list[LineFigure],
    use_overrides: Optional[Mapping[str, Use]] = None,
    max_mag: float = 7.0,
    reconnection: Reconnection = Reconnection.CHAIN,
) -> Dataset:
    """Validate references, prune faint stars and assemble an immutable Dataset."""
    use_overrides = dict(use_overrides or {})
    culture_ids = {c.culture_id for c in cultures}
    keys: set[str] = set()
    for fig in figures:
        if fig.culture_id not in culture_ids:
            raise DataValidationError(f"{fig.key}: culture {fig.culture_id!r} has no metadata record")
        if fig.key in keys:
            raise DataValidationError(f"duplicate figure {fig.key}")
        keys.add(fig.key)
        if not fig.edges:
            raise DataValidationError(f"{fig.key}: figure has no lines")
        for star in fig.stars:
            if star not in catalog:
                raise DataValidationError(f"{fig.key}: unknown star id {star!r}")
    unknown = sorted(set(use_overrides) - keys)
    if unknown:
        raise DataValidationError(f"use overrides reference unknown figures: {', '.join(unknown)}")

    kept: list[LineFigure] = []
    dropped: list[str] = []
    faint_stars: set[str] = set()
    for fig in figures:
        faint_stars.update(s for s in fig.stars if catalog.get(s).mag > max_mag)
        try:
            kept.append(prune_faint(fig, catalog, max_mag, reconnection))
        except EmptyFigureError as exc:
            logger.warning("Dropped figure: %s", exc)
            dropped.append(fig.key)

    for key in dropped:
        use_overrides.pop(key, None)

    with_figures = {fig.culture_id for fig in kept}
    kept_cultures = []
    for record in sorted(cultures, key=lambda c: c.culture_id):
        if record.culture_id in with_figures:
            kept_cultures.append(record)
        else:
            logger.warning("Culture %s has metadata but no figures; excluded", record.culture_id)

    kept.sort(key=lambda f: (f.culture_id, f.figure_id))
    return Dataset(
        catalog=catalog,
        cultures=tuple(kept_cultures),
        figures=tuple(kept),
        use_overrides=use_overrides,
        dropped=tuple(sorted(dropped)),
        pruned_stars=tuple(sorted(faint_stars)),
    )


def _open_required(path: Optional[Path], what: str) -> Path:
    if path is None:
        raise DataValidationError(f"config is missing the {what} path")
    if not Path(path).is_file():
        raise DataValidationError(f"{what} file not found", str(path))
    return Path(path)


def load_dataset(config: PipelineConfig) -> Dataset:
    """Read every input named by the config and build the validated Dataset."""
    catalog_path = _open_required(config.catalog, "catalog")
    with catalog_path.open(encoding="utf-8", newline="") as fh:
        catalog = parse_catalog(fh, str(catalog_path))

    metadata_path = _open_required(config.metadata, "metadata")
    with metadata_path.open(encoding="utf-8", newline="") as fh:
        cultures = parse_culture_metadata(fh, str(metadata_path))

    if config.skycultures_dir is None:
        raise DataValidationError("config is missing the skycultures_dir path")
    figures: list[LineFigure] = []
    for culture_id, path in discover_culture_files(Path(config.skycultures_dir)):
        with path.open(encoding="utf-8") as fh:
            figures.extend(parse_skyculture(fh, culture_id, config.star_id_prefix, str(path)))

    overrides: dict[str, Use] = {}
    if config.overrides is not None:
        overrides_path = _open_required(config.overrides, "overrides")
        with overrides_path.open(encoding="utf-8", newline="") as fh:
            overrides = parse_use_overrides(fh, str(overrides_path))

    return build_dataset(
        catalog, cultures, figures, overrides, config.prune_max_mag, config.reconnection
    )


# ---------------------------------------------------------------------------
# Predictors
# ---------------------------------------------------------------------------


def figure_use(dataset: Dataset, figure: LineFigure) -> str:
    """Per-figure override first, then a single culture use, else uncategorized."""
    override = dataset.use_overrides.get(figure.key)
    if override is not None:
        return override.value
    uses = dataset.culture(figure.culture_id).uses
    if len(uses) == 1:
        return next(iter(uses)).value
    return UNCATEGORIZED


def predictor_labels(
    dataset: Dataset,
    predictor: Predictor,
    merge_greek_ancestry: bool = True,
) -> dict[str, str]:
    """Categorical label per figure key for one predictor."""
    labels: dict[str, str] = {}
    for fig in dataset.figures:
        record = dataset.culture(fig.culture_id)
        if predictor == Predictor.CULTURE:
            labels[fig.key] = record.culture_id
        elif predictor == Predictor.TRANSMISSION:
            labels[fig.key] = record.transmission.value
        elif predictor == Predictor.USE:
            labels[fig.key] = figure_use(dataset, fig)
        else:
            ancestry = record.ancestry
            if merge_greek_ancestry and ancestry == Ancestry.IAU_GREEK:
                ancestry = Ancestry.MESOPOTAMIAN
            labels[fig.key] = ancestry.value
    return labels
