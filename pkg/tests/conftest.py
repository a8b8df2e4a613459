"""
Shared fixtures: the bright-star sample shipped in tests/data and a seeded
synthetic sky (catalog, several cultures, metadata, overrides, config file).
"""

import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pytest
from faker import Faker

from app.core.config import get_settings
from app.models.catalog import Star, StarCatalog
from app.models.skyculture import LineFigure, normalize_edge
from app.services.spherical import to_unit_vector
from app.services.star_catalog import parse_catalog

DATA_DIR = Path(__file__).resolve().parent / "data"

ANCESTRY_CYCLE = ("G", "M", "C", "P", "sA")
USE_CYCLE = ("re", "nv", "po", "fo")
FAINT_MAG = 7.6


@dataclass
class SyntheticSky:
    root: Path
    config_path: Path
    culture_ids: list[str]
    figure_keys: list[str]


def make_catalog(stars: dict[str, tuple[float, float, float]]) -> StarCatalog:
    """Catalog from ``{id: (ra, dec, mag)}``."""
    return StarCatalog({sid: Star(id=sid, ra=ra, dec=dec, mag=mag) for sid, (ra, dec, mag) in stars.items()})


def make_figure(edges, culture_id: str = "test", figure_id: str = "F") -> LineFigure:
    return LineFigure(
        culture_id=culture_id,
        figure_id=figure_id,
        edges=tuple(sorted({normalize_edge(a, b) for a, b in edges})),
    )


def _shape_edges(kind: int, members: list[int]) -> list[tuple[int, int]]:
    if kind == 0:
        return [(members[0], members[1])]
    if kind == 1:
        return list(zip(members[:-1], members[1:]))
    if kind == 2:
        return list(zip(members, members[1:] + members[:1]))
    if kind == 3:
        return [(members[0], m) for m in members[1:]]
    a, b, c, d = members[:4]
    return [(a, b), (b, c), (c, a), (c, d)]


def write_sky(
    root: Path,
    n_cultures: int = 4,
    figures_per_culture: int = 8,
    seed: int = 7,
    extra_config: Optional[dict[str, str]] = None,
) -> SyntheticSky:
    """Write a reproducible sky: 150 stars, every 25th one faint, and local line figures."""
    rng = np.random.default_rng(seed)
    fake = Faker()
    fake.seed_instance(seed)

    n_stars = 150
    ra = rng.uniform(20.0, 140.0, n_stars)
    dec = rng.uniform(-30.0, 40.0, n_stars)
    mag = rng.uniform(0.0, 6.5, n_stars)
    mag[::25] = FAINT_MAG
    numbers = [1000 + i for i in range(n_stars)]
    vectors = np.array([to_unit_vector(r, d).as_tuple() for r, d in zip(ra, dec)])

    root.mkdir(parents=True, exist_ok=True)
    lines = ["id,ra_deg,dec_deg,mag"]
    lines += [f"HIP{num},{float(r)!r},{float(d)!r},{float(m)!r}" for num, r, d, m in zip(numbers, ra, dec, mag)]
    (root / "catalog.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # Shared centres so several figures overlap on the same root stars
    hubs = rng.choice(n_stars, size=10, replace=False)
    sky_dir = root / "skycultures"
    sky_dir.mkdir(exist_ok=True)

    culture_ids: list[str] = []
    keys: list[str] = []
    used_names: set[str] = set()
    for c in range(n_cultures):
        name = re.sub(r"[^a-z]", "", fake.word().lower()) or "culture"
        while name in used_names:
            name += "x"
        used_names.add(name)
        culture_id = f"{c:02d}{name}"
        culture_ids.append(culture_id)

        fab = [f"# {fake.sentence()}"]
        for f in range(figures_per_culture):
            hub = int(hubs[rng.integers(len(hubs))])
            order = np.argsort(-(vectors @ vectors[hub]), kind="stable")
            kind = (c + f) % 5
            size = {0: 2, 1: 4, 2: 4, 3: 4, 4: 4}[kind] + int(rng.integers(0, 2))
            members = [int(i) for i in order[:size]]
            edges = _shape_edges(kind, members)
            flat = " ".join(f"{numbers[a]} {numbers[b]}" for a, b in edges)
            figure_id = f"F{f:02d}"
            fab.append(f"{figure_id} {len(edges)} {flat}")
            keys.append(f"{culture_id}/{figure_id}")
        (sky_dir / f"{culture_id}.fab").write_text("\n".join(fab) + "\n", encoding="utf-8")

    meta = ["culture_id,transmission,uses,ancestry,name"]
    for c, culture_id in enumerate(culture_ids):
        uses = "nv;re" if c == 0 else USE_CYCLE[c % len(USE_CYCLE)]
        transmission = "w" if c % 2 == 0 else "o"
        meta.append(f"{culture_id},{transmission},{uses},{ANCESTRY_CYCLE[c % len(ANCESTRY_CYCLE)]},{fake.city()}")
    meta.append("zzghost,o,fo,P,Ghost")
    (root / "cultures.csv").write_text("\n".join(meta) + "\n", encoding="utf-8")

    (root / "overrides.csv").write_text(f"figure_id,use\n{keys[0]},po\n", encoding="utf-8")

    config = {
        "catalog": "catalog.csv",
        "skycultures_dir": "skycultures",
        "metadata": "cultures.csv",
        "overrides": "overrides.csv",
        "output_dir": "out",
        "star_id_prefix": "HIP",
        "tsne.perplexity": "5",
        "tsne.iterations": "300",
        "tsne.exaggeration_iterations": "100",
        "tsne.restarts": "2",
        "trust_k": "5",
        "region_min_count": "2",
        "similarity_threshold": "auto",
    }
    config.update(extra_config or {})
    text = "# synthetic sky\n" + "".join(f"{k} = {v}\n" for k, v in config.items())
    config_path = root / "pipeline.conf"
    config_path.write_text(text, encoding="utf-8")
    return SyntheticSky(root=root, config_path=config_path, culture_ids=culture_ids, figure_keys=keys)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in list(os.environ):
        if name.startswith("SKYSIG_"):
            monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def bright_catalog() -> StarCatalog:
    with (DATA_DIR / "bright_stars.csv").open(encoding="utf-8", newline="") as fh:
        return parse_catalog(fh, "bright_stars.csv")


@pytest.fixture
def synthetic_sky(tmp_path) -> SyntheticSky:
    return write_sky(tmp_path / "sky")
