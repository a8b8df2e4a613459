import io
import logging
from itertools import permutations

import pytest

from app.core.config_loader import load_pipeline_config
from app.core.errors import DataValidationError, EmptyFigureError
from app.models.pipeline import Reconnection
from app.models.skyculture import Ancestry, CultureRecord, Predictor, Transmission, Use
from app.services.skyculture import (
    build_dataset,
    figure_graph,
    load_dataset,
    parse_culture_metadata,
    parse_skyculture,
    parse_use_overrides,
    predictor_labels,
    prune_faint,
    serialize_culture_metadata,
    serialize_skyculture,
    serialize_use_overrides,
)
from app.services.spherical import angular_separation
from app.services.star_catalog import positions
from tests.conftest import DATA_DIR, make_catalog, make_figure

METADATA_HEADER = "culture_id,transmission,uses,ancestry\n"


def _fab(text: str, culture_id: str = "western", prefix: str = ""):
    return parse_skyculture(io.StringIO(text), culture_id, prefix, "test.fab")


def _meta(text: str):
    return parse_culture_metadata(io.StringIO(METADATA_HEADER + text), "cultures.csv")


# ---------------------------------------------------------------------------
# Line-figure files
# ---------------------------------------------------------------------------


def test_crown_chain_has_six_edges():
    [fig] = _fab("CrB 6 a b b c c d d e e f f g\n")
    assert len(fig.edges) == 6
    assert fig.stars == ("a", "b", "c", "d", "e", "f", "g")
    assert fig.key == "western/CrB"


def test_self_loop_is_rejected():
    with pytest.raises(DataValidationError, match="self-loop"):
        _fab("X 1 a a\n")


def test_duplicate_pair_collapses_with_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="skysig.skyculture"):
        [fig] = _fab("X 2 a b a b\n")
    assert fig.edges == (("a", "b"),)
    assert "duplicate line" in caplog.text


def test_reversed_pair_is_a_duplicate():
    [fig] = _fab("X 2 a b b a\n")
    assert fig.edges == (("a", "b"),)


@pytest.mark.parametrize(
    "line, message",
    [
        ("X 0\n", "zero lines"),
        ("X 2 a b c\n", "odd number"),
        ("X 3 a b c d\n", "declared 3"),
        ("X two a b\n", "not an integer"),
        ("X\n", "expected"),
    ],
)
def test_malformed_figure_lines(line, message):
    with pytest.raises(DataValidationError, match=message) as exc:
        _fab(line)
    assert exc.value.line == 1


def test_comments_and_blank_lines_are_skipped():
    figures = _fab("# header\n\nA 1 a b  # trailing\n\nB 1 c d\n")
    assert [f.figure_id for f in figures] == ["A", "B"]


def test_duplicate_figure_id():
    with pytest.raises(DataValidationError, match="duplicate figure id"):
        _fab("A 1 a b\nA 1 c d\n")


def test_numeric_ids_take_the_prefix():
    [fig] = _fab("Ori 1 27989 24436\n", prefix="HIP")
    assert fig.edges == (("HIP24436", "HIP27989"),)


def test_serialize_round_trip():
    figures = _fab("A 2 a b b c\nB 1 d e\n")
    assert _fab(serialize_skyculture(figures)) == figures


def test_sample_file_parses_against_bright_stars(bright_catalog):
    with (DATA_DIR / "western_sample.fab").open(encoding="utf-8") as fh:
        figures = parse_skyculture(fh, "western", "HIP", "western_sample.fab")
    assert [f.figure_id for f in figures] == ["Ori", "UMa", "CrB", "Cas"]
    for fig in figures:
        for star in fig.stars:
            assert star in bright_catalog


# ---------------------------------------------------------------------------
# Metadata and overrides
# ---------------------------------------------------------------------------


def test_metadata_tokens():
    babylonian, anutan = _meta("babylonian,w,re,M\nanutan,o,nv,P\n")
    assert babylonian == CultureRecord(
        culture_id="babylonian",
        transmission=Transmission.WRITTEN,
        uses=frozenset({Use.RELIGIOUS}),
        ancestry=Ancestry.MESOPOTAMIAN,
    )
    assert anutan.transmission == Transmission.ORAL
    assert anutan.uses == frozenset({Use.NAVIGATION})
    assert anutan.ancestry == Ancestry.POLYNESIAN


def test_unknown_transmission():
    with pytest.raises(DataValidationError, match="unknown transmission") as exc:
        _meta("x,q,re,M\n")
    assert exc.value.line == 2


def test_multiple_uses_and_uncategorized():
    multi, none = _meta('multi,w,"nv;re",C\nnone,o,uncategorized,-\n')
    assert multi.uses == frozenset({Use.NAVIGATION, Use.RELIGIOUS})
    assert none.uses == frozenset()
    assert none.ancestry == Ancestry.UNCATEGORIZED


def test_empty_uses_needs_explicit_marker():
    with pytest.raises(DataValidationError, match="uncategorized"):
        _meta("x,w,,M\n")


def test_ancestry_short_codes_are_case_sensitive():
    sami, inca, navajo, vedic, named = _meta(
        "sami,o,fo,Sa\ninca,o,re,sA\nnavajo,o,re,nA\nvedic,w,re,In\nnamed,w,re,S-AMERICAN\n"
    )
    assert sami.ancestry == Ancestry.SAMI
    assert inca.ancestry == Ancestry.S_AMERICAN
    assert navajo.ancestry == Ancestry.N_AMERICAN
    assert vedic.ancestry == Ancestry.INDIAN
    assert named.ancestry == Ancestry.S_AMERICAN


def test_ancestry_codes_in_the_wrong_case_are_rejected():
    with pytest.raises(DataValidationError, match="unknown ancestry"):
        _meta("x,w,re,SA\n")


def test_unknown_ancestry():
    with pytest.raises(DataValidationError, match="unknown ancestry"):
        _meta("x,w,re,Atlantean\n")


def test_duplicate_culture():
    with pytest.raises(DataValidationError, match="duplicate culture_id"):
        _meta("x,w,re,M\nx,o,re,M\n")


def test_metadata_serialization_round_trip():
    records = _meta('a,w,"nv;re",G\nb,o,uncategorized,sA\n')
    assert parse_culture_metadata(io.StringIO(serialize_culture_metadata(records))) == records


def test_overrides_parse_and_round_trip():
    overrides = parse_use_overrides(io.StringIO("figure_id,use\nwestern/Ori,po\nmaya/Turtle,fo\n"))
    assert overrides == {"western/Ori": Use.POLITICAL, "maya/Turtle": Use.FOLK}
    assert parse_use_overrides(io.StringIO(serialize_use_overrides(overrides))) == overrides


def test_override_unknown_use():
    with pytest.raises(DataValidationError, match="unknown use"):
        parse_use_overrides(io.StringIO("figure_id,use\nwestern/Ori,war\n"))


# ---------------------------------------------------------------------------
# Pruning
# ---------------------------------------------------------------------------


def _line_catalog(mags: dict[str, float], ras: dict[str, float]):
    return make_catalog({sid: (ras[sid], 0.0, mags[sid]) for sid in mags})


def test_prune_reconnects_neighbours():
    catalog = _line_catalog({"a": 1.0, "b": 7.5, "c": 2.0}, {"a": 10.0, "b": 12.0, "c": 14.0})
    fig = make_figure([("a", "b"), ("b", "c")])
    assert prune_faint(fig, catalog).edges == (("a", "c"),)


def test_prune_all_bright_returns_same_figure():
    catalog = _line_catalog({"a": 1.0, "b": 2.0}, {"a": 10.0, "b": 12.0})
    fig = make_figure([("a", "b")])
    assert prune_faint(fig, catalog) is fig


def test_prune_degree_three_builds_chain_through_middle():
    catalog = make_catalog(
        {"x": (20.0, 5.0, 8.0), "p": (10.0, 0.0, 1.0), "q": (20.0, 0.0, 1.0), "r": (30.0, 0.0, 1.0)}
    )
    fig = make_figure([("x", "p"), ("x", "q"), ("x", "r")])
    assert prune_faint(fig, catalog).edges == (("p", "q"), ("q", "r"))


def test_prune_chain_is_shortest_path_through_three_neighbours():
    catalog = make_catalog(
        {
            "hub": (50.0, 10.0, 9.0),
            "a": (47.0, 12.0, 2.0),
            "b": (53.5, 9.0, 2.0),
            "c": (49.0, 6.0, 2.0),
        }
    )
    fig = make_figure([("hub", "a"), ("hub", "b"), ("hub", "c")])
    pruned = prune_faint(fig, catalog)
    pos = positions(catalog, ["a", "b", "c"])

    def length(edges):
        return sum(angular_separation(pos[u], pos[v]) for u, v in edges)

    best = min(length(list(zip(order[:-1], order[1:]))) for order in permutations("abc"))
    assert length(pruned.edges) == pytest.approx(best, abs=1e-12)


def test_prune_star_to_nearest():
    catalog = make_catalog(
        {"x": (20.0, 5.0, 8.0), "p": (10.0, 0.0, 1.0), "q": (20.0, 4.0, 1.0), "r": (30.0, 0.0, 1.0)}
    )
    fig = make_figure([("x", "p"), ("x", "q"), ("x", "r")])
    assert prune_faint(fig, catalog, reconnection=Reconnection.STAR_TO_NEAREST).edges == (
        ("p", "q"),
        ("q", "r"),
    )


def test_prune_tendril_tip_is_dropped_without_links():
    catalog = _line_catalog({"a": 1.0, "b": 2.0, "c": 7.9}, {"a": 10.0, "b": 12.0, "c": 14.0})
    fig = make_figure([("a", "b"), ("b", "c")])
    assert prune_faint(fig, catalog).edges == (("a", "b"),)


def test_prune_is_idempotent():
    catalog = _line_catalog(
        {"a": 1.0, "b": 7.5, "c": 2.0, "d": 8.0, "e": 3.0},
        {"a": 10.0, "b": 12.0, "c": 14.0, "d": 16.0, "e": 18.0},
    )
    fig = make_figure([("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")])
    once = prune_faint(fig, catalog)
    assert once.edges == (("a", "c"), ("c", "e"))
    assert prune_faint(once, catalog) == once


def test_prune_to_nothing_raises():
    catalog = _line_catalog({"a": 1.0, "b": 7.5}, {"a": 10.0, "b": 12.0})
    with pytest.raises(EmptyFigureError):
        prune_faint(make_figure([("a", "b")]), catalog)


def test_figure_graph_nodes_are_incident_stars():
    graph = figure_graph(make_figure([("a", "b"), ("b", "c")]))
    assert sorted(graph.nodes) == ["a", "b", "c"]
    assert graph.number_of_edges() == 2


# ---------------------------------------------------------------------------
# Dataset assembly
# ---------------------------------------------------------------------------


def _small_world():
    catalog = _line_catalog(
        {"a": 1.0, "b": 2.0, "c": 3.0, "d": 7.5, "e": 8.0},
        {"a": 10.0, "b": 12.0, "c": 14.0, "d": 16.0, "e": 18.0},
    )
    cultures = _meta('west,w,"nv;re",G\neast,o,re,C\nghost,o,fo,P\n')
    figures = [
        make_figure([("a", "b")], "west", "One"),
        make_figure([("b", "c")], "west", "Two"),
        make_figure([("a", "c"), ("c", "d")], "east", "Three"),
        make_figure([("d", "e")], "east", "Faint"),
    ]
    return catalog, cultures, figures


def test_build_dataset_prunes_drops_and_excludes(caplog):
    catalog, cultures, figures = _small_world()
    with caplog.at_level(logging.WARNING, logger="skysig.skyculture"):
        dataset = build_dataset(catalog, cultures, figures, {"east/Faint": Use.FOLK})
    assert dataset.figure_keys == ("east/Three", "west/One", "west/Two")
    assert dataset.dropped == ("east/Faint",)
    assert dataset.pruned_stars == ("d", "e")
    assert [c.culture_id for c in dataset.cultures] == ["east", "west"]
    assert dataset.use_overrides == {}
    assert "ghost" in caplog.text


def test_build_dataset_unknown_star():
    catalog, cultures, _ = _small_world()
    with pytest.raises(DataValidationError, match="unknown star id"):
        build_dataset(catalog, cultures, [make_figure([("a", "zz")], "west", "Bad")])


def test_build_dataset_culture_without_metadata():
    catalog, cultures, _ = _small_world()
    with pytest.raises(DataValidationError, match="no metadata"):
        build_dataset(catalog, cultures, [make_figure([("a", "b")], "north", "X")])


def test_build_dataset_override_for_unknown_figure():
    catalog, cultures, figures = _small_world()
    with pytest.raises(DataValidationError, match="unknown figures"):
        build_dataset(catalog, cultures, figures, {"west/Nope": Use.FOLK})


def test_predictor_labels():
    catalog, cultures, figures = _small_world()
    dataset = build_dataset(catalog, cultures, figures, {"west/Two": Use.POLITICAL})

    assert predictor_labels(dataset, Predictor.CULTURE)["west/One"] == "west"
    assert predictor_labels(dataset, Predictor.TRANSMISSION)["east/Three"] == "oral"
    uses = predictor_labels(dataset, Predictor.USE)
    assert uses == {"east/Three": "religious", "west/One": "uncategorized", "west/Two": "political"}

    merged = predictor_labels(dataset, Predictor.ANCESTRY)
    assert merged["west/One"] == Ancestry.MESOPOTAMIAN.value
    separate = predictor_labels(dataset, Predictor.ANCESTRY, merge_greek_ancestry=False)
    assert separate["west/One"] == Ancestry.IAU_GREEK.value
    assert separate["east/Three"] == Ancestry.CHINESE.value


def test_load_dataset_from_synthetic_sky(synthetic_sky, caplog):
    config = load_pipeline_config(synthetic_sky.config_path)
    with caplog.at_level(logging.WARNING, logger="skysig.skyculture"):
        dataset = load_dataset(config)
    assert {c.culture_id for c in dataset.cultures} == set(synthetic_sky.culture_ids)
    assert "zzghost" in caplog.text
    assert len(dataset.figures) + len(dataset.dropped) == len(synthetic_sky.figure_keys)
    assert all(dataset.catalog.get(s).mag <= 7.0 for fig in dataset.figures for s in fig.stars)
    assert list(dataset.figure_keys) == sorted(dataset.figure_keys)


def test_load_dataset_missing_catalog(synthetic_sky):
    (synthetic_sky.root / "catalog.csv").unlink()
    with pytest.raises(DataValidationError, match="catalog file not found"):
        load_dataset(load_pipeline_config(synthetic_sky.config_path))
