import random
from fractions import Fraction

import pytest

from ptasynth.cartography import (
    BAD,
    GOOD,
    RANDOM,
    ActionPrecedes,
    ForbiddenLocations,
    Tiling,
    bc,
    classify,
    coverage_stats,
    covered,
    grid_points,
    integer_points,
)
from ptasynth.errors import UsageError
from ptasynth.linarith import sample_point
from ptasynth.model import RectangleV0, instantiate
from ptasynth.parser import parse_constraint, parse_model, parse_v0
from ptasynth.reachability import reachable, trace_set

from conftest import MODELS

V0 = RectangleV0(((Fraction(0), Fraction(2)), (Fraction(0), Fraction(2))))


@pytest.fixture
def toy_tiling(toy):
    return bc(toy, V0)


def by_constraint(tiling, net, text):
    want = parse_constraint(text, net.registry)
    (tile,) = [t for t in tiling.tiles if t.constraint == want]
    return tile


def test_toy_tiles(toy, toy_tiling):
    assert len(toy_tiling) == 2
    lt = by_constraint(toy_tiling, toy, "0 <= p1 & p1 < p2")
    ge = by_constraint(toy_tiling, toy, "0 <= p1 & p2 <= p1")
    assert lt.witness == (0, 1) and ge.witness == (0, 0)
    # witnesses are taken in lexicographic order
    assert [t.witness for t in toy_tiling] == [(0, 0), (0, 1)]
    inside = {p for p in integer_points(V0) if lt.contains(p)}
    assert inside == {(0, 1), (0, 2), (1, 2)}


def test_covered(toy_tiling):
    assert covered((1, 2), toy_tiling)
    assert not covered((-1, 0), toy_tiling)
    assert not covered((1, 2), Tiling([], V0))


def test_coverage(toy_tiling):
    one = coverage_stats(toy_tiling, V0, 1)
    assert (one.integer_covered, one.integer_total) == (9, 9)
    two = coverage_stats(toy_tiling, V0, 2)
    assert (two.grid_covered, two.grid_total) == (25, 25)
    empty = coverage_stats(Tiling([], V0), V0, 2)
    assert empty.integer_covered == 0 and empty.grid_covered == 0


def test_grid_points_counts():
    assert len(list(grid_points(V0, 3))) == 49
    with pytest.raises(UsageError):
        list(grid_points(V0, 0))


def test_classify_forbidden(toy, toy_tiling):
    good, bad = classify(toy_tiling, ForbiddenLocations(frozenset({"q2"})), toy)
    assert [t.constraint for t in good] == [by_constraint(toy_tiling, toy, "0 <= p1 & p1 < p2").constraint]
    assert [t.constraint for t in bad] == [by_constraint(toy_tiling, toy, "0 <= p1 & p2 <= p1").constraint]
    assert {t.verdict for t in toy_tiling} == {GOOD, BAD}
    good, bad = classify(toy_tiling, ForbiddenLocations(frozenset()))
    assert len(good) == 2 and bad == []
    good, _ = classify(toy_tiling, ForbiddenLocations(frozenset({"toy.q2"})))
    assert len(good) == 1


def test_classify_precedence(toy, toy_tiling):
    good, bad = classify(toy_tiling, ActionPrecedes("a", "b"), toy)
    assert [t.witness for t in good] == [(0, 1)]
    assert [t.witness for t in bad] == [(0, 0)]


def test_unknown_names(toy, toy_tiling):
    with pytest.raises(UsageError):
        classify(toy_tiling, ForbiddenLocations(frozenset({"q9"})), toy)
    with pytest.raises(UsageError):
        classify(toy_tiling, ActionPrecedes("a", "zz"), toy)


def test_random_mode_single_sample(toy):
    tiling = bc(toy, V0, RANDOM, samples=1, seed=4)
    assert len(tiling) == 1
    assert tiling.tiles[0].contains(tiling.tiles[0].witness)


def test_random_mode_reproducible(toy):
    a = bc(toy, V0, RANDOM, samples=5, seed=11)
    b = bc(toy, V0, RANDOM, samples=5, seed=11)
    assert [(t.witness, t.constraint) for t in a] == [(t.witness, t.constraint) for t in b]


def test_one_tile_when_behaviour_is_uniform():
    net = parse_model("""
var x: clock; p: parameter;
automaton a synclabs: t; loc l0: while x <= 2 do when x >= 1 sync t goto l1; loc l1: while True do end
init := loc[a] = l0 & x = 0;
""")
    tiling = bc(net, RectangleV0(((Fraction(0), Fraction(5)),)))
    assert len(tiling) == 1
    assert coverage_stats(tiling).integer_covered == 6


def test_full_mode_deterministic(toy):
    a, b = bc(toy, V0), bc(toy, V0)
    assert [(t.witness, t.constraint, t.traces) for t in a] == [(t.witness, t.constraint, t.traces) for t in b]


def test_dimension_mismatch(toy):
    with pytest.raises(UsageError):
        bc(toy, RectangleV0(((Fraction(0), Fraction(1)),)))


def test_limits_mark_points_uncovered():
    net = parse_model("""
var x: clock; p: parameter;
automaton a synclabs: t; loc l0: while x <= p do when x = p sync t do {x' = 0} goto l0; end
init := loc[a] = l0 & x = 0;
""")
    tiling = bc(net, RectangleV0(((Fraction(1), Fraction(2)),)), depth_limit=1, acyclic=True)
    assert tiling.tiles == []
    assert [reason for _, reason in tiling.failures] == ["depth limit", "depth limit"]


def test_tile_honesty_sr_latch():
    net = parse_model((MODELS / "sr_latch.imi").read_text())
    v0 = parse_v0((MODELS / "sr_latch.v0").read_text(), net)
    tiling = bc(net, v0)
    report = coverage_stats(tiling, v0, 2)
    assert report.integer_covered == report.integer_total == 16
    rng = random.Random(7)
    for tile in tiling:
        ref = trace_set(reachable(instantiate(net, tile.witness)))
        assert tile.traces.same_graph(ref)
        for _ in range(3):
            pi = sample_point(tile.constraint, rng)[len(net.registry.clocks):]
            assert trace_set(reachable(instantiate(net, pi))).same_graph(ref)
