import math

import pytest

from cayleywalk.cayley import Ball, build_ball
from cayleywalk.errors import (
    InsufficientHeadroomError,
    InsufficientRadiusError,
    InvalidParameterError,
    NotExtendableError,
    ValidationError,
)
from cayleywalk.heightfn import HeightAssignment
from cayleywalk.saw import (
    DEAD,
    EXTENDABLE,
    check_subadditivity,
    check_supermultiplicativity,
    classify_saw_edges,
    count_bridges,
    count_extendable_saws,
    count_saws,
    extendable,
    iter_saws,
    mu_lower_bounds_from_bridges,
    mu_upper_bounds,
    naive_saw_counts,
)
from cayleywalk.spectral import lambda_tree

Z2_SIGMA = [1, 4, 12, 36, 100, 284, 780, 2172, 5916, 16268, 44100, 120292, 324932]


@pytest.fixture
def dead_end():
    # 0 - 1 - 2 is a dead end, 0 - 3 - 4 - 5 reaches distance 3
    return Ball.from_adjacency([[1, 3], [0, 2], [1], [0, 4], [3, 5], [4]])


def test_square_lattice_counts(z2_ball):
    report = count_saws(z2_ball, 12)
    assert report.counts == Z2_SIGMA
    assert report.to_dict()["sigma"][12] == "324932"
    assert math.isclose(report.fekete[-1], 324932 ** (1 / 12))


def test_counts_do_not_depend_on_workers(z2_ball):
    single = count_saws(z2_ball, 9, workers=1, prefix_depth=2)
    pooled = count_saws(z2_ball, 9, workers=2, prefix_depth=4)
    assert single.counts == pooled.counts == Z2_SIGMA[:10]


@pytest.mark.parametrize("prefix_depth", [0, 1, 5, 20])
def test_prefix_depth_edge_cases(z2_ball, prefix_depth):
    assert count_saws(z2_ball, 5, prefix_depth=prefix_depth).counts == Z2_SIGMA[:6]


def test_tree_counts(tree3_ball):
    counts = count_saws(tree3_ball, 12).counts
    assert counts[0] == 1
    assert all(counts[n] == 3 * 2 ** (n - 1) for n in range(1, 13))


def test_ball_counts_match_naive_enumeration(z2, bs12, grig):
    for o in (z2, bs12, grig):
        assert count_saws(build_ball(o, 6), 6).counts == naive_saw_counts(o, 6)


def test_count_needs_radius(z2):
    with pytest.raises(InsufficientRadiusError):
        count_saws(build_ball(z2, 3), 4)
    with pytest.raises(InvalidParameterError):
        count_saws(build_ball(z2, 3), -1)


def test_iter_saws(z2_ball):
    walks = list(iter_saws(z2_ball, 3))
    assert len(walks) == 36
    assert all(len(set(w)) == 4 for w in walks)
    assert list(iter_saws(z2_ball, 0)) == [(0,)]


def test_csv_rows(z2_ball):
    rows = count_saws(z2_ball, 3).csv_rows()
    assert rows[0] == [0, 1, "", ""]
    assert rows[1][:3] == [1, 4, ""]
    assert rows[1][3] == pytest.approx(4.0)


def test_bridges_on_square_lattice(z2_ball):
    h = HeightAssignment.parse(z2_ball.oracle.presentation, "x=1")
    betas = count_bridges(z2_ball, h, 10)
    assert betas[:3] == [1, 1, 3]
    assert all(b <= s for b, s in zip(betas, Z2_SIGMA))
    assert check_supermultiplicativity(betas) == []
    assert count_bridges(z2_ball, h, 10, workers=2, prefix_depth=3) == betas


def test_bridges_on_bs12(bs12_ball):
    h = HeightAssignment.parse(bs12_ball.oracle.presentation, "x=1")
    betas = count_bridges(bs12_ball, h, 6)
    assert betas[0] == 1
    assert betas[1] == 1
    assert check_supermultiplicativity(betas) == []


def test_mu_bounds(z2_ball):
    report = count_saws(z2_ball, 12)
    bounds = mu_upper_bounds(report)
    assert bounds.best == min(report.fekete)
    assert bounds.running_min == sorted(bounds.running_min, reverse=True)
    assert bounds.best < 2.9
    assert check_subadditivity(report.counts) == []
    with pytest.raises(InvalidParameterError):
        mu_upper_bounds(count_saws(z2_ball, 0))


def test_bridge_lower_bounds_stay_below_fekete(z2_ball):
    h = HeightAssignment.parse(z2_ball.oracle.presentation, "x=1")
    lower = mu_lower_bounds_from_bridges(count_bridges(z2_ball, h, 10))
    upper = count_saws(z2_ball, 10).fekete
    assert all(lo <= up for lo, up in zip(lower, upper))
    assert max(lower) > 2.0


def test_violations_are_reported():
    assert check_subadditivity([1, 2, 5]) == [(1, 1)]
    assert check_supermultiplicativity([1, 2, 3]) == [(1, 1)]


def test_extendability_on_dead_end(dead_end):
    assert extendable(dead_end, [0, 1], 2).status == DEAD
    result = extendable(dead_end, [0, 3], 2)
    assert result.status == EXTENDABLE
    assert result.witness == [4, 5]
    assert extendable(dead_end, [0, 1], 2, slack=1).status == EXTENDABLE


def test_extendability_preconditions(dead_end):
    with pytest.raises(InsufficientHeadroomError):
        extendable(dead_end, [0, 3], 3)
    with pytest.raises(ValidationError):
        extendable(dead_end, [1, 0], 1)
    with pytest.raises(ValidationError):
        extendable(dead_end, [0, 2], 1)
    with pytest.raises(InvalidParameterError):
        extendable(dead_end, [0], -1)


def test_every_tree_saw_is_extendable(tree3):
    tally = count_extendable_saws(build_ball(tree3, 7), 4, 3)
    assert tally[EXTENDABLE] == tally["total"] == 24
    assert tally[DEAD] == 0


def test_tree_edge_colouring(tree3):
    b = build_ball(tree3, 7)
    path = b.walk(tree3.presentation.parse_word("a b a b"))
    colouring = classify_saw_edges(b, path, 2, lam=float(lambda_tree(3).value))
    assert colouring.blue == 4
    assert colouring.red == 0
    assert colouring.total == colouring.expected_total == 4
    assert colouring.lemma_holds
    assert colouring.lemma_bound == pytest.approx(1.686, abs=1e-3)


def _extendable_paths(b, steps, K):
    return [list(p) for p in iter_saws(b, steps) if extendable(b, p, K).status == EXTENDABLE]


@pytest.mark.parametrize("steps", [2, 4, 6])
def test_square_lattice_colouring_totals(z2, steps):
    b = build_ball(z2, 9)
    for path in _extendable_paths(b, steps, 2):
        colouring = classify_saw_edges(b, path, 2)
        assert colouring.unknown == 0
        assert colouring.blue + colouring.red == 2 * steps


def test_square_lattice_colouring_every_eight_step_walk(z2):
    b = build_ball(z2, 11)
    paths = _extendable_paths(b, 8, 2)
    assert 0 < len(paths) <= 5916
    for path in paths:
        colouring = classify_saw_edges(b, path, 2)
        assert colouring.unknown == 0
        assert colouring.blue + colouring.red == colouring.expected_total == 16


def test_colouring_preconditions(z2, dead_end):
    with pytest.raises(InvalidParameterError):
        classify_saw_edges(dead_end, [0, 3], 0)
    with pytest.raises(NotExtendableError):
        classify_saw_edges(dead_end, [0, 1, 2], 1)
    b = build_ball(z2, 5)
    path = b.walk(z2.presentation.parse_word("x x"))
    with pytest.raises(InsufficientHeadroomError):
        classify_saw_edges(b, path, 3)
    with pytest.raises(ValidationError):
        classify_saw_edges(b, path, 2, mid_edge=path[1])
