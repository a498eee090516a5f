import math
from fractions import Fraction

import pytest

from cayleywalk.cayley import Ball
from cayleywalk.errors import InsufficientRadiusError, PathDependenceError, ValidationError, WordError
from cayleywalk.heightfn import (
    OBSTRUCTION_ABELIANIZATION,
    OBSTRUCTION_TORSION,
    VERDICT_EXISTS,
    VERDICT_NONE,
    HeightAssignment,
    bridge_predicate,
    constraint_rows,
    exgcd,
    integer_nullspace,
    is_harmonic,
    solve_group_height_function,
    verify_graph_height_function,
    vertex_heights,
)
from cayleywalk.oracles import presentation_for


def test_exgcd_is_unimodular():
    for a, b in [(12, 18), (-4, 6), (7, 0), (0, 5), (35, -14)]:
        M = exgcd(a, b)
        g, zero = M.dot([a, b])
        assert zero == 0
        assert abs(g) == math.gcd(a, b)
        assert M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0] in (1, -1)


def test_integer_nullspace():
    assert integer_nullspace([[1, 1, 0]], 3) == [[1, -1, 0], [0, 0, 1]]
    assert integer_nullspace([[2, 4]], 2) == [[2, -1]]
    assert integer_nullspace([[1, 0], [0, 1]], 2) == []
    assert integer_nullspace([[0, 0]], 2) == [[1, 0], [0, 1]]


def test_constraint_rows_pin_involutions():
    rows = constraint_rows(presentation_for("tree:3"))
    assert rows == [[2, 0, 0], [0, 2, 0], [0, 0, 2]]


@pytest.mark.parametrize("name,rank,witness", [
    ("z2", 2, {"x": 1, "y": 0}),
    ("bs12", 1, {"x": 1, "y": 0}),
    ("grig-hnn", 1, {"a": 0, "c": 0, "d": 0, "t": 1}),
])
def test_height_function_exists(name, rank, witness):
    cert = solve_group_height_function(presentation_for(name))
    assert cert.verdict == VERDICT_EXISTS
    assert cert.rank == rank
    assert cert.witness.as_dict() == witness
    assert cert.to_dict()["definitive"]


@pytest.mark.parametrize("name,obstruction", [
    ("higman", OBSTRUCTION_ABELIANIZATION),
    ("higman-variant", OBSTRUCTION_ABELIANIZATION),
    ("tree:3", OBSTRUCTION_TORSION),
    ("grigorchuk", OBSTRUCTION_TORSION),
])
def test_height_function_absent(name, obstruction):
    cert = solve_group_height_function(presentation_for(name))
    assert cert.verdict == VERDICT_NONE
    assert cert.obstruction == obstruction
    assert cert.witness is None
    assert cert.to_dict()["definitive"]


def test_z2_basis_is_identity():
    assert solve_group_height_function(presentation_for("z2")).basis == [[1, 0], [0, 1]]


def test_height_assignment_parsing():
    p = presentation_for("z2")
    h = HeightAssignment.parse(p, "x=1, y=-2")
    assert h.as_dict() == {"x": 1, "y": -2}
    assert h.word_height(p.parse_word("x x y^-1")) == 4
    assert HeightAssignment.parse(p, "").is_zero
    with pytest.raises(WordError):
        HeightAssignment.parse(p, "x")
    with pytest.raises(WordError):
        HeightAssignment.parse(p, "x=q")
    with pytest.raises(WordError):
        HeightAssignment.parse(p, "q=1")


def test_involution_heights():
    p = presentation_for("tree:3")
    assert HeightAssignment.parse(p, "a=1").is_zero
    with pytest.raises(ValidationError):
        HeightAssignment.parse(p, "a=1", strict=True)


def test_vertex_heights_are_path_independent(z2_ball, bs12_ball):
    z2h = HeightAssignment.parse(z2_ball.oracle.presentation, "x=1,y=0")
    heights = vertex_heights(z2_ball, z2h)
    assert heights[0] == 0
    assert max(heights) == 12
    bad = HeightAssignment.parse(bs12_ball.oracle.presentation, "y=1")
    with pytest.raises(PathDependenceError):
        vertex_heights(bs12_ball, bad)


@pytest.mark.parametrize("ball_name,spec", [("z2_ball", "x=1"), ("bs12_ball", "x=1")])
def test_graph_height_axioms(request, ball_name, spec):
    b = request.getfixturevalue(ball_name)
    p = b.oracle.presentation
    h = HeightAssignment.parse(p, spec)
    report = verify_graph_height_function(b, h, [p.parse_word("x"), p.parse_word("y")])
    assert report.all_passed
    assert report.interior_vertices > 0
    assert set(report.difference_invariant) == {"x", "y"}


def test_zero_height_fails_up_down(z2_ball):
    h = HeightAssignment.parse(z2_ball.oracle.presentation, "")
    report = verify_graph_height_function(z2_ball, h)
    assert not report.up_down
    assert not report.all_passed


def test_harmonic(z2_ball):
    p = z2_ball.oracle.presentation
    assert is_harmonic(z2_ball, HeightAssignment.parse(p, "x=1,y=2")).harmonic


def test_harmonic_deviation_on_path():
    path = Ball.from_adjacency([[1], [0, 2], [1]])
    report = is_harmonic(path, [0, 1, 5])
    assert not report.harmonic
    assert report.max_deviation == Fraction(3, 2)
    assert report.worst_vertex == 1
    with pytest.raises(ValidationError):
        is_harmonic(path, [0, 1])


def test_harmonic_needs_radius():
    with pytest.raises(InsufficientRadiusError):
        is_harmonic(Ball.from_adjacency([[1], [0]]), [0, 1])


def test_bridge_predicate(z2_ball):
    p = z2_ball.oracle.presentation
    h = HeightAssignment.parse(p, "x=1")
    assert bridge_predicate(z2_ball, z2_ball.walk(p.parse_word("x y x")), h)
    assert not bridge_predicate(z2_ball, z2_ball.walk(p.parse_word("y x")), h)
    assert not bridge_predicate(z2_ball, z2_ball.walk(p.parse_word("x y^-1 x^-1")), h)
    assert bridge_predicate(z2_ball, [0], h)
