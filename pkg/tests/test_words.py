import numpy as np
import pytest

from cayleywalk.errors import PresentationSyntaxError, WordError
from cayleywalk.oracles import presentation_for
from cayleywalk.words import GenWord, exponent_vector, free_reduce, grig_substitute, parse_presentation


def test_parse_commutator_presentation():
    p = parse_presentation("gens x y\nrel x y x^-1 y^-1\n", "z2")
    assert p.generator_names == ["x", "y"]
    assert p.rank == 2
    assert p.degree == 4
    assert len(p.relators) == 1
    assert p.format_word(p.relators[0]) == "x y x^-1 y^-1"


def test_involutions_and_powers():
    p = parse_presentation("# dihedral\ngens a b\ninv a b\nrel (a b)^3\n")
    assert p.degree == 2
    assert len(p.relators[0]) == 6
    assert p.parse_word("a a").is_empty
    assert p.parse_word("(a b)^2 b") == p.parse_word("a b a")


def test_free_reduction():
    p = parse_presentation("gens x y")
    assert p.parse_word("x x^-1 y") == GenWord(((1, 1),))
    assert free_reduce(["x", "y", "y^-1", "x^-1"], p).is_empty
    w = p.parse_word("x y^-1 x")
    assert p.multiply(w, p.inverse(w)).is_empty
    assert p.power(w, -1) == p.inverse(w)
    assert len(p.power(w, 3)) == 9


def test_exponent_vector():
    p = parse_presentation("gens x y z")
    assert exponent_vector(p.parse_word("x y x y^-1 y^-1 z"), p).tolist() == [2, -1, 1]
    assert np.all(exponent_vector(GenWord(), p) == 0)


def test_syntax_error_reports_position():
    with pytest.raises(PresentationSyntaxError) as exc:
        parse_presentation("gens x\nrel x z")
    assert exc.value.line == 2
    assert exc.value.column == 7


@pytest.mark.parametrize("text", [
    "gens x\nrel (x",
    "gens x\nrel x)",
    "gens x\nrel (x)",
    "gens x\nrel ()^2",
    "gens a\ninv a\nrel a^-1 a^-1",
    "gens x x",
    "gens x\nfoo x",
    "rel x",
    "gens x\nrel (x)^0",
    "gens x\nfamily nosuch",
])
def test_malformed_presentations(text):
    with pytest.raises(PresentationSyntaxError):
        parse_presentation(text)


def test_empty_relator_is_skipped():
    p = parse_presentation("gens x y\nrel x x^-1\nrel x y x^-1 y^-1")
    assert len(p.relators) == 1


def test_unknown_generator_in_word():
    p = parse_presentation("gens x")
    with pytest.raises(WordError):
        p.index_of("q")
    with pytest.raises(PresentationSyntaxError):
        p.parse_word("q")


def test_digest_tracks_content():
    a = parse_presentation("gens x y\nrel x y x^-1 y^-1", "one")
    b = parse_presentation("gens x y\nrel x y x^-1 y^-1", "two")
    c = parse_presentation("gens x y\nrel x y x y", "one")
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert a.summary()["digest"] == a.digest()


def test_serialize_round_trips():
    p = presentation_for("grig-hnn")
    again = parse_presentation(p.serialize())
    assert again == p


def test_grigorchuk_family_members():
    p = presentation_for("grigorchuk")
    first, second = p.family_members(0)
    # d = bc doubles every d
    assert len(first) == 12
    assert len(second) == 28
    assert len(p.family_relators(2)) == 6
    assert len(p.all_relators(1)) == 1 + 4


def test_grig_substitution():
    p = presentation_for("grigorchuk")
    assert grig_substitute(p.parse_word("b"), 1, p) == p.parse_word("b c")
    assert grig_substitute(p.parse_word("c"), 1, p) == p.parse_word("b")
    assert grig_substitute(p.parse_word("a"), 1, p) == p.parse_word("a c a")
    assert grig_substitute(p.parse_word("b"), 0, p) == p.parse_word("b")


def _random_letters(rng, rank, length):
    return [(rng.randrange(rank), rng.choice((1, -1))) for _ in range(length)]


def test_free_reduce_is_idempotent(rng):
    p = parse_presentation("gens x y z\n")
    for _ in range(200):
        raw = _random_letters(rng, p.rank, rng.randint(0, 64))
        reduced = free_reduce(raw, p)
        assert free_reduce(reduced, p) == reduced
        letters = reduced.letters
        assert all(not (u[0] == v[0] and u[1] == -v[1]) for u, v in zip(letters, letters[1:]))
        assert p.multiply(reduced, p.inverse(reduced)).is_empty


def test_free_reduce_with_involutions_is_idempotent(rng):
    p = parse_presentation("gens a b c\ninv a b c\n")
    for _ in range(100):
        raw = [(rng.randrange(3), 1) for _ in range(rng.randint(0, 64))]
        reduced = free_reduce(raw, p)
        assert free_reduce(reduced, p) == reduced
        assert all(u != v for u, v in zip(reduced.letters, reduced.letters[1:]))


def test_exponent_vector_is_additive(rng):
    p = parse_presentation("gens x y z\n")
    for _ in range(100):
        u = free_reduce(_random_letters(rng, p.rank, rng.randint(0, 20)), p)
        v = free_reduce(_random_letters(rng, p.rank, rng.randint(0, 20)), p)
        assert np.array_equal(exponent_vector(p.multiply(u, v), p),
                              exponent_vector(u, p) + exponent_vector(v, p))
        assert np.array_equal(exponent_vector(p.inverse(u), p), -exponent_vector(u, p))


def test_grig_substitution_powers_compose(rng):
    p = parse_presentation("gens a b c d\ninv a b c d\n", "abcd")
    assert grig_substitute(p.parse_word("a d"), 1, p) == p.parse_word("a c a c")
    for _ in range(30):
        w = free_reduce([(rng.randrange(4), 1) for _ in range(rng.randint(1, 8))], p)
        for j in range(3):
            for k in range(3):
                assert grig_substitute(grig_substitute(w, k, p), j, p) == grig_substitute(w, j + k, p)
