import numpy as np
import pytest

from cayleywalk.cayley import build_ball
from cayleywalk.errors import InvalidParameterError, WordError
from cayleywalk.grigorchuk import (
    ACTION_CACHE_SIZE,
    CACHED_ACTION_DEPTH,
    _cached_leaf_permutation,
    grig_append,
    grig_is_identity,
    grig_portrait_key,
    grig_reduce,
    grig_search_badcycles,
    grig_sections,
    grig_tree_action,
)
from cayleywalk.oracles import order_of_element


def test_reduce_merges_klein_letters():
    assert grig_reduce("bc") == "d"
    assert grig_reduce("bcd") == ""
    assert grig_reduce("abba") == ""
    assert grig_reduce("abca") == "ada"
    assert grig_append("ab", "c") == "ad"
    assert grig_append("ab", "b") == "a"
    assert grig_append("", "a") == "a"


def test_reduce_rejects_foreign_letters():
    with pytest.raises(WordError):
        grig_reduce("abx")
    with pytest.raises(WordError):
        grig_append("a", "e")


def test_sections():
    assert grig_sections("b") == (0, "a", "c")
    assert grig_sections("d") == (0, "", "b")
    assert grig_sections("a") == (1, "", "")
    # after an odd number of a letters the sections swap
    assert grig_sections("ab") == (1, "c", "a")


@pytest.mark.parametrize("word", [
    "", "aa", "bb", "bcd", "adadadad", "acacacacacacacac", "acab" * 8, "ab" * 16,
    "abcacac" * 4,
])
def test_known_relations(word):
    assert grig_is_identity(word)


@pytest.mark.parametrize("word", ["a", "b", "ab" * 8, "ac" * 4, "ad", "abab"])
def test_non_identities(word):
    assert not grig_is_identity(word)


def test_portrait_keys_separate_elements():
    assert grig_portrait_key("") == "e"
    assert grig_portrait_key("b") == "b"
    assert grig_portrait_key(grig_reduce("adad" * 2)) == "e"
    assert grig_portrait_key("ab") != grig_portrait_key("ba")
    assert grig_portrait_key(grig_reduce("ab" * 16)) == "e"


def test_tree_action_of_a_swaps_halves():
    action = grig_tree_action("a", 3)
    assert action.permutation.tolist() == [4, 5, 6, 7, 0, 1, 2, 3]
    assert action.apply("010") == "110"
    assert action.is_tree_automorphism()


def test_tree_action_of_b():
    assert grig_tree_action("b", 2).permutation.tolist() == [1, 0, 2, 3]
    assert grig_tree_action("c", 1).is_identity()


def test_tree_action_composes_left_to_right():
    ab = grig_tree_action("ab", 4)
    assert grig_tree_action("a", 4).compose(grig_tree_action("b", 4)) == ab
    assert grig_tree_action("bcd", 5).is_identity()
    assert not grig_tree_action("ad", 5).is_identity()


def test_tree_action_agrees_with_word_problem(rng):
    for _ in range(40):
        u = "".join(rng.choice("abcd") for _ in range(rng.randint(1, 12)))
        v = "".join(rng.choice("abcd") for _ in range(rng.randint(1, 12)))
        composed = grig_tree_action(u, 6).compose(grig_tree_action(v, 6))
        assert composed == grig_tree_action(u + v, 6)
        assert composed.is_tree_automorphism()


def test_tree_action_depth_bounds():
    with pytest.raises(InvalidParameterError):
        grig_tree_action("a", 0)
    with pytest.raises(InvalidParameterError):
        grig_tree_action("a", 21)
    with pytest.raises(InvalidParameterError):
        grig_tree_action("a", 2).apply("0")


def test_non_automorphism_is_detected():
    action = grig_tree_action("", 2)
    bad = type(action)(2, np.array([0, 2, 1, 3]))
    assert not bad.is_tree_automorphism()


def test_badcycle_search_is_empty():
    assert grig_search_badcycles() == []


def test_word_problem_agrees_with_deep_tree_action(rng):
    words = ["acab" * 8, "ab" * 16, "abcacac" * 4, "adad" * 2, "ac" * 8]
    words += ["".join(rng.choice("abcd") for _ in range(rng.randint(1, 16))) for _ in range(400)]
    for word in words:
        assert grig_is_identity(word) == grig_tree_action(word, 12).is_identity(), word


def test_short_elements_have_power_of_two_order(grig):
    ball = build_ball(grig, 8)
    for e in ball.elements:
        result = order_of_element(grig, e, cap=4096)
        assert result.order is not None, e
        assert result.order & (result.order - 1) == 0, e


def test_deep_actions_only_cache_shallow_levels():
    _cached_leaf_permutation.cache_clear()
    deep = grig_tree_action("abacabad" * 4, 16)
    shallow = grig_tree_action("abacabad" * 4, CACHED_ACTION_DEPTH)
    shift = 16 - CACHED_ACTION_DEPTH
    leaves = np.arange(1 << 16)
    # the deep action restricted to the upper levels
    assert np.array_equal(deep.permutation >> shift, shallow.permutation[leaves >> shift])
    info = _cached_leaf_permutation.cache_info()
    assert info.maxsize == ACTION_CACHE_SIZE
    assert 0 < info.currsize <= ACTION_CACHE_SIZE
