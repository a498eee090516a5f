"""Exact arithmetic in the Grigorchuk group acting on the rooted binary tree.

Words are strings over ``abcd`` in alternating canonical form. Actions are right
actions: in ``uv`` the word ``u`` acts first. With ``b = (a, c)``, ``c = (a, d)``,
``d = (e, b)`` and ``a`` swapping the two subtrees, a vertex ``0t`` is sent to
``p t'`` where ``p`` is the parity of ``a`` letters and ``t' = t^{w_0}``.
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple

import numpy as np

from .errors import InvalidParameterError, WordError

logger = logging.getLogger(__name__)

GrigWord = str

LETTERS = frozenset("abcd")
KLEIN = {
    ("b", "c"): "d", ("c", "b"): "d",
    ("b", "d"): "c", ("d", "b"): "c",
    ("c", "d"): "b", ("d", "c"): "b",
}
SECTIONS = {"b": ("a", "c"), "c": ("a", "d"), "d": ("", "b")}
NUCLEUS_PORTRAITS = {
    (0, "e", "e"): "e",
    (1, "e", "e"): "a",
    (0, "a", "c"): "b",
    (0, "a", "d"): "c",
    (0, "e", "b"): "d",
}
MAX_ACTION_DEPTH = 20
CACHED_ACTION_DEPTH = 10
ACTION_CACHE_SIZE = 2048
MEMO_LIMIT = 1 << 18

_identity_memo: Dict[str, bool] = {"": True, "a": False, "b": False, "c": False, "d": False}
_memo_lock = threading.Lock()


def grig_reduce(raw: Iterable[str]) -> GrigWord:
    stack: List[str] = []
    for ch in raw:
        if ch not in LETTERS:
            raise WordError(f"Invalid Grigorchuk letter '{ch}'", {"allowed": "abcd"})
        if stack:
            top = stack[-1]
            if top == ch:
                stack.pop()
                continue
            if top != "a" and ch != "a":
                stack[-1] = KLEIN[(top, ch)]
                continue
        stack.append(ch)
    return "".join(stack)


def grig_append(w: GrigWord, ch: str) -> GrigWord:
    """Right-multiply a canonical word by one letter."""
    if ch not in LETTERS:
        raise WordError(f"Invalid Grigorchuk letter '{ch}'", {"allowed": "abcd"})
    if not w:
        return ch
    top = w[-1]
    if top == ch:
        return w[:-1]
    if top != "a" and ch != "a":
        return w[:-1] + KLEIN[(top, ch)]
    return w + ch


@lru_cache(maxsize=1 << 16)
def grig_sections(w: GrigWord) -> Tuple[int, GrigWord, GrigWord]:
    parity = 0
    left: List[str] = []
    right: List[str] = []
    for ch in w:
        if ch == "a":
            parity ^= 1
            continue
        x0, x1 = SECTIONS[ch]
        if parity:
            x0, x1 = x1, x0
        left.append(x0)
        right.append(x1)
    return parity, grig_reduce("".join(left)), grig_reduce("".join(right))


def grig_is_identity(w: GrigWord) -> bool:
    w = grig_reduce(w)
    with _memo_lock:
        cached = _identity_memo.get(w)
    if cached is not None:
        return cached
    parity, w0, w1 = grig_sections(w)
    result = parity == 0 and grig_is_identity(w0) and grig_is_identity(w1)
    with _memo_lock:
        if len(_identity_memo) > MEMO_LIMIT:
            for key in [k for k in _identity_memo if len(k) > 1]:
                del _identity_memo[key]
        _identity_memo[w] = result
    return result


@lru_cache(maxsize=1 << 16)
def grig_portrait_key(w: GrigWord) -> str:
    """Canonical key of the element represented by ``w``.

    Recursively (parity, key(w0), key(w1)); any node equal to the portrait of a
    nucleus element e, a, b, c, d collapses to that letter, so the recursion stops.
    """
    if len(w) <= 1:
        return w or "e"
    parity, w0, w1 = grig_sections(w)
    node = (parity, grig_portrait_key(w0), grig_portrait_key(w1))
    collapsed = NUCLEUS_PORTRAITS.get(node)
    if collapsed is not None:
        return collapsed
    return f"({parity}{node[1]},{node[2]})"


@dataclass(frozen=True, eq=False)
class TreeAutomorphismAction:
    depth: int
    permutation: np.ndarray

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.permutation, np.arange(1 << self.depth)))

    def compose(self, other: "TreeAutomorphismAction") -> "TreeAutomorphismAction":
        """``self`` first, then ``other``."""
        if other.depth != self.depth:
            raise InvalidParameterError("Cannot compose actions of different depth",
                                        {"depths": [self.depth, other.depth]})
        return TreeAutomorphismAction(self.depth, other.permutation[self.permutation])

    def is_tree_automorphism(self) -> bool:
        leaves = np.arange(1 << self.depth)
        if not np.array_equal(np.sort(self.permutation), leaves):
            return False
        for level in range(1, self.depth):
            shift = self.depth - level
            prefix = leaves >> shift
            image = self.permutation >> shift
            induced = np.full(1 << level, -1, dtype=np.int64)
            induced[prefix] = image
            if not np.array_equal(induced[prefix], image):
                return False
        return True

    def apply(self, leaf: str) -> str:
        if len(leaf) != self.depth or set(leaf) - {"0", "1"}:
            raise InvalidParameterError(f"Leaf must be a {self.depth}-bit string", {"leaf": leaf})
        image = int(self.permutation[int(leaf, 2)])
        return format(image, f"0{self.depth}b")

    def __eq__(self, other) -> bool:
        return (isinstance(other, TreeAutomorphismAction) and self.depth == other.depth
                and bool(np.array_equal(self.permutation, other.permutation)))

    def __hash__(self) -> int:
        return hash((self.depth, self.permutation.tobytes()))


def _build_leaf_permutation(w: GrigWord, depth: int) -> np.ndarray:
    size = 1 << depth
    if depth == 0 or not w:
        perm = np.arange(size, dtype=np.int64)
    else:
        half = size >> 1
        parity, w0, w1 = grig_sections(w)
        perm = np.empty(size, dtype=np.int64)
        perm[:half] = parity * half + _leaf_permutation(w0, depth - 1)
        perm[half:] = (1 - parity) * half + _leaf_permutation(w1, depth - 1)
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=ACTION_CACHE_SIZE)
def _cached_leaf_permutation(w: GrigWord, depth: int) -> np.ndarray:
    return _build_leaf_permutation(w, depth)


def _leaf_permutation(w: GrigWord, depth: int) -> np.ndarray:
    # deep levels are rebuilt from cached shallow sections
    if depth <= CACHED_ACTION_DEPTH:
        return _cached_leaf_permutation(w, depth)
    return _build_leaf_permutation(w, depth)


def grig_tree_action(w: Iterable[str], depth: int) -> TreeAutomorphismAction:
    if not 1 <= depth <= MAX_ACTION_DEPTH:
        raise InvalidParameterError(f"depth must be between 1 and {MAX_ACTION_DEPTH}, got {depth}")
    return TreeAutomorphismAction(depth, _leaf_permutation(grig_reduce(w), depth))


def badcycle_word(assignment: Tuple[str, ...]) -> GrigWord:
    return grig_reduce("ba" + "".join(x + "a" for x in assignment))


def grig_search_badcycles() -> List[Tuple[str, ...]]:
    """Every x2..x8 in {b, c} with b a x2 a x3 a ... x8 a equal to the identity."""
    solutions = []
    checked = 0
    for assignment in itertools.product("bc", repeat=7):
        checked += 1
        if grig_is_identity(badcycle_word(assignment)):
            solutions.append(assignment)
    logger.info(f"Checked {checked} assignments, {len(solutions)} solutions")
    return solutions
