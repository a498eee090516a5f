"""Group and graph height functions.

A group height function is a nonzero homomorphism to the integers: an integer height
per generator such that every relator has signed height sum zero. Its existence is
decided by an integer nullspace computation on relator exponent vectors.

Bridges use the half-space convention h(v0) < h(vi) <= h(vn) for every i >= 1; the
empty walk is a bridge.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .cayley import Ball
from .errors import InsufficientRadiusError, PathDependenceError, ValidationError, WordError
from .words import GenWord, Letter, Presentation, exponent_vector

logger = logging.getLogger(__name__)

VERDICT_EXISTS = "exists"
VERDICT_NONE = "none"
OBSTRUCTION_TORSION = "all-generators-torsion"
OBSTRUCTION_ABELIANIZATION = "trivial-abelianization"


@dataclass(frozen=True)
class HeightAssignment:
    presentation: Presentation
    values: tuple

    @classmethod
    def from_mapping(cls, p: Presentation, mapping: Mapping[str, int], strict: bool = False) -> "HeightAssignment":
        values = [0] * p.rank
        for name, value in mapping.items():
            i = p.index_of(name)
            if p.is_involution(i) and value != 0:
                if strict:
                    raise ValidationError(f"Involution '{name}' must have height 0 (s^2 = 1)",
                                          {"generator": name, "height": value})
                logger.warning(f"Height of involution '{name}' forced from {value} to 0")
                value = 0
            values[i] = int(value)
        return cls(p, tuple(values))

    @classmethod
    def parse(cls, p: Presentation, text: str, strict: bool = False) -> "HeightAssignment":
        """Parse ``x=1,y=0``; generators not mentioned get height 0."""
        mapping: Dict[str, int] = {}
        for part in filter(None, (s.strip() for s in text.split(","))):
            name, sep, value = part.partition("=")
            if not sep:
                raise WordError(f"Height entry '{part}' must look like name=integer")
            try:
                mapping[name.strip()] = int(value)
            except ValueError:
                raise WordError(f"Height of '{name.strip()}' is not an integer: '{value}'")
        return cls.from_mapping(p, mapping, strict)

    @property
    def is_zero(self) -> bool:
        return not any(self.values)

    def of_letter(self, letter: Letter) -> int:
        i, s = letter
        return s * self.values[i]

    def word_height(self, w: Union[GenWord, Sequence[Letter]]) -> int:
        return sum(self.of_letter(l) for l in w)

    def as_dict(self) -> Dict[str, int]:
        return {g.name: v for g, v in zip(self.presentation.generators, self.values)}


@dataclass
class GhfCertificate:
    verdict: str
    rank: int
    witness: Optional[HeightAssignment] = None
    obstruction: Optional[str] = None
    basis: List[List[int]] = field(default_factory=list)
    sufficient: bool = False
    relators_used: int = 0
    family_cap: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "rank": self.rank,
            "witness": self.witness.as_dict() if self.witness else None,
            "obstruction": self.obstruction,
            "basis": self.basis,
            "definitive": self.verdict == VERDICT_NONE or self.sufficient,
            "relators_used": self.relators_used,
            "family_cap": self.family_cap,
        }


def exgcd(a: int, b: int) -> np.ndarray:
    """2x2 integer matrix M of determinant 1 with M @ [a, b] = [gcd(a, b), 0]."""
    a_sign = -1 if a < 0 else 1
    b_sign = -1 if b < 0 else 1
    a, b = a * a_sign, b * b_sign
    M = np.array([[b, 0, 1], [a, 1, 0]], dtype=object)
    while M[1, 0] != 0:
        q = M[0, 0] // M[1, 0]
        M[0] -= q * M[1]
        M = M[::-1]
    g = M[0, 0]
    M = M[:, 1:] * np.array([a_sign, b_sign], dtype=object)
    if g != 0:
        M[1] = [-b_sign * b // g, a_sign * a // g]
    return M


def _hermite_rows(A: np.ndarray) -> np.ndarray:
    A = A.copy()
    rows, cols = A.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        for i in range(rank + 1, rows):
            if A[i, col] != 0:
                M = exgcd(A[rank, col], A[i, col])
                A[[rank, i]] = M.dot(A[[rank, i]])
        if A[rank, col] == 0:
            continue
        if A[rank, col] < 0:
            A[rank] = -A[rank]
        for k in range(rank):
            A[k] -= (A[k, col] // A[rank, col]) * A[rank]
        rank += 1
    return A[:rank]


def _primitive(row: Sequence[int]) -> List[int]:
    g = 0
    for x in row:
        g = math.gcd(g, int(x))
    if g == 0:
        return [0] * len(row)
    out = [int(x) // g for x in row]
    first = next(x for x in out if x != 0)
    return out if first > 0 else [-x for x in out]


def integer_nullspace(rows: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    """Z-basis (Hermite normal form, primitive rows) of {h in Z^n : A h = 0}.

    Column operations by 2x2 unimodular blocks bring A to column echelon form while U
    records them; the columns of U past the last pivot span the integer kernel.
    """
    A = np.array([[int(x) for x in r] for r in rows], dtype=object).reshape(len(rows), n)
    U = np.eye(n, dtype=int).astype(object)
    pivot = 0
    for i in range(A.shape[0]):
        if pivot == n:
            break
        for j in range(pivot + 1, n):
            if A[i, j] != 0:
                M = exgcd(A[i, pivot], A[i, j]).T
                A[:, [pivot, j]] = A[:, [pivot, j]].dot(M)
                U[:, [pivot, j]] = U[:, [pivot, j]].dot(M)
        if A[i, pivot] != 0:
            pivot += 1
    kernel = U[:, pivot:].T
    if kernel.shape[0] == 0:
        return []
    return [_primitive(r) for r in _hermite_rows(kernel)]


def constraint_rows(p: Presentation, family_cap: int = 8) -> List[List[int]]:
    """Exponent vectors of every relator plus the row 2 e_s for each involution s."""
    rows = [exponent_vector(r, p).tolist() for r in p.all_relators(family_cap)]
    for g in p.generators:
        if g.involution:
            row = [0] * p.rank
            row[g.index] = 2
            rows.append(row)
    return rows


def solve_group_height_function(p: Presentation, family_cap: int = 8) -> GhfCertificate:
    rows = constraint_rows(p, family_cap)
    basis = integer_nullspace(rows, p.rank)
    relators_used = len(p.all_relators(family_cap))
    if not basis:
        if all(g.involution for g in p.generators):
            obstruction = OBSTRUCTION_TORSION
        else:
            obstruction = OBSTRUCTION_ABELIANIZATION
        return GhfCertificate(VERDICT_NONE, 0, None, obstruction, [], p.relators_sufficient,
                              relators_used, family_cap)
    witness = HeightAssignment(p, tuple(basis[0]))
    if not p.relators_sufficient:
        logger.warning(f"Relators of '{p.name}' are not marked sufficient; 'exists' is relative to them")
    return GhfCertificate(VERDICT_EXISTS, len(basis), witness, None, basis, p.relators_sufficient,
                          relators_used, family_cap)


def vertex_heights(b: Ball, h: HeightAssignment) -> List[int]:
    """Heights of all ball vertices, propagated along BFS parents and checked on every edge."""
    if b.oracle is None:
        raise ValidationError("Ball has no generator labels; pass vertex heights directly")
    letter_height = [h.of_letter(l) for l in b.labels]
    heights = [0] * b.vertex_count
    for v in b.bfs_order[1:]:
        heights[v] = heights[b.parent[v]] + letter_height[b.parent_label[v]]
    for v, adj in enumerate(b.adjacency):
        for w, l in adj:
            if heights[w] - heights[v] != letter_height[l]:
                raise PathDependenceError(
                    "Heights are path dependent on this ball; some relator has nonzero height",
                    {"vertex": v, "neighbor": w, "word": b.oracle.presentation.format_word(b.word_of(w))})
    return heights


def _heights_of(b: Ball, h: Union[HeightAssignment, Sequence[int]]) -> List[int]:
    if isinstance(h, HeightAssignment):
        return vertex_heights(b, h)
    if len(h) != b.vertex_count:
        raise ValidationError("Vertex height list does not match the ball",
                              {"heights": len(h), "vertices": b.vertex_count})
    return list(h)


@dataclass
class HeightAxiomReport:
    root_zero: bool
    difference_invariant: Dict[str, bool]
    pairs_checked: Dict[str, int]
    up_down: bool
    up_down_failures: int
    interior_vertices: int

    @property
    def all_passed(self) -> bool:
        return self.root_zero and self.up_down and all(self.difference_invariant.values())

    def to_dict(self) -> Dict[str, Any]:
        return {"all_passed": self.all_passed, "root_zero": self.root_zero,
                "difference_invariant": self.difference_invariant, "pairs_checked": self.pairs_checked,
                "up_down": self.up_down, "up_down_failures": self.up_down_failures,
                "interior_vertices": self.interior_vertices}


def verify_graph_height_function(b: Ball, h: HeightAssignment,
                                 translations: Sequence[GenWord] = ()) -> HeightAxiomReport:
    heights = vertex_heights(b, h)
    p = b.oracle.presentation

    invariant: Dict[str, bool] = {}
    checked: Dict[str, int] = {}
    for gamma_word in translations:
        label = p.format_word(gamma_word) or "e"
        gamma = b.oracle.evaluate(gamma_word)
        shifts = set()
        count = 0
        for u in range(b.vertex_count):
            image = b.translate(gamma, u)
            if image is not None:
                shifts.add(heights[image] - heights[u])
                count += 1
        invariant[label] = len(shifts) <= 1
        checked[label] = count

    failures = 0
    interior = 0
    for v in range(b.vertex_count):
        if not b.is_interior(v):
            continue
        interior += 1
        around = [heights[w] for w in b.nbrs[v]]
        if not (min(around) < heights[v] < max(around)):
            failures += 1
    return HeightAxiomReport(heights[0] == 0, invariant, checked, failures == 0, failures, interior)


@dataclass
class HarmonicReport:
    harmonic: bool
    max_deviation: Fraction
    worst_vertex: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        return {"harmonic": self.harmonic, "max_deviation": str(self.max_deviation),
                "worst_vertex": self.worst_vertex}


def is_harmonic(b: Ball, h: Union[HeightAssignment, Sequence[int]]) -> HarmonicReport:
    if b.radius < 2:
        raise InsufficientRadiusError("harmonicity check needs radius >= 2", {"radius": b.radius})
    heights = _heights_of(b, h)
    worst = Fraction(0)
    worst_vertex = None
    for v in range(b.vertex_count):
        if not b.is_interior(v):
            continue
        nb = b.nbrs[v]
        deviation = Fraction(abs(len(nb) * heights[v] - sum(heights[w] for w in nb)), len(nb))
        if deviation > worst:
            worst, worst_vertex = deviation, v
    return HarmonicReport(worst == 0, worst, worst_vertex)


def bridge_predicate(b: Ball, path: Sequence[int], h: Union[HeightAssignment, Sequence[int]]) -> bool:
    if len(path) <= 1:
        return True
    heights = _heights_of(b, h)
    start, end = heights[path[0]], heights[path[-1]]
    return all(start < heights[v] <= end for v in path[1:])
