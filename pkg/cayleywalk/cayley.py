"""Finite balls of Cayley graphs and the structural queries run on them."""

import logging
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import psutil
from networkx.algorithms.isomorphism import GraphMatcher

from .errors import (BallCapExceededError, InsufficientRadiusError, InvalidParameterError,
                     StabilizerCapExceededError, ValidationError, WordError)
from .oracles import ElementOracle
from .words import GenWord, Letter

logger = logging.getLogger(__name__)

MEMORY_CHECK_EVERY = 4096
NO_LABEL = -1


@dataclass
class Ball:
    radius: int
    degree: int
    adjacency: List[List[Tuple[int, int]]]
    distance: List[int]
    parent: List[int]
    parent_label: List[int]
    labels: Tuple[Letter, ...] = ()
    label_names: Tuple[str, ...] = ()
    keys: Dict[bytes, int] = field(default_factory=dict)
    elements: List[Any] = field(default_factory=list)
    oracle: Optional[ElementOracle] = None
    transitive: bool = True
    name: str = ""

    def __post_init__(self):
        self.nbrs: List[Tuple[int, ...]] = [tuple(w for w, _ in adj) for adj in self.adjacency]
        self.bfs_order: List[int] = sorted(range(len(self.adjacency)), key=lambda v: (self.distance[v], v))
        self.layers: List[int] = [0] * (self.radius + 1)
        for d in self.distance:
            self.layers[d] += 1
        self._label_index = {letter: i for i, letter in enumerate(self.labels)}

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    @property
    def root(self) -> int:
        return 0

    def is_interior(self, v: int) -> bool:
        return self.distance[v] < self.radius

    def count_within(self, d: int) -> int:
        return sum(self.layers[: min(d, self.radius) + 1])

    def label_index(self, letter: Letter) -> int:
        if self.oracle is not None and self.oracle.presentation.is_involution(letter[0]):
            letter = (letter[0], 1)
        if letter not in self._label_index:
            raise WordError(f"Letter {letter!r} is not a generator of this ball")
        return self._label_index[letter]

    def inverse_label(self, label: int) -> int:
        if self.oracle is None or label == NO_LABEL:
            return label
        return self._label_index[self.oracle.presentation.letter_inverse(self.labels[label])]

    def label_name(self, label: int) -> str:
        return self.label_names[label] if label != NO_LABEL else ""

    def generator_of(self, label: int) -> str:
        """Generator name of a label, ignoring the sign."""
        if label == NO_LABEL:
            return ""
        return self.oracle.presentation.generators[self.labels[label][0]].name if self.oracle else ""

    def step(self, v: int, label: int) -> Optional[int]:
        for w, l in self.adjacency[v]:
            if l == label:
                return w
        return None

    def word_of(self, v: int) -> GenWord:
        letters: List[Letter] = []
        while v != 0:
            letters.append(self.labels[self.parent_label[v]])
            v = self.parent[v]
        return GenWord(tuple(reversed(letters)))

    def walk(self, w: GenWord, start: int = 0) -> List[int]:
        """Vertices visited by following the letters of ``w`` from ``start``."""
        path = [start]
        for letter in w:
            nxt = self.step(path[-1], self.label_index(letter))
            if nxt is None:
                raise InsufficientRadiusError("Walk leaves the ball", {"radius": self.radius})
            path.append(nxt)
        return path

    def vertex_of_element(self, e: Any) -> Optional[int]:
        return self.keys.get(self.oracle.canonical_key(e))

    def vertex_of(self, w: GenWord) -> Optional[int]:
        if self.oracle is None:
            raise ValidationError("Ball has no oracle; element lookup unavailable")
        return self.vertex_of_element(self.oracle.evaluate(w))

    def translate(self, gamma: Any, v: int) -> Optional[int]:
        """Index of gamma * element(v), or None when it lies outside the ball."""
        if self.oracle is None:
            raise ValidationError("Ball has no oracle; translations unavailable")
        return self.vertex_of_element(self.oracle.product(gamma, self.elements[v]))

    def edges(self) -> List[Tuple[int, int, int]]:
        return [(v, w, l) for v, adj in enumerate(self.adjacency) for w, l in adj if v < w]

    def to_networkx(self, directed: bool = False, max_distance: Optional[int] = None) -> nx.Graph:
        """The ball (or its vertices within ``max_distance``) as a networkx graph.

        Nodes carry ``distance``. In the directed form every edge appears in both
        directions and carries the ``label`` read from its tail.
        """
        limit = self.radius if max_distance is None else max_distance
        graph = nx.DiGraph() if directed else nx.Graph()
        graph.add_nodes_from((v, {"distance": d}) for v, d in enumerate(self.distance) if d <= limit)
        graph.add_edges_from((v, w, {"label": l}) for v in graph for w, l in self.adjacency[v]
                             if w in graph and (directed or v < w))
        return graph

    def summary(self) -> Dict[str, Any]:
        growth = [round(self.layers[i + 1] / self.layers[i], 12) for i in range(self.radius) if self.layers[i]]
        return {
            "group": self.name,
            "radius": self.radius,
            "degree": self.degree,
            "vertices": self.vertex_count,
            "layers": list(self.layers),
            "growth_ratios": growth,
        }

    def to_json(self) -> Dict[str, Any]:
        data = self.summary()
        data["edges"] = [[v, w, self.label_name(l)] for v, w, l in self.edges()]
        return data

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Sequence[int]], radius: Optional[int] = None,
                       degree: Optional[int] = None, name: str = "fixture") -> "Ball":
        """Ball over an explicit undirected graph rooted at vertex 0 (test fixtures)."""
        n = len(adjacency)
        for v, nb in enumerate(adjacency):
            for w in nb:
                if v not in adjacency[w]:
                    raise ValidationError("Adjacency is not symmetric", {"edge": [v, w]})
        dist = [-1] * n
        parent = [-1] * n
        dist[0] = 0
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    parent[w] = v
                    queue.append(w)
        if min(dist) < 0:
            raise ValidationError("Fixture graph is not connected")
        r = max(dist) if radius is None else radius
        if r < max(dist):
            raise ValidationError(f"Fixture reaches distance {max(dist)} beyond radius {r}")
        return cls(
            radius=r,
            degree=degree if degree is not None else max(len(nb) for nb in adjacency),
            adjacency=[[(w, NO_LABEL) for w in nb] for nb in adjacency],
            distance=dist,
            parent=parent,
            parent_label=[NO_LABEL] * n,
            transitive=False,
            name=name,
        )


def _memory_available_mb() -> float:
    return psutil.virtual_memory().available / (1024 * 1024)


def build_ball(o: ElementOracle, r: int, vertex_cap: int = 2_000_000, memory_floor_mb: int = 256) -> Ball:
    if r < 1:
        raise InvalidParameterError(f"Ball radius must be >= 1, got {r}")
    start = time.time()
    letters = tuple(o.signed_letters())
    names = tuple(o.presentation.letter_name(l) for l in letters)
    identity = o.identity
    keys = {o.canonical_key(identity): 0}
    elements = [identity]
    distance, parent, parent_label = [0], [-1], [-1]
    adjacency: List[List[Tuple[int, int]]] = [[]]

    def add_vertex(e, key, d, via, label):
        index = len(elements)
        if index >= vertex_cap:
            raise BallCapExceededError(f"Ball exceeds vertex cap {vertex_cap}",
                                       {"radius": r, "distance": d, "vertex_cap": vertex_cap})
        if index % MEMORY_CHECK_EVERY == 0 and _memory_available_mb() < memory_floor_mb:
            raise BallCapExceededError("Available memory fell below the configured floor",
                                       {"radius": r, "vertices": index, "memory_floor_mb": memory_floor_mb})
        keys[key] = index
        elements.append(e)
        distance.append(d)
        parent.append(via)
        parent_label.append(label)
        adjacency.append([])
        return index

    frontier = [0]
    for d in range(r):
        next_frontier = []
        for v in frontier:
            ev = elements[v]
            for li, letter in enumerate(letters):
                e = o.multiply(ev, letter)
                key = o.canonical_key(e)
                w = keys.get(key)
                if w is None:
                    w = add_vertex(e, key, d + 1, v, li)
                    next_frontier.append(w)
                adjacency[v].append((w, li))
        frontier = next_frontier
    for v in frontier:
        ev = elements[v]
        for li, letter in enumerate(letters):
            w = keys.get(o.canonical_key(o.multiply(ev, letter)))
            if w is not None:
                adjacency[v].append((w, li))

    root_nbrs = [w for w, _ in adjacency[0]]
    if 0 in root_nbrs or len(set(root_nbrs)) != len(letters):
        raise ValidationError("Cayley graph is not simple: a generator is trivial or two generators coincide",
                              {"group": o.name})

    ball = Ball(r, len(letters), adjacency, distance, parent, parent_label, letters, names,
                keys, elements, o, True, o.name)
    logger.info(f"Built ball {o.name} r={r}: {ball.vertex_count} vertices, layers {ball.layers} "
                f"in {time.time() - start:.2f}s")
    return ball


@dataclass
class GirthResult:
    length: Optional[int]
    exact: bool
    searched_up_to: int

    def to_dict(self) -> Dict[str, Any]:
        return {"girth": self.length, "exact": self.exact, "searched_up_to": self.searched_up_to,
                "infinite_within_search": self.length is None}


def girth(b: Ball) -> GirthResult:
    """Shortest cycle through the root.

    Every non-tree edge {u, w} of the BFS tree closes a cycle of length at most
    d(u) + d(w) + 1, and a shortest cycle through the root of length L <= 2r + 1 lies
    in the ball, so on a transitive ball any value found is the girth.
    """
    if b.radius < 2:
        raise InsufficientRadiusError("girth needs radius >= 2", {"radius": b.radius})
    best: Optional[int] = None
    for v, adj in enumerate(b.adjacency):
        for w, _ in adj:
            if v < w and b.parent[w] != v and b.parent[v] != w:
                candidate = b.distance[v] + b.distance[w] + 1
                if best is None or candidate < best:
                    best = candidate
    return GirthResult(best, best is not None and b.transitive, 2 * b.radius + 1)


@dataclass
class EdgeCycles:
    label: str
    neighbor: int
    counts: Dict[int, int]
    exact_up_to: int

    @property
    def shortest(self) -> Optional[int]:
        return min(self.counts) if self.counts else None

    def to_dict(self) -> Dict[str, Any]:
        return {"label": self.label, "neighbor": self.neighbor, "shortest": self.shortest,
                "counts": {str(k): v for k, v in sorted(self.counts.items())},
                "exact_up_to": self.exact_up_to}


@dataclass
class CycleSpectrum:
    cap: int
    radius: int
    edges: List[EdgeCycles]

    def by_label(self) -> Dict[str, EdgeCycles]:
        return {e.label: e for e in self.edges}

    def to_dict(self) -> Dict[str, Any]:
        return {"cap": self.cap, "radius": self.radius, "edges": [e.to_dict() for e in self.edges]}


def edge_cycle_spectrum(b: Ball, cap: int) -> CycleSpectrum:
    """Simple cycles of length <= cap through each root edge, counted by length.

    A cycle of length L through the root stays within distance L // 2 of it, so the
    census runs on that part of the ball only.
    """
    if cap < 3 or cap > 2 * b.radius:
        raise InvalidParameterError(f"cap must be between 3 and 2r = {2 * b.radius}", {"cap": cap})
    graph = b.to_networkx(max_distance=cap // 2)
    counts: Dict[int, Counter] = {u: Counter() for u, _ in b.adjacency[0]}
    for cycle in nx.simple_cycles(graph, length_bound=cap):
        if 0 not in cycle:
            continue
        i = cycle.index(0)
        for u in (cycle[i - 1], cycle[(i + 1) % len(cycle)]):
            counts[u][len(cycle)] += 1
    edges = [EdgeCycles(b.label_name(label), u, dict(counts[u]), 2 * b.radius) for u, label in b.adjacency[0]]
    return CycleSpectrum(cap, b.radius, edges)


def _five_cycles_by_center(b: Ball, centers: Sequence[int]) -> Dict[int, List[Tuple[Tuple[int, ...], Tuple[int, ...]]]]:
    """Directed 5-cycles through each center, rotated to start there, with their labels."""
    graph = b.to_networkx(directed=True, max_distance=b.radius - 3)
    by_center: Dict[int, List[Tuple[Tuple[int, ...], Tuple[int, ...]]]] = {g: [] for g in centers}
    for cycle in nx.simple_cycles(graph, length_bound=5):
        if len(cycle) != 5:
            continue
        for i, g in enumerate(cycle):
            if g in by_center:
                vertices = tuple(cycle[i:] + cycle[:i])
                labels = tuple(graph.edges[vertices[j], vertices[(j + 1) % 5]]["label"] for j in range(5))
                by_center[g].append((vertices, labels))
    return by_center


@dataclass
class SheetReport:
    radius: int
    centers: int
    properties: Dict[str, bool]
    failures: Dict[str, int]
    cycle_counts: Dict[str, List[int]]
    composition: Dict[str, int]

    @property
    def all_passed(self) -> bool:
        return all(self.properties.values())

    def to_dict(self) -> Dict[str, Any]:
        return {"radius": self.radius, "centers": self.centers, "all_passed": self.all_passed,
                "properties": self.properties, "failures": self.failures,
                "cycle_counts": self.cycle_counts, "composition": self.composition}


def verify_bs_sheet(b: Ball, edge_type: Optional[Callable[[int], str]] = None) -> SheetReport:
    """Check the five-cycle structure of the BS(1,2) Cayley graph on every vertex at distance <= r - 5.

    Properties: ``shared_five_cycle`` (each x-edge and y-edge at a vertex share a
    5-cycle), ``third_edge_after_x`` / ``third_edge_after_x_inverse`` (a directed
    5-cycle starting along x has a y-type third edge, along x^-1 an x-type one),
    ``consecutive_types`` (two consecutive y-type edges, never two consecutive x-type
    ones) and ``cycle_counts`` (every x-type edge lies in 2 and every y-type edge in 3
    five-cycles).
    """
    if b.radius < 6:
        raise InsufficientRadiusError("BS sheet checks need radius >= 6", {"radius": b.radius})
    if b.oracle is None or b.oracle.presentation.generator_names != ["x", "y"]:
        raise ValidationError("BS sheet checks need a ball of the bs12 oracle")
    type_of = edge_type or b.generator_of
    x_plus = b.label_index(b.oracle.presentation.letter("x"))
    x_minus = b.label_index(b.oracle.presentation.letter("x^-1"))

    failures: Counter = Counter()
    counts_by_type: Dict[str, Set[int]] = {"x": set(), "y": set()}
    composition: Counter = Counter()
    centers = [v for v in b.bfs_order if b.distance[v] <= b.radius - 5]

    five_cycles = _five_cycles_by_center(b, centers)
    for g in centers:
        cycles = five_cycles[g]
        pairs = set()
        starts: Counter = Counter()
        for vertices, labels in cycles:
            first, last_back = labels[0], b.inverse_label(labels[-1])
            pairs.add(frozenset((first, last_back)))
            starts[first] += 1
            types = [type_of(l) for l in labels]
            if first == x_plus and types[2] != "y":
                failures["third_edge_after_x"] += 1
            if first == x_minus and types[2] != "x":
                failures["third_edge_after_x_inverse"] += 1
            cyclic = list(zip(types, types[1:] + types[:1]))
            if ("y", "y") not in cyclic or ("x", "x") in cyclic:
                failures["consecutive_types"] += 1
            if g == 0:
                composition[f"{types.count('x')}x{types.count('y')}y"] += 1
        x_labels = [l for _, l in b.adjacency[g] if type_of(l) == "x"]
        y_labels = [l for _, l in b.adjacency[g] if type_of(l) == "y"]
        for lx in x_labels:
            for ly in y_labels:
                if frozenset((lx, ly)) not in pairs:
                    failures["shared_five_cycle"] += 1
        for _, l in b.adjacency[g]:
            kind = type_of(l)
            if kind in counts_by_type:
                counts_by_type[kind].add(starts[l])
    expected = {"x": {2}, "y": {3}}
    if counts_by_type != expected:
        failures["cycle_counts"] += 1

    names = ["shared_five_cycle", "third_edge_after_x", "third_edge_after_x_inverse",
             "consecutive_types", "cycle_counts"]
    # every 5-cycle at the root is traversed twice, once per direction
    census = {k: v // 2 for k, v in sorted(composition.items())}
    return SheetReport(
        radius=b.radius,
        centers=len(centers),
        properties={n: failures[n] == 0 for n in names},
        failures={n: failures[n] for n in names},
        cycle_counts={k: sorted(v) for k, v in counts_by_type.items()},
        composition=census,
    )


@dataclass
class StabilizerReport:
    automorphisms: List[Tuple[int, ...]]
    transport_depth: int
    type_preserved: Dict[str, bool]
    root_edge_images: Dict[str, List[str]]
    fixed_root_edges: List[str]

    @property
    def count(self) -> int:
        return len(self.automorphisms)

    def to_dict(self) -> Dict[str, Any]:
        return {"count": self.count, "transport_depth": self.transport_depth,
                "type_preserved": self.type_preserved, "root_edge_images": self.root_edge_images,
                "fixed_root_edges": self.fixed_root_edges}


def _root_fixing_automorphisms(b: Ball, max_automorphisms: int) -> List[Tuple[int, ...]]:
    graph = b.to_networkx()
    # matching on distance pins the root, the only vertex at distance 0
    matcher = GraphMatcher(graph, graph, node_match=lambda x, y: x["distance"] == y["distance"])
    found: List[Tuple[int, ...]] = []
    for mapping in matcher.isomorphisms_iter():
        found.append(tuple(mapping[v] for v in range(b.vertex_count)))
        if len(found) > max_automorphisms:
            raise StabilizerCapExceededError("Too many root-fixing automorphisms", {"cap": max_automorphisms})
    return found


def root_stabilizer_search(b: Ball, vertex_cap: int = 5000, max_automorphisms: int = 100_000,
                           transport_depth: Optional[int] = None) -> StabilizerReport:
    """All automorphisms of the ball fixing the root, with an edge-type transport report.

    Types are compared only on edges whose endpoints lie within ``transport_depth``
    (default r - 2) of the root, where short cycles are still visible inside the ball.
    """
    if b.vertex_count > vertex_cap:
        raise StabilizerCapExceededError(f"Ball has {b.vertex_count} vertices, cap is {vertex_cap}",
                                         {"vertices": b.vertex_count, "cap": vertex_cap})
    start = time.time()
    autos = _root_fixing_automorphisms(b, max_automorphisms)
    depth = max(0, b.radius - 2) if transport_depth is None else transport_depth

    edge_label = {}
    for v, adj in enumerate(b.adjacency):
        for w, l in adj:
            edge_label[(v, w)] = l
    generators = sorted({b.generator_of(l) for _, l in b.adjacency[0]})
    preserved = {g: True for g in generators}
    images: Dict[str, Set[str]] = {b.label_name(l): set() for _, l in b.adjacency[0]}
    fixed = {b.label_name(l) for _, l in b.adjacency[0]}

    inner_edges = [(v, w, l) for (v, w), l in edge_label.items()
                   if b.distance[v] <= depth and b.distance[w] <= depth]
    for eta in autos:
        for u, l in b.adjacency[0]:
            name = b.label_name(l)
            images[name].add(b.label_name(edge_label[(0, eta[u])]))
            if eta[u] != u:
                fixed.discard(name)
        for v, w, l in inner_edges:
            g = b.generator_of(l)
            if g in preserved and preserved[g] and b.generator_of(edge_label[(eta[v], eta[w])]) != g:
                preserved[g] = False
    logger.info(f"Found {len(autos)} root-fixing automorphisms in {time.time() - start:.2f}s")
    return StabilizerReport(
        automorphisms=autos,
        transport_depth=depth,
        type_preserved=preserved,
        root_edge_images={k: sorted(v) for k, v in sorted(images.items())},
        fixed_root_edges=sorted(fixed),
    )


def edge_boundary_ratio(b: Ball, vertices: Sequence[int]) -> Fraction:
    """|boundary edges of W| / (Delta |W|), counting missing ball edges as boundary."""
    members = set(vertices)
    if not members:
        raise InvalidParameterError("Vertex set must be nonempty")
    internal_twice = sum(1 for v in members for w in b.nbrs[v] if w in members)
    return Fraction(b.degree * len(members) - internal_twice, b.degree * len(members))


@dataclass
class PhiResult:
    ratio: Fraction
    witness: List[int]
    certified: bool
    exhaustive: bool
    exhaustive_size: int
    sets_examined: int
    max_set_size: int

    def to_dict(self) -> Dict[str, Any]:
        return {"ratio": str(self.ratio), "decimal": float(self.ratio), "witness_size": len(self.witness),
                "witness": self.witness, "certified_upper_bound": self.certified,
                "exhaustive": self.exhaustive, "exhaustive_size": self.exhaustive_size,
                "sets_examined": self.sets_examined, "max_set_size": self.max_set_size}


def phi_upper_bound(b: Ball, max_set_size: int, budget: int = 250_000, exhaustive_size: int = 12) -> PhiResult:
    """Minimise |boundary W| / (Delta |W|) over connected W containing the root.

    Sets of size <= exhaustive_size are enumerated exactly once each (frontier with
    exclusion) until the budget runs out; larger sets are grown greedily from the best
    set found.
    """
    if not 1 <= max_set_size <= b.vertex_count:
        raise InvalidParameterError("max_set_size must be between 1 and the vertex count",
                                    {"max_set_size": max_set_size, "vertices": b.vertex_count})
    delta = b.degree
    limit = min(max_set_size, exhaustive_size)
    best_ratio = Fraction(1)
    best_set = [0]
    examined = 0
    exhausted_budget = False

    stack = [([0], 0, [w for w in b.nbrs[0]], frozenset())]
    while stack:
        members, internal, frontier, excluded = stack.pop()
        examined += 1
        ratio = Fraction(delta * len(members) - 2 * internal, delta * len(members))
        if ratio < best_ratio or (ratio == best_ratio and len(members) > len(best_set)):
            best_ratio, best_set = ratio, list(members)
        if examined >= budget:
            exhausted_budget = True
            break
        if len(members) == limit:
            continue
        member_set = set(members)
        children = []
        for i, v in enumerate(frontier):
            blocked = excluded | frozenset(frontier[:i])
            new_frontier = list(frontier[i + 1:])
            seen = set(new_frontier)
            for w in b.nbrs[v]:
                if w not in member_set and w not in blocked and w not in seen:
                    new_frontier.append(w)
                    seen.add(w)
            gained = sum(1 for w in b.nbrs[v] if w in member_set)
            children.append((members + [v], internal + gained, new_frontier, blocked))
        stack.extend(reversed(children))

    members = list(best_set)
    member_set = set(members)
    internal = sum(1 for v in members for w in b.nbrs[v] if w in member_set) // 2
    while len(members) < max_set_size:
        frontier = sorted({w for v in members for w in b.nbrs[v] if w not in member_set})
        if not frontier:
            break
        v = max(frontier, key=lambda x: (sum(1 for w in b.nbrs[x] if w in member_set), -x))
        internal += sum(1 for w in b.nbrs[v] if w in member_set)
        members.append(v)
        member_set.add(v)
        ratio = Fraction(delta * len(members) - 2 * internal, delta * len(members))
        if ratio < best_ratio:
            best_ratio, best_set = ratio, list(members)

    certified = all(b.distance[v] < b.radius for v in best_set)
    return PhiResult(best_ratio, sorted(best_set), certified, not exhausted_budget, limit, examined, max_set_size)
