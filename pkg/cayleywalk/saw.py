"""Self-avoiding walk enumeration on Cayley balls.

Counts are exact only when the ball radius is at least the walk length. Enumeration
uses an explicit stack over a dense visited bitmap; work is split by SAW prefixes of
length ``prefix_depth`` and the per-prefix counts are summed, so the totals do not
depend on the worker count.
"""

import logging
import math
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .cayley import Ball
from .errors import (ExtendabilityUnknownError, InsufficientHeadroomError, InsufficientRadiusError,
                     InvalidParameterError, NotExtendableError, ValidationError)
from .heightfn import HeightAssignment, _heights_of
from .oracles import ElementOracle
from .spectral import nonamenable_constant

logger = logging.getLogger(__name__)

EXTENDABLE = "certified-extendable"
DEAD = "certified-dead"
UNKNOWN = "unknown"

_worker_nbrs: Optional[Sequence[Tuple[int, ...]]] = None
_worker_heights: Optional[Sequence[int]] = None


def _extend(nbrs: Sequence[Tuple[int, ...]], prefix: Sequence[int], n: int,
            heights: Optional[Sequence[int]] = None) -> Tuple[List[int], int]:
    """Count SAWs of lengths len(prefix) .. n that start with ``prefix``.

    With ``heights`` only bridges are counted: walks leaving the half-space
    h > h(v0) are pruned, and a walk counts when its last height is its running max.
    """
    counts = [0] * (n + 1)
    base = len(prefix) - 1
    if base >= n:
        return counts, 0
    visited = bytearray(len(nbrs))
    for v in prefix:
        visited[v] = 1
    h0 = heights[prefix[0]] if heights is not None else 0
    m0 = max((heights[v] for v in prefix[1:]), default=-math.inf) if heights is not None else 0

    nodes = 0
    top = [prefix[-1]]
    cursor = [0]
    running = [m0]
    while top:
        v = top[-1]
        nb = nbrs[v]
        i = cursor[-1]
        if i >= len(nb):
            top.pop()
            cursor.pop()
            running.pop()
            if top:
                visited[v] = 0
            continue
        cursor[-1] = i + 1
        w = nb[i]
        if visited[w]:
            continue
        m = running[-1]
        length = base + len(top)
        if heights is not None:
            hw = heights[w]
            if hw <= h0:
                continue
            if hw >= m:
                counts[length] += 1
                m = hw
        else:
            counts[length] += 1
        nodes += 1
        if length < n:
            visited[w] = 1
            top.append(w)
            cursor.append(0)
            running.append(m)
    return counts, nodes


def _init_worker(nbrs, heights):
    global _worker_nbrs, _worker_heights
    _worker_nbrs = nbrs
    _worker_heights = heights


def _count_chunk(args) -> Tuple[List[int], int]:
    prefixes, n = args
    total = [0] * (n + 1)
    nodes = 0
    for prefix in prefixes:
        counts, visited = _extend(_worker_nbrs, prefix, n, _worker_heights)
        total = [a + b for a, b in zip(total, counts)]
        nodes += visited
    return total, nodes


def _chunks(items: List[Any], parts: int) -> List[List[Any]]:
    size = max(1, math.ceil(len(items) / parts))
    return [items[i:i + size] for i in range(0, len(items), size)]


def iter_saws(b: Ball, n: int, heights: Optional[Sequence[int]] = None) -> Iterator[Tuple[int, ...]]:
    """Vertex paths of all n-step SAWs from the root; with heights, only walks staying above h(root)."""
    if n < 0:
        raise InvalidParameterError(f"walk length must be >= 0, got {n}")
    if n == 0:
        yield (0,)
        return
    h0 = heights[0] if heights is not None else 0
    path = [0]
    visited = bytearray(b.vertex_count)
    visited[0] = 1
    cursor = [0]
    while cursor:
        v = path[-1]
        nb = b.nbrs[v]
        i = cursor[-1]
        if i >= len(nb):
            cursor.pop()
            if len(path) > 1:
                visited[path.pop()] = 0
            continue
        cursor[-1] = i + 1
        w = nb[i]
        if visited[w] or (heights is not None and heights[w] <= h0):
            continue
        if len(path) == n:
            yield tuple(path) + (w,)
            continue
        visited[w] = 1
        path.append(w)
        cursor.append(0)


@dataclass
class SawReport:
    max_len: int
    counts: List[int]
    bridges: Optional[List[int]] = None
    fekete: List[float] = field(default_factory=list)
    horizon: Optional[int] = None
    nodes_visited: int = 0
    wall_time: float = 0.0
    workers: int = 1
    prefix_depth: int = 0

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "max_len": self.max_len,
            "sigma": [str(c) for c in self.counts],
            "fekete_bounds": self.fekete,
            "horizon": self.horizon,
            "prefix_depth": self.prefix_depth,
        }
        if self.bridges is not None:
            data["beta"] = [str(c) for c in self.bridges]
        return data

    def stats(self) -> Dict[str, Any]:
        return {"nodes_visited": self.nodes_visited, "wall_time": round(self.wall_time, 3), "workers": self.workers}

    def csv_rows(self) -> List[List[Any]]:
        rows = []
        for k in range(self.max_len + 1):
            beta = self.bridges[k] if self.bridges is not None else ""
            bound = self.fekete[k - 1] if k >= 1 else ""
            rows.append([k, self.counts[k], beta, bound])
        return rows


def _require_radius(b: Ball, n: int) -> None:
    if n < 0:
        raise InvalidParameterError(f"max length must be >= 0, got {n}")
    if b.radius < n:
        raise InsufficientRadiusError(f"Ball radius {b.radius} < walk length {n}; counts would be truncated",
                                      {"radius": b.radius, "max_len": n})


def _enumerate(b: Ball, n: int, heights: Optional[Sequence[int]], workers: int,
               prefix_depth: int) -> Tuple[List[int], int]:
    p = min(prefix_depth, n)
    head, nodes = _extend(b.nbrs, [0], p, heights)
    head[0] = 1
    counts = head + [0] * (n - p)
    if p == n:
        return counts, nodes

    prefixes = list(iter_saws(b, p, heights))
    logger.debug(f"Partitioned {len(prefixes)} prefixes of length {p} across {workers} workers")
    if workers <= 1:
        _init_worker(b.nbrs, heights)
        results = [_count_chunk((prefixes, n))]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(b.nbrs, heights)) as pool:
            results = list(pool.map(_count_chunk, [(c, n) for c in _chunks(prefixes, workers * 4)]))
    for partial, visited in results:
        for k in range(p + 1, n + 1):
            counts[k] += partial[k]
        nodes += visited
    return counts, nodes


def fekete_bounds(counts: Sequence[int]) -> List[float]:
    return [math.exp(math.log(counts[k]) / k) if counts[k] > 0 else 0.0 for k in range(1, len(counts))]


def count_saws(b: Ball, n: int, workers: int = 1, prefix_depth: int = 3) -> SawReport:
    _require_radius(b, n)
    start = time.time()
    counts, nodes = _enumerate(b, n, None, workers, prefix_depth)
    elapsed = time.time() - start
    logger.info(f"Counted SAWs up to length {n} on {b.name}: {nodes} nodes in {elapsed:.2f}s")
    return SawReport(n, counts, None, fekete_bounds(counts), None, nodes, elapsed, workers, prefix_depth)


def count_bridges(b: Ball, h: Union[HeightAssignment, Sequence[int]], n: int, workers: int = 1,
                  prefix_depth: int = 3) -> List[int]:
    """beta_0 .. beta_n."""
    _require_radius(b, n)
    heights = _heights_of(b, h)
    start = time.time()
    bridges, nodes = _enumerate(b, n, heights, workers, prefix_depth)
    logger.info(f"Counted bridges up to length {n} on {b.name}: {nodes} nodes in {time.time() - start:.2f}s")
    return bridges


def naive_saw_counts(o: ElementOracle, n: int) -> List[int]:
    """Reference counts straight from the oracle, without a ball."""
    counts = [0] * (n + 1)
    letters = o.signed_letters()

    def walk(e, seen, k):
        counts[k] += 1
        if k == n:
            return
        for letter in letters:
            f = o.multiply(e, letter)
            key = o.canonical_key(f)
            if key not in seen:
                seen.add(key)
                walk(f, seen, k + 1)
                seen.discard(key)

    walk(o.identity, {o.canonical_key(o.identity)}, 0)
    return counts


@dataclass
class MuBounds:
    bounds: List[float]
    running_min: List[float]
    best_n: int
    best: float

    def to_dict(self) -> Dict[str, Any]:
        return {"bounds": self.bounds, "running_min": self.running_min, "best_n": self.best_n, "best": self.best}


def mu_upper_bounds(rep: SawReport) -> MuBounds:
    if rep.max_len < 1:
        raise InvalidParameterError("Need at least one step for a Fekete bound")
    bounds = rep.fekete or fekete_bounds(rep.counts)
    running = []
    best, best_n = math.inf, 1
    for k, value in enumerate(bounds, start=1):
        if value < best:
            best, best_n = value, k
        running.append(best)
    return MuBounds(bounds, running, best_n, best)


def mu_lower_bounds_from_bridges(betas: Sequence[int]) -> List[float]:
    """beta_n^(1/n): each is a lower bound on the bridge growth rate."""
    return [math.exp(math.log(betas[k]) / k) if betas[k] > 0 else 0.0 for k in range(1, len(betas))]


def check_subadditivity(counts: Sequence[int]) -> List[Tuple[int, int]]:
    n = len(counts) - 1
    return [(m, k) for m in range(1, n + 1) for k in range(m, n + 1 - m) if counts[m + k] > counts[m] * counts[k]]


def check_supermultiplicativity(betas: Sequence[int]) -> List[Tuple[int, int]]:
    n = len(betas) - 1
    return [(m, k) for m in range(0, n + 1) for k in range(m, n + 1 - m) if betas[m + k] < betas[m] * betas[k]]


@dataclass
class ExtendabilityResult:
    status: str
    horizon: int
    target_distance: int
    witness: List[int] = field(default_factory=list)
    visited: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {"status": self.status, "horizon": self.horizon, "target_distance": self.target_distance,
                "witness": self.witness, "visited": self.visited}


def _check_saw(b: Ball, path: Sequence[int]) -> None:
    if not path or path[0] != 0:
        raise ValidationError("A SAW must start at the root")
    if len(set(path)) != len(path):
        raise ValidationError("Path revisits a vertex", {"path": list(path)})
    for v, w in zip(path, path[1:]):
        if not 0 <= w < b.vertex_count or w not in b.nbrs[v]:
            raise ValidationError("Consecutive path vertices are not adjacent", {"edge": [v, w]})


def extendable(b: Ball, path: Sequence[int], K: int, slack: int = 0, max_visits: int = 1_000_000) -> ExtendabilityResult:
    """Horizon-certified extendability of a SAW.

    Extendable when a continuation avoiding the path reaches root distance m + K - slack,
    m the largest root distance on the path. Dead when the endpoint's component in the
    ball minus the path never gets that far, so it is finite.
    """
    if K < 0 or slack < 0:
        raise InvalidParameterError("horizon and slack must be >= 0", {"horizon": K, "slack": slack})
    _check_saw(b, path)
    m = max(b.distance[v] for v in path)
    if m + K > b.radius:
        raise InsufficientHeadroomError(f"Path reaches distance {m}; horizon {K} does not fit radius {b.radius}",
                                        {"max_distance": m, "horizon": K, "radius": b.radius})
    target = m + K - slack
    end = path[-1]
    if b.distance[end] >= target:
        return ExtendabilityResult(EXTENDABLE, K, target, [], 0)

    blocked = set(path[:-1])
    came_from = {end: -1}
    queue = deque([end])
    visited = 0
    while queue:
        v = queue.popleft()
        visited += 1
        if visited > max_visits:
            return ExtendabilityResult(UNKNOWN, K, target, [], visited)
        for w in b.nbrs[v]:
            if w in blocked or w in came_from:
                continue
            came_from[w] = v
            if b.distance[w] >= target:
                witness = [w]
                while came_from[witness[-1]] != end:
                    witness.append(came_from[witness[-1]])
                return ExtendabilityResult(EXTENDABLE, K, target, witness[::-1], visited)
            queue.append(w)
    return ExtendabilityResult(DEAD, K, target, [], visited)


def count_extendable_saws(b: Ball, n: int, K: int, max_visits: int = 1_000_000) -> Dict[str, int]:
    if b.radius < n + K:
        raise InsufficientHeadroomError(f"Need radius >= n + K = {n + K}", {"radius": b.radius})
    tally = {EXTENDABLE: 0, DEAD: 0, UNKNOWN: 0}
    for path in iter_saws(b, n):
        tally[extendable(b, path, K, max_visits=max_visits).status] += 1
    tally["total"] = sum(tally.values())
    return tally


@dataclass
class EdgeColoring:
    edges: List[Tuple[int, int, str]]
    blue: int
    red: int
    unknown: int
    horizon: int
    expected_total: int
    lemma_bound: Optional[float] = None
    lemma_holds: Optional[bool] = None
    lam: Optional[float] = None

    @property
    def total(self) -> int:
        return len(self.edges)

    def to_dict(self) -> Dict[str, Any]:
        return {"blue": self.blue, "red": self.red, "unknown": self.unknown, "total": self.total,
                "expected_total": self.expected_total, "horizon": self.horizon, "lambda": self.lam,
                "lemma_bound": self.lemma_bound, "lemma_holds": self.lemma_holds,
                "edges": [list(e) for e in self.edges]}


def classify_saw_edges(b: Ball, path: Sequence[int], K: int, lam: Optional[float] = None,
                       mid_edge: Optional[int] = None, strict: bool = True,
                       max_visits: int = 1_000_000) -> EdgeColoring:
    """Colour the off-path edges at v_0 .. v_{2n-1} of an extendable 2n-step SAW.

    An edge [v, w> is blue when the prefix of the path up to v followed by w is an
    extendable SAW and red otherwise. At v_0 the mid-edge (by default the first
    neighbour other than v_1) is left out, so there are 2n(Delta - 2) edges.
    """
    steps = len(path) - 1
    if steps < 2 or steps % 2:
        raise InvalidParameterError(f"Path must have an even number of steps >= 2, got {steps}")
    n = steps // 2
    head = extendable(b, path, K, max_visits=max_visits)
    if head.status != EXTENDABLE:
        raise NotExtendableError(f"Path is {head.status} at horizon {K}", {"horizon": K})
    m = max(b.distance[v] for v in path)
    if b.radius < m + K + 1:
        raise InsufficientHeadroomError(f"Need radius >= {m + K + 1} to test one-step deviations",
                                        {"radius": b.radius})

    if mid_edge is None:
        mid_edge = next(w for w in b.nbrs[0] if w != path[1])
    elif mid_edge not in b.nbrs[0] or mid_edge == path[1]:
        raise ValidationError("mid_edge must be a root neighbour other than v_1", {"mid_edge": mid_edge})

    path_edges = {frozenset(e) for e in zip(path, path[1:])}
    edges: List[Tuple[int, int, str]] = []
    blue = red = unknown = 0
    for i in range(steps):
        v = path[i]
        prefix = list(path[:i + 1])
        for w in b.nbrs[v]:
            if frozenset((v, w)) in path_edges or (i == 0 and w == mid_edge):
                continue
            if w in prefix:
                colour = "red"
            else:
                status = extendable(b, prefix + [w], K, max_visits=max_visits).status
                colour = {EXTENDABLE: "blue", DEAD: "red"}.get(status, UNKNOWN)
            if colour == UNKNOWN and strict:
                raise ExtendabilityUnknownError("Edge extendability unknown at the horizon",
                                                {"edge": [v, w], "horizon": K})
            edges.append((v, w, colour))
            blue += colour == "blue"
            red += colour == "red"
            unknown += colour == UNKNOWN

    delta = b.degree
    bound = holds = None
    if lam is not None:
        c = float(nonamenable_constant(delta))
        bound = n * (1 + c * lam) / (delta - 2) - (delta - 1) / 2
        holds = blue >= bound
    return EdgeColoring(edges, blue, red, unknown, K, steps * (delta - 2), bound, holds, lam)
