"""Non-existence arguments for height functions, checked mechanically.

Torsion: if every element has finite order then h(g^n) = n h(g) = 0 forces h = 0.
The check is evidence at a word-length depth, never a proof of the infinite statement.

Higman quotients: a finite quotient where the images of a, b, c, d have orders
o_a, o_b, o_c, o_d > 1 needs o_b | 2^o_a - 1, o_c | 2^o_b - 1, o_d | 2^o_c - 1 and
o_a | 2^o_d - 1. The search below enumerates that chain through multiplicative orders
of 2; the audit replays the least-prime descent that rules every candidate out.
"""

import logging
import time
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import sympy

from .cayley import build_ball
from .errors import InvalidParameterError
from .oracles import ElementOracle, order_of_element
from .words import Presentation

logger = logging.getLogger(__name__)

STATUS_EVIDENCE = "evidence"
STATUS_INCONCLUSIVE = "inconclusive"
AUDIT_SAMPLE = 10

FORCED_ZERO_ARGUMENT = ("every element g checked has finite order n, so n h(g) = h(g^n) = h(id) = 0 "
                        "and h(g) = 0 for every height function h")
INVOLUTION_ARGUMENT = ("every generator s satisfies s^2 = id, so 2 h(s) = 0 and h(s) = 0; "
                       "h then vanishes on every word and is identically zero")


@dataclass
class TorsionReport:
    status: str
    depth: int
    elements_checked: int
    histogram: Dict[int, int]
    failure: Optional[Dict[str, Any]] = None
    argument: Optional[str] = None

    @property
    def all_powers_of_two(self) -> bool:
        return all(order & (order - 1) == 0 for order in self.histogram)

    def to_dict(self) -> Dict[str, Any]:
        return {"status": self.status, "depth": self.depth, "elements_checked": self.elements_checked,
                "order_histogram": {str(k): v for k, v in sorted(self.histogram.items())},
                "all_powers_of_two": self.all_powers_of_two, "failure": self.failure,
                "argument": self.argument}


def torsion_obstruction(o: ElementOracle, word_len_cap: int, order_cap: int = 1 << 16,
                        vertex_cap: int = 2_000_000) -> TorsionReport:
    if word_len_cap < 1:
        raise InvalidParameterError(f"word_len_cap must be >= 1, got {word_len_cap}")
    ball = build_ball(o, word_len_cap, vertex_cap)
    histogram: Counter = Counter()
    for v in ball.bfs_order:
        e = ball.elements[v]
        result = order_of_element(o, e, order_cap)
        if result.order is None:
            reason = "infinite order certified" if result.infinite else f"order exceeds cap {order_cap}"
            failure = {"word": o.presentation.format_word(ball.word_of(v)), "element": o.describe(e),
                       "reason": reason}
            logger.info(f"Torsion check on {o.name} inconclusive: {failure['word']} ({reason})")
            return TorsionReport(STATUS_INCONCLUSIVE, word_len_cap, sum(histogram.values()) + 1,
                                 dict(histogram), failure)
        histogram[result.order] += 1
    logger.info(f"All {ball.vertex_count} elements of {o.name} up to length {word_len_cap} have finite order")
    return TorsionReport(STATUS_EVIDENCE, word_len_cap, ball.vertex_count, dict(histogram), None,
                         FORCED_ZERO_ARGUMENT)


def multiplicative_order(base: int, m: int) -> int:
    if m < 2 or sympy.gcd(base, m) != 1:
        raise InvalidParameterError(f"{base} is not a unit modulo {m}")
    return int(sympy.n_order(base, m))


@dataclass
class DescentStep:
    prime: int
    order: int
    fermat: bool
    smaller_prime: int

    @property
    def descends(self) -> bool:
        return self.fermat and self.smaller_prime < self.prime

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.prime, "ord_p(2)": self.order, "divides_p_minus_1": self.fermat,
                "q": self.smaller_prime, "q_less_than_p": self.smaller_prime < self.prime}


@dataclass
class QuotientSearchResult:
    bound: int
    solutions: List[Tuple[int, int, int, int]]
    chains_examined: int
    audit: List[DescentStep] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def audit_passed(self) -> bool:
        return all(step.descends for step in self.audit)

    def to_dict(self) -> Dict[str, Any]:
        return {"bound": self.bound, "solutions": [list(s) for s in self.solutions],
                "chains_examined": self.chains_examined, "audit_primes": len(self.audit),
                "audit_passed": self.audit_passed,
                "audit_sample": [s.to_dict() for s in self.audit[:AUDIT_SAMPLE]]}


def _order_table(bound: int) -> Tuple[Dict[int, int], Dict[int, List[int]]]:
    orders = {m: int(sympy.n_order(2, m)) for m in range(3, bound + 1, 2)}
    by_order: Dict[int, List[int]] = defaultdict(list)
    for m, k in orders.items():
        by_order[k].append(m)
    return orders, dict(by_order)


_search_tables: Optional[Tuple[Dict[int, int], Dict[int, List[int]]]] = None


def _init_search(bound: int) -> None:
    global _search_tables
    _search_tables = _order_table(bound)


def _successors(o: int, by_order: Dict[int, List[int]]) -> List[int]:
    """All odd m > 1 in range with m | 2^o - 1, i.e. ord_m(2) | o."""
    found: List[int] = []
    for k in sympy.divisors(o):
        found.extend(by_order.get(k, ()))
    return found


def _search_from(starts: List[int]) -> Tuple[List[Tuple[int, int, int, int]], int]:
    orders, by_order = _search_tables
    solutions = []
    examined = 0
    for oa in starts:
        for ob in _successors(oa, by_order):
            for oc in _successors(ob, by_order):
                for od in _successors(oc, by_order):
                    examined += 1
                    if od % orders[oa] == 0:
                        solutions.append((oa, ob, oc, od))
    return solutions, examined


def descent_audit(bound: int) -> List[DescentStep]:
    """For each odd prime p <= bound: r = ord_p(2) divides p - 1, so its least prime factor q is < p."""
    steps = []
    for p in sympy.primerange(3, bound + 1):
        r = int(sympy.n_order(2, p))
        q = min(sympy.primefactors(r))
        steps.append(DescentStep(int(p), r, (p - 1) % r == 0, int(q)))
    return steps


def higman_quotient_search(bound: int, workers: int = 1) -> QuotientSearchResult:
    if bound < 2:
        raise InvalidParameterError(f"bound must be >= 2, got {bound}")
    start = time.time()
    starts = list(range(3, bound + 1, 2))
    if workers <= 1:
        _init_search(bound)
        solutions, examined = _search_from(starts)
        solutions.sort()
    else:
        slices = [starts[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_search, initargs=(bound,)) as pool:
            parts = list(pool.map(_search_from, slices))
        solutions = sorted(s for part, _ in parts for s in part)
        examined = sum(n for _, n in parts)
    audit = descent_audit(bound)
    result = QuotientSearchResult(bound, solutions, examined, audit, time.time() - start)
    logger.info(f"Quotient search up to {bound}: {len(solutions)} solutions, {examined} chains, "
                f"{len(audit)} primes audited in {result.wall_time:.2f}s")
    return result


@dataclass
class InvolutionCertificate:
    applicable: bool
    generators: List[str]
    argument: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"status": "certificate" if self.applicable else "not-applicable",
                "generators": self.generators, "argument": self.argument}


def involution_ghf_obstruction(p: Presentation) -> InvolutionCertificate:
    if all(g.involution for g in p.generators):
        return InvolutionCertificate(True, p.generator_names, INVOLUTION_ARGUMENT)
    return InvolutionCertificate(False, [g.name for g in p.generators if not g.involution])
