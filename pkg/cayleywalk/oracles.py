"""Element oracles for the builtin groups and the group registry.

An oracle multiplies elements by generator letters and hands out canonical byte keys:
two elements are equal exactly when their keys are. Balls, SAW counts and spectral
data are only as sound as the oracle behind them.
"""

import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .errors import GeneratorMismatchError, InvalidParameterError, UnknownGroupError, UnsupportedGroupError
from .grigorchuk import grig_append, grig_portrait_key, grig_reduce
from .words import GenWord, Letter, Presentation, free_reduce, parse_presentation

logger = logging.getLogger(__name__)

DEFAULT_ORDER_CAP = 1 << 16

HIGMAN_TEXT = """\
# a^-1 b a = b^2 and its cyclic shifts
gens a b c d
rel a^-1 b a b^-1 b^-1
rel b^-1 c b c^-1 c^-1
rel c^-1 d c d^-1 d^-1
rel d^-1 a d a^-1 a^-1
"""

HIGMAN_VARIANT_TEXT = """\
gens a b c d
rel a^-1 b a b^-1 b^-1
rel (b^-1)^2 c (b)^2 (c^-1)^2
rel (c^-1)^3 d (c)^3 (d^-1)^2
rel (d^-1)^4 a (d)^4 (a^-1)^2
"""

GRIG_HNN_TEXT = """\
# HNN extension of the Grigorchuk group by t
gens a c d t
inv a c d
rel (a d)^4
rel (a d a c a c)^4
rel t^-1 a t a c a
rel t^-1 c t c d
rel t^-1 d t c
"""

GRIGORCHUK_TEXT = """\
gens a b c
inv a b c
rel (b c)^2
family grigorchuk-sigma
"""

PRESENTATION_ONLY = {
    "higman": HIGMAN_TEXT,
    "higman-variant": HIGMAN_VARIANT_TEXT,
    "grig-hnn": GRIG_HNN_TEXT,
}


def _letter_names(count: int, short: str, prefix: str) -> List[str]:
    if count <= len(short):
        return list(short[:count])
    return [f"{prefix}{i + 1}" for i in range(count)]


class ElementOracle(ABC):
    def __init__(self, name: str, presentation: Presentation):
        self.name = name
        self.presentation = presentation

    @property
    @abstractmethod
    def identity(self) -> Any:
        ...

    @abstractmethod
    def multiply(self, e: Any, letter: Letter) -> Any:
        ...

    @abstractmethod
    def canonical_key(self, e: Any) -> bytes:
        ...

    @abstractmethod
    def product(self, e: Any, f: Any) -> Any:
        ...

    def certifies_infinite_order(self, e: Any) -> bool:
        """True only when ``e`` is proven to have infinite order."""
        return False

    def describe(self, e: Any) -> str:
        return str(e)

    @property
    def degree(self) -> int:
        return self.presentation.degree

    def signed_letters(self) -> List[Letter]:
        return self.presentation.signed_letters()

    def evaluate(self, w: Union[GenWord, Sequence[Letter]]) -> Any:
        e = self.identity
        for letter in w:
            e = self.multiply(e, letter)
        return e

    def is_identity(self, e: Any) -> bool:
        return self.canonical_key(e) == self.canonical_key(self.identity)

    def equal(self, e: Any, f: Any) -> bool:
        return self.canonical_key(e) == self.canonical_key(f)


class ZdOracle(ElementOracle):
    def __init__(self, d: int):
        if d < 1:
            raise InvalidParameterError(f"zd needs d >= 1, got {d}")
        names = _letter_names(d, "xyz", "x")
        lines = ["gens " + " ".join(names)]
        for i in range(d):
            for j in range(i + 1, d):
                lines.append(f"rel {names[i]} {names[j]} {names[i]}^-1 {names[j]}^-1")
        name = {1: "z1", 2: "z2"}.get(d, f"zd:{d}")
        super().__init__(name, parse_presentation("\n".join(lines), name, relators_sufficient=True))
        self.d = d

    @property
    def identity(self) -> Tuple[int, ...]:
        return (0,) * self.d

    def multiply(self, e, letter):
        i, s = letter
        coords = list(e)
        coords[i] += s
        return tuple(coords)

    def product(self, e, f):
        return tuple(x + y for x, y in zip(e, f))

    def canonical_key(self, e) -> bytes:
        return ",".join(map(str, e)).encode()

    def certifies_infinite_order(self, e) -> bool:
        return any(e)


class FreeOracle(ElementOracle):
    def __init__(self, k: int):
        if k < 1:
            raise InvalidParameterError(f"free needs k >= 1, got {k}")
        names = _letter_names(k, "abcdefghijklmnopqrstuvwxyz", "g")
        name = f"free:{k}"
        super().__init__(name, parse_presentation("gens " + " ".join(names), name, relators_sufficient=True))

    @property
    def identity(self) -> Tuple[Letter, ...]:
        return ()

    def multiply(self, e, letter):
        if e and e[-1] == self.presentation.letter_inverse(letter):
            return e[:-1]
        return e + (letter,)

    def product(self, e, f):
        return free_reduce(e + f, self.presentation).letters

    def canonical_key(self, e) -> bytes:
        return self.presentation.format_word(e).encode()

    def describe(self, e) -> str:
        return self.presentation.format_word(e)

    def certifies_infinite_order(self, e) -> bool:
        # free groups are torsion free
        return bool(e)


class TreeOracle(ElementOracle):
    """Free product of Delta copies of Z/2; its Cayley graph is the Delta-regular tree."""

    def __init__(self, delta: int):
        if delta < 3:
            raise InvalidParameterError(f"tree needs Delta >= 3, got {delta}")
        names = _letter_names(delta, "abcdefghijklmnopqrstuvwxyz", "s")
        text = "gens " + " ".join(names) + "\ninv " + " ".join(names)
        name = f"tree:{delta}"
        super().__init__(name, parse_presentation(text, name, relators_sufficient=True))
        self.delta = delta

    @property
    def identity(self) -> Tuple[int, ...]:
        return ()

    def multiply(self, e, letter):
        i = letter[0]
        if e and e[-1] == i:
            return e[:-1]
        return e + (i,)

    def product(self, e, f):
        out = list(e)
        for i in f:
            if out and out[-1] == i:
                out.pop()
            else:
                out.append(i)
        return tuple(out)

    def canonical_key(self, e) -> bytes:
        return ",".join(map(str, e)).encode()

    def describe(self, e) -> str:
        return " ".join(self.presentation.generators[i].name for i in e)

    def certifies_infinite_order(self, e) -> bool:
        w = list(e)
        while len(w) >= 2 and w[0] == w[-1]:
            w = w[1:-1]
        return len(w) >= 2


@dataclass(frozen=True)
class BsElement:
    """The affine map t -> n^k t + num / n^exp, with exp minimal."""
    k: int
    num: int
    exp: int


class BsOracle(ElementOracle):
    """BS(1, n) = <x, y | x^-1 y x = y^n> acting by x: t -> n t, y: t -> t + 1.

    Words act left to right, so the product g h is the map h o g.
    """

    def __init__(self, n: int = 2):
        if n < 2:
            raise InvalidParameterError(f"BS(1, n) needs n >= 2, got {n}")
        text = f"gens x y\nrel x^-1 y x (y^-1)^{n}"
        name = "bs12" if n == 2 else f"bs:1,{n}"
        super().__init__(name, parse_presentation(text, name, relators_sufficient=True))
        self.n = n
        self._gens = {
            (0, 1): BsElement(1, 0, 0), (0, -1): BsElement(-1, 0, 0),
            (1, 1): BsElement(0, 1, 0), (1, -1): BsElement(0, -1, 0),
        }

    def _normalize(self, k: int, num: int, exp: int) -> BsElement:
        while exp > 0 and num % self.n == 0:
            num //= self.n
            exp -= 1
        return BsElement(k, num, exp)

    @property
    def identity(self) -> BsElement:
        return BsElement(0, 0, 0)

    def product(self, g: BsElement, h: BsElement) -> BsElement:
        if h.k >= 0:
            num_a, exp_a = g.num * self.n ** h.k, g.exp
        else:
            num_a, exp_a = g.num, g.exp - h.k
        top = max(exp_a, h.exp)
        num = num_a * self.n ** (top - exp_a) + h.num * self.n ** (top - h.exp)
        return self._normalize(g.k + h.k, num, top)

    def multiply(self, e, letter):
        return self.product(e, self._gens[letter])

    def canonical_key(self, e: BsElement) -> bytes:
        return f"{e.k}:{e.num}:{e.exp}".encode()

    def describe(self, e: BsElement) -> str:
        return f"t -> {self.n}^{e.k} t + {e.num}/{self.n}^{e.exp}"

    def certifies_infinite_order(self, e: BsElement) -> bool:
        return e.k != 0 or e.num != 0


class GrigorchukOracle(ElementOracle):
    def __init__(self):
        super().__init__("grigorchuk", parse_presentation(GRIGORCHUK_TEXT, "grigorchuk"))
        self._names = self.presentation.generator_names

    @property
    def identity(self) -> str:
        return ""

    def multiply(self, e, letter):
        return grig_append(e, self._names[letter[0]])

    def product(self, e, f):
        return grig_reduce(e + f)

    def evaluate(self, w):
        return grig_reduce(self._names[i] for i, _ in w)

    def canonical_key(self, e) -> bytes:
        return grig_portrait_key(e).encode()

    def describe(self, e) -> str:
        return e


GROUP_NAME_RE = re.compile(r"^(zd|free|tree):(\d+)$")
BS_NAME_RE = re.compile(r"^bs:1,(\d+)$")


def _parse_builtin(name: str) -> Tuple[str, int]:
    name = name.strip().lower()
    if name in ("z1", "z2"):
        return "zd", int(name[1])
    if name == "bs12":
        return "bs", 2
    if name == "grigorchuk":
        return "grigorchuk", 0
    if name in PRESENTATION_ONLY:
        return name, 0
    m = GROUP_NAME_RE.match(name)
    if m:
        return m.group(1), int(m.group(2))
    if name.startswith("bs:"):
        m = BS_NAME_RE.match(name)
        if not m:
            raise UnsupportedGroupError(f"Only BS(1, n) is supported exactly, got '{name}'", {"group": name})
        return "bs", int(m.group(1))
    raise UnknownGroupError(f"Unknown group '{name}'", {"known": registry_names()})


def registry_names() -> List[str]:
    return ["z1", "z2", "zd:<d>", "free:<k>", "tree:<Delta>", "bs12", "bs:1,<n>",
            "grigorchuk", "higman", "higman-variant", "grig-hnn"]


def oracle_for(name: str) -> ElementOracle:
    kind, param = _parse_builtin(name)
    if kind in PRESENTATION_ONLY:
        raise UnsupportedGroupError(f"'{kind}' is registered as a presentation only", {"group": kind})
    if kind == "zd":
        return ZdOracle(param)
    if kind == "free":
        return FreeOracle(param)
    if kind == "tree":
        return TreeOracle(param)
    if kind == "bs":
        return BsOracle(param)
    return GrigorchukOracle()


def presentation_for(name: str) -> Presentation:
    kind, _ = _parse_builtin(name)
    if kind in PRESENTATION_ONLY:
        return parse_presentation(PRESENTATION_ONLY[kind], kind, relators_sufficient=True)
    return oracle_for(name).presentation


@dataclass
class RelatorCheck:
    relator: str
    source: str
    passed: bool


@dataclass
class RelatorReport:
    group: str
    family_cap: int
    checks: List[RelatorCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": self.group,
            "family_cap": self.family_cap,
            "all_passed": self.all_passed,
            "checks": [{"relator": c.relator, "source": c.source, "passed": c.passed} for c in self.checks],
        }


def _check_alphabet(o: ElementOracle, p: Presentation) -> None:
    ours = [(g.name, g.involution) for g in o.presentation.generators]
    theirs = [(g.name, g.involution) for g in p.generators]
    if ours != theirs:
        raise GeneratorMismatchError("Oracle and presentation use different generators",
                                     {"oracle": ours, "presentation": theirs})


def verify_relators(o: ElementOracle, p: Presentation, family_cap: int = 6) -> RelatorReport:
    _check_alphabet(o, p)
    report = RelatorReport(o.name, family_cap)
    for r in p.relators:
        report.checks.append(RelatorCheck(p.format_word(r), "relator", o.is_identity(o.evaluate(r))))
    for k in range(family_cap + 1):
        for member in p.family_members(k):
            report.checks.append(RelatorCheck(p.format_word(member), f"{p.relator_family}[{k}]",
                                              o.is_identity(o.evaluate(member))))
    failed = [c.relator for c in report.checks if not c.passed]
    if failed:
        logger.warning(f"{len(failed)} relators fail on {o.name}")
    return report


@dataclass
class ElementOrder:
    order: Optional[int]
    cap: int
    infinite: bool = False
    method: str = "scan"

    @property
    def exceeds_cap(self) -> bool:
        return self.order is None

    def to_dict(self) -> Dict[str, Any]:
        return {"order": self.order, "cap": self.cap, "exceeds_cap": self.exceeds_cap,
                "infinite_certified": self.infinite, "method": self.method}


def order_of_element(o: ElementOracle, e: Any, cap: int = DEFAULT_ORDER_CAP) -> ElementOrder:
    if cap < 1:
        raise InvalidParameterError(f"cap must be >= 1, got {cap}")
    if o.is_identity(e):
        return ElementOrder(1, cap, method="identity")
    if o.certifies_infinite_order(e):
        return ElementOrder(None, cap, infinite=True, method="certificate")

    # the first 2^j with e^(2^j) = 1 is the exact order
    power, exponent = e, 1
    while exponent * 2 <= cap:
        power = o.product(power, power)
        exponent *= 2
        if o.is_identity(power):
            return ElementOrder(exponent, cap, method="doubling")

    power = e
    for n in range(2, cap + 1):
        power = o.product(power, e)
        if o.is_identity(power):
            return ElementOrder(n, cap, method="scan")
    return ElementOrder(None, cap, method="scan")


def element_order(o: ElementOracle, w: GenWord, cap: int = DEFAULT_ORDER_CAP) -> ElementOrder:
    return order_of_element(o, o.evaluate(w), cap)
