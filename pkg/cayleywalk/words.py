"""Group presentations and words over a generator alphabet.

Words are tuples of signed letters ``(generator index, sign)``. Involution generators
always carry sign +1, so ``s s`` cancels during free reduction the same way ``x x^-1``
does.

Presentation source grammar (line oriented, ``#`` starts a comment)::

    gens a b c          declare generators
    inv a b c           mark declared generators as involutions
    rel (a b)^4 c^-1    one relator; powers (...)^n with n >= 1 are expanded
    family NAME         attach a builtin relator family
"""

import hashlib
import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import PresentationSyntaxError, ValidationError, WordError

logger = logging.getLogger(__name__)

Letter = Tuple[int, int]

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<lparen>\()|(?P<rparen>\))"
    r"|(?P<caret>\^)|(?P<int>-?\d+)|(?P<bad>\S))"
)

GRIG_SIGMA = {"a": "aca", "b": "d", "c": "b", "d": "c"}


@dataclass(frozen=True)
class Generator:
    name: str
    index: int
    involution: bool = False


@dataclass(frozen=True)
class GenWord:
    letters: Tuple[Letter, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: "GenWord") -> "GenWord":
        # plain concatenation; callers reduce through a Presentation
        return GenWord(self.letters + other.letters)

    @property
    def is_empty(self) -> bool:
        return not self.letters


@dataclass(frozen=True)
class Presentation:
    generators: Tuple[Generator, ...]
    relators: Tuple[GenWord, ...] = ()
    relator_family: Optional[str] = None
    name: str = field(default="", compare=False)
    relators_sufficient: bool = field(default=False, compare=False)

    @property
    def generator_names(self) -> List[str]:
        return [g.name for g in self.generators]

    @property
    def rank(self) -> int:
        return len(self.generators)

    def index_of(self, name: str) -> int:
        for g in self.generators:
            if g.name == name:
                return g.index
        raise WordError(f"Unknown generator '{name}'", {"generators": self.generator_names})

    def has_generator(self, name: str) -> bool:
        return any(g.name == name for g in self.generators)

    def is_involution(self, index: int) -> bool:
        return self.generators[index].involution

    def signed_letters(self) -> List[Letter]:
        """All symmetric-generating-set letters: x, x^-1 for ordinary generators, s for involutions."""
        letters: List[Letter] = []
        for g in self.generators:
            letters.append((g.index, 1))
            if not g.involution:
                letters.append((g.index, -1))
        return letters

    @property
    def degree(self) -> int:
        return len(self.signed_letters())

    def letter_inverse(self, letter: Letter) -> Letter:
        i, s = letter
        return (i, 1) if self.generators[i].involution else (i, -s)

    def letter_name(self, letter: Letter) -> str:
        i, s = letter
        name = self.generators[i].name
        return name if s > 0 else f"{name}^-1"

    def letter(self, token: str) -> Letter:
        if token.endswith("^-1"):
            index = self.index_of(token[:-3])
            return (index, 1) if self.generators[index].involution else (index, -1)
        return (self.index_of(token), 1)

    def format_word(self, w: Union[GenWord, Sequence[Letter]]) -> str:
        return " ".join(self.letter_name(l) for l in w)

    def inverse(self, w: GenWord) -> GenWord:
        return GenWord(tuple(self.letter_inverse(l) for l in reversed(w.letters)))

    def multiply(self, u: GenWord, v: GenWord) -> GenWord:
        return free_reduce(u.letters + v.letters, self)

    def power(self, w: GenWord, n: int) -> GenWord:
        if n < 0:
            return self.power(self.inverse(w), -n)
        return free_reduce(w.letters * n, self)

    def parse_word(self, text: str) -> GenWord:
        """Parse ``text`` in the relator term grammar and return it freely reduced."""
        tokens = _tokenize(text, 1, 1)
        if not tokens:
            return GenWord()
        raw, pos = _parse_terms(tokens, 0, self, 1, nested=False)
        return free_reduce(raw, self)

    def family_members(self, k: int) -> List[GenWord]:
        """Relators contributed by the attached family at index ``k``."""
        if self.relator_family is None:
            return []
        return [w for w in RELATOR_FAMILIES[self.relator_family](self, k) if not w.is_empty]

    def family_relators(self, cap: int) -> List[GenWord]:
        members: List[GenWord] = []
        for k in range(cap + 1):
            members.extend(self.family_members(k))
        return members

    def all_relators(self, family_cap: int = 0) -> List[GenWord]:
        return list(self.relators) + self.family_relators(family_cap)

    def serialize(self) -> str:
        lines = ["gens " + " ".join(self.generator_names)]
        involutions = [g.name for g in self.generators if g.involution]
        if involutions:
            lines.append("inv " + " ".join(involutions))
        for r in self.relators:
            lines.append("rel " + self.format_word(r))
        if self.relator_family:
            lines.append("family " + self.relator_family)
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def summary(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "generators": self.generator_names,
            "involutions": [g.name for g in self.generators if g.involution],
            "relators": [self.format_word(r) for r in self.relators],
            "relator_family": self.relator_family,
            "relators_sufficient": self.relators_sufficient,
            "degree": self.degree,
            "digest": self.digest(),
        }


def free_reduce(w: Iterable[Union[Letter, str]], gens: Presentation) -> GenWord:
    stack: List[Letter] = []
    n = gens.rank
    for item in w:
        i, s = gens.letter(item) if isinstance(item, str) else item
        if not 0 <= i < n or s not in (1, -1):
            raise WordError(f"Invalid letter {(i, s)!r}", {"rank": n})
        involution = gens.generators[i].involution
        if involution:
            s = 1
        if stack and stack[-1][0] == i and (involution or stack[-1][1] == -s):
            stack.pop()
        else:
            stack.append((i, s))
    return GenWord(tuple(stack))


def exponent_vector(w: Union[GenWord, Sequence[Letter]], p: Presentation) -> np.ndarray:
    vec = np.zeros(p.rank, dtype=np.int64)
    for i, s in w:
        if not 0 <= i < p.rank:
            raise WordError(f"Letter index {i} outside presentation", {"rank": p.rank})
        vec[i] += s
    return vec


def _sigma_image(name: str, k: int) -> str:
    if name not in GRIG_SIGMA:
        raise WordError(f"Substitution is defined on a, b, c, d only, got '{name}'")
    image = name
    for _ in range(k):
        image = "".join(GRIG_SIGMA[ch] for ch in image)
    return image


def _names_to_letters(names: str, sign: int, p: Presentation) -> List[Letter]:
    letters: List[Letter] = []
    for ch in names:
        if p.has_generator(ch):
            letters.append(p.letter(ch) if sign > 0 else p.letter_inverse(p.letter(ch)))
        elif ch == "d" and p.has_generator("b") and p.has_generator("c"):
            # d = bc
            pair = [p.letter("b"), p.letter("c")]
            if sign < 0:
                pair = [p.letter_inverse(l) for l in reversed(pair)]
            letters.extend(pair)
        else:
            raise WordError(f"Presentation has no generator for '{ch}'", {"generators": p.generator_names})
    return letters


def grig_substitute(w: GenWord, k: int, p: Presentation) -> GenWord:
    """Apply a->aca, b->d, c->b, d->c ``k`` times to ``w`` and reduce over ``p``."""
    if k < 0:
        raise ValidationError(f"Substitution power must be >= 0, got {k}")
    raw: List[Letter] = []
    for i, s in w:
        image = _sigma_image(p.generators[i].name, k)
        if s < 0:
            image = image[::-1]
        raw.extend(_names_to_letters(image, s, p))
    return free_reduce(raw, p)


GRIG_FAMILY_BASES = ("adadadad", "adacacadacacadacacadacac")


def _grigorchuk_sigma_family(p: Presentation, k: int) -> List[GenWord]:
    members = []
    for base in GRIG_FAMILY_BASES:
        image = "".join(_sigma_image(ch, k) for ch in base)
        members.append(free_reduce(_names_to_letters(image, 1, p), p))
    return members


RELATOR_FAMILIES: Dict[str, Callable[[Presentation, int], List[GenWord]]] = {
    "grigorchuk-sigma": _grigorchuk_sigma_family,
}


def _tokenize(text: str, line_no: int, col_offset: int) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            break
        kind = m.lastgroup
        value = m.group(kind)
        column = m.start(kind) + col_offset
        if kind == "bad":
            raise PresentationSyntaxError(f"Unexpected character '{value}'", line_no, column)
        tokens.append((kind, value, column))
        pos = m.end()
    return tokens


def _parse_terms(tokens, pos: int, gens: Presentation, line_no: int, nested: bool) -> Tuple[List[Letter], int]:
    letters: List[Letter] = []
    start_pos = pos
    while pos < len(tokens):
        kind, value, column = tokens[pos]
        if kind == "ident":
            if not gens.has_generator(value):
                raise PresentationSyntaxError(f"Undeclared generator '{value}'", line_no, column)
            index = gens.index_of(value)
            pos += 1
            if pos < len(tokens) and tokens[pos][0] == "caret":
                if pos + 1 >= len(tokens) or tokens[pos + 1][1] != "-1":
                    raise PresentationSyntaxError("Only '^-1' may follow a generator", line_no, tokens[pos][2])
                if gens.generators[index].involution:
                    raise PresentationSyntaxError(
                        f"Involution generator '{value}' takes no inverse", line_no, column)
                letters.append((index, -1))
                pos += 2
            else:
                letters.append((index, 1))
        elif kind == "lparen":
            inner, pos = _parse_terms(tokens, pos + 1, gens, line_no, nested=True)
            if pos >= len(tokens) or tokens[pos][0] != "rparen":
                raise PresentationSyntaxError("Missing ')'", line_no, column)
            pos += 1
            if pos + 1 >= len(tokens) or tokens[pos][0] != "caret" or tokens[pos + 1][0] != "int":
                raise PresentationSyntaxError("Group must be followed by '^n'", line_no, column)
            exponent = int(tokens[pos + 1][1])
            if exponent < 1:
                raise PresentationSyntaxError(f"Power must be >= 1, got {exponent}", line_no, tokens[pos + 1][2])
            letters.extend(inner * exponent)
            pos += 2
        elif kind == "rparen":
            if not nested:
                raise PresentationSyntaxError("Unmatched ')'", line_no, column)
            if pos == start_pos:
                raise PresentationSyntaxError("Empty group '()'", line_no, column)
            return letters, pos
        else:
            raise PresentationSyntaxError(f"Unexpected token '{value}'", line_no, column)
    if nested:
        raise PresentationSyntaxError("Missing ')'", line_no, tokens[-1][2] if tokens else 0)
    return letters, pos


def _split_lines(text: str):
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        stripped = body.strip()
        if not stripped:
            continue
        keyword = stripped.split(None, 1)[0]
        rest_start = body.index(keyword) + len(keyword)
        yield line_no, keyword, body[rest_start:], rest_start + 1


def parse_presentation(text: str, name: str = "", relators_sufficient: bool = False) -> Presentation:
    lines = list(_split_lines(text))

    generators: List[Generator] = []
    seen: Dict[str, int] = {}
    for line_no, keyword, rest, offset in lines:
        if keyword not in ("gens", "inv", "rel", "family"):
            raise PresentationSyntaxError(f"Unknown keyword '{keyword}'", line_no, 1)
        if keyword != "gens":
            continue
        tokens = _tokenize(rest, line_no, offset)
        if not tokens:
            raise PresentationSyntaxError("'gens' needs at least one identifier", line_no, offset)
        for kind, value, column in tokens:
            if kind != "ident":
                raise PresentationSyntaxError(f"Expected identifier, got '{value}'", line_no, column)
            if value in seen:
                raise PresentationSyntaxError(f"Duplicate generator '{value}'", line_no, column)
            seen[value] = len(generators)
            generators.append(Generator(value, len(generators)))
    if not generators:
        raise PresentationSyntaxError("No generators declared", 1, 1)

    for line_no, keyword, rest, offset in lines:
        if keyword != "inv":
            continue
        for kind, value, column in _tokenize(rest, line_no, offset):
            if kind != "ident":
                raise PresentationSyntaxError(f"Expected identifier, got '{value}'", line_no, column)
            if value not in seen:
                raise PresentationSyntaxError(f"Undeclared generator '{value}'", line_no, column)
            g = generators[seen[value]]
            generators[g.index] = Generator(g.name, g.index, True)

    skeleton = Presentation(tuple(generators), (), None, name, relators_sufficient)
    relators: List[GenWord] = []
    family: Optional[str] = None
    for line_no, keyword, rest, offset in lines:
        if keyword == "rel":
            tokens = _tokenize(rest, line_no, offset)
            if not tokens:
                raise PresentationSyntaxError("'rel' needs at least one term", line_no, offset)
            raw, _ = _parse_terms(tokens, 0, skeleton, line_no, nested=False)
            reduced = free_reduce(raw, skeleton)
            if reduced.is_empty:
                logger.warning(f"Relator on line {line_no} reduces to the empty word; skipped")
                continue
            relators.append(reduced)
        elif keyword == "family":
            parts = rest.split()
            if len(parts) != 1:
                raise PresentationSyntaxError("'family' takes exactly one builtin name", line_no, offset)
            if parts[0] not in RELATOR_FAMILIES:
                raise PresentationSyntaxError(f"Unknown relator family '{parts[0]}'", line_no, offset + 1)
            if family is not None:
                raise PresentationSyntaxError("Only one relator family may be attached", line_no, 1)
            family = parts[0]

    presentation = Presentation(tuple(generators), tuple(relators), family, name, relators_sufficient)
    if family is not None:
        try:
            presentation.family_relators(0)
        except WordError as e:
            raise PresentationSyntaxError(f"Family '{family}' does not fit the generators: {e.message}", 1, 1)
    return presentation
