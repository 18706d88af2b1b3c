"""Words and finite group presentations.

Generators are interned to small integer ids per presentation; words store
ids, not names.  Everything here is immutable after construction and safe to
share across threads or processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, TYPE_CHECKING

if TYPE_CHECKING:
    from .homology import IntMatrix

__all__ = [
    "PresentationError",
    "ParseError",
    "Generator",
    "Word",
    "free_reduce",
    "commutator",
    "FinitePresentation",
    "GeneratorMap",
    "parse_presentation",
    "parse_word",
    "exponent_matrix",
    "direct_product",
    "tietze_simplify",
    "euler_characteristic",
]

_NAME_HEAD = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_NAME_TAIL = _NAME_HEAD | set("0123456789")


class PresentationError(ValueError):
    """Invalid word or presentation data."""


class ParseError(PresentationError):
    """Syntax error in presentation text, with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


def _valid_name(name: str) -> bool:
    return bool(name) and name[0] in _NAME_HEAD and all(c in _NAME_TAIL for c in name)


@dataclass(frozen=True)
class Generator:
    """A named generator.  Names are ASCII identifiers not starting with a digit."""

    name: str

    def __post_init__(self):
        if not _valid_name(self.name):
            raise PresentationError(f"invalid generator name: {self.name!r}")

    def __str__(self) -> str:
        return self.name


def _reduce_syllables(raw: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Free reduction: merge adjacent syllables on the same generator, drop zeros."""
    stack: list[list[int]] = []
    for g, e in raw:
        if e == 0:
            continue
        if stack and stack[-1][0] == g:
            stack[-1][1] += e
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([g, e])
    return tuple((g, e) for g, e in stack)


class Word:
    """A freely reduced word: a sequence of (generator id, nonzero exponent)
    syllables with adjacent syllables on distinct generators.  The empty word
    is the identity."""

    __slots__ = ("syllables", "_hash")

    def __init__(self, syllables: Iterable[tuple[int, int]] = ()):
        syl = tuple((int(g), int(e)) for g, e in syllables)
        for g, e in syl:
            if g < 0:
                raise PresentationError(f"negative generator id {g}")
            if e == 0:
                raise PresentationError("zero exponent in word syllable")
        for (g1, _), (g2, _) in zip(syl, syl[1:]):
            if g1 == g2:
                raise PresentationError("word is not freely reduced")
        self.syllables = syl
        self._hash = hash(syl)

    @classmethod
    def from_syllables(cls, raw: Iterable[tuple[int, int]], cyclic: bool = False) -> "Word":
        """Build a word from an arbitrary syllable list, freely reducing it.
        With ``cyclic`` set, also cyclically reduce."""
        syl = _reduce_syllables(raw)
        if cyclic:
            syl = _cyclic_reduce(syl)
        w = cls.__new__(cls)
        w.syllables = syl
        w._hash = hash(syl)
        return w

    @classmethod
    def generator(cls, g: int, e: int = 1) -> "Word":
        return cls(((g, e),))

    def __bool__(self) -> bool:
        return bool(self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def __len__(self) -> int:
        """Word length counted in letters."""
        return sum(abs(e) for _, e in self.syllables)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.syllables == other.syllables

    def __hash__(self) -> int:
        return self._hash

    def __mul__(self, other: "Word") -> "Word":
        return Word.from_syllables(self.syllables + other.syllables)

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return Word()
        base = self if n > 0 else self.inverse()
        return Word.from_syllables(base.syllables * abs(n))

    def inverse(self) -> "Word":
        w = Word.__new__(Word)
        w.syllables = tuple((g, -e) for g, e in reversed(self.syllables))
        w._hash = hash(w.syllables)
        return w

    def __invert__(self) -> "Word":
        return self.inverse()

    def cyclically_reduced(self) -> "Word":
        return Word.from_syllables(self.syllables, cyclic=True)

    def letters(self) -> Iterator[int]:
        """Signed 1-based letters: generator id g yields g+1 or -(g+1)."""
        for g, e in self.syllables:
            step = g + 1 if e > 0 else -(g + 1)
            for _ in range(abs(e)):
                yield step

    def generator_ids(self) -> set[int]:
        return {g for g, _ in self.syllables}

    def max_generator_id(self) -> int:
        return max((g for g, _ in self.syllables), default=-1)

    def shift_ids(self, offset: int) -> "Word":
        w = Word.__new__(Word)
        w.syllables = tuple((g + offset, e) for g, e in self.syllables)
        w._hash = hash(w.syllables)
        return w

    def remap_ids(self, mapping: Sequence[int]) -> "Word":
        """Rename generators by id, preserving reducedness (mapping injective)."""
        return Word.from_syllables((mapping[g], e) for g, e in self.syllables)

    def substitute(self, images: Sequence["Word"]) -> "Word":
        """Replace generator g by images[g], freely reducing the result."""
        out: list[tuple[int, int]] = []
        for g, e in self.syllables:
            img = images[g] if e > 0 else images[g].inverse()
            for _ in range(abs(e)):
                out.extend(img.syllables)
        return Word.from_syllables(out)

    def exponent_sums(self, ngens: int) -> list[int]:
        sums = [0] * ngens
        for g, e in self.syllables:
            sums[g] += e
        return sums

    def render(self, names: Sequence[str]) -> str:
        if not self.syllables:
            return "1"
        parts = []
        for g, e in self.syllables:
            parts.append(names[g] if e == 1 else f"{names[g]}^{e}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Word({list(self.syllables)!r})"


def _cyclic_reduce(syl: tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
    """Cancel inverse letters across the word boundary until none remain."""
    out = list(syl)
    while (
        len(out) >= 2
        and out[0][0] == out[-1][0]
        and (out[0][1] > 0) != (out[-1][1] > 0)
    ):
        g = out[0][0]
        e = out[0][1] + out[-1][1]
        middle = out[1:-1]
        if e == 0:
            out = middle
        elif abs(out[0][1]) > abs(out[-1][1]):
            out = [(g, e)] + middle
        else:
            out = middle + [(g, e)]
    return tuple(out)


def free_reduce(raw: Iterable[tuple[int, int]], cyclic: bool = False) -> Word:
    """Freely reduce a raw syllable list; optionally cyclically reduce too."""
    return Word.from_syllables(raw, cyclic=cyclic)


def commutator(u: Word, v: Word) -> Word:
    """[u, v] = u v u^-1 v^-1, freely reduced."""
    return Word.from_syllables(
        u.syllables + v.syllables + u.inverse().syllables + v.inverse().syllables
    )


class FinitePresentation:
    """An ordered generator list plus freely reduced, nonempty relator words."""

    __slots__ = ("generators", "relators", "_index")

    def __init__(self, generators: Sequence[Generator | str], relators: Sequence[Word] = ()):
        gens = tuple(g if isinstance(g, Generator) else Generator(g) for g in generators)
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            dup = next(n for i, n in enumerate(names) if n in names[:i])
            raise PresentationError(f"duplicate generator name: {dup!r}")
        rels = tuple(relators)
        for i, r in enumerate(rels):
            if not isinstance(r, Word):
                raise PresentationError(f"relator {i} is not a Word")
            if r.is_identity():
                raise PresentationError(f"relator {i} is empty after reduction")
            if r.max_generator_id() >= len(gens):
                raise PresentationError(f"relator {i} uses an undeclared generator id")
        self.generators = gens
        self.relators = rels
        self._index = {g.name: i for i, g in enumerate(gens)}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.generators)

    def generator_id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PresentationError(f"no generator named {name!r}") from None

    def generator_word(self, name: str) -> Word:
        return Word.generator(self.generator_id(name))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FinitePresentation)
            and self.names == other.names
            and self.relators == other.relators
        )

    def __hash__(self) -> int:
        return hash((self.names, self.relators))

    def render(self) -> str:
        gens = " ".join(self.names)
        rels = ", ".join(r.render(self.names) for r in self.relators)
        return f"< {gens} | {rels} >" if rels else f"< {gens} | >"

    def __repr__(self) -> str:
        return f"FinitePresentation({self.render()!r})"

    def total_relator_length(self) -> int:
        return sum(len(r) for r in self.relators)

    def exponent_matrix(self) -> "IntMatrix":
        """Row i = exponent sums of relator i over all generators."""
        from .homology import IntMatrix

        n = len(self.generators)
        return IntMatrix([r.exponent_sums(n) for r in self.relators], cols=n)


# ---------------------------------------------------------------------------
# Parsing
#
# presentation := "<" gens "|" relators ">"
# gens := ident+                     relators := relator ("," relator)*
# relator := word | word "=" word    (u = v means u v^-1)
# word := atom+
# atom := ident | ident "^" int | "[" word "," word "]" | "(" word ")" "^" int
#
# "#" starts a line comment.  An empty relator list is accepted so that free
# groups round-trip through render().
# ---------------------------------------------------------------------------

_PUNCT = {"<": "LT", ">": "GT", "|": "PIPE", ",": "COMMA", "=": "EQ",
          "^": "CARET", "[": "LBRACK", "]": "RBRACK", "(": "LPAREN", ")": "RPAREN"}


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind: str, value, line: int, col: int):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            i += 1
            col += 1
        elif c == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif c in _PUNCT:
            tokens.append(_Token(_PUNCT[c], c, line, col))
            i += 1
            col += 1
        elif c in _NAME_HEAD:
            start = i
            while i < n and text[i] in _NAME_TAIL:
                i += 1
            tokens.append(_Token("IDENT", text[start:i], line, col))
            col += i - start
        elif c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            start = i
            i += 1
            while i < n and text[i].isdigit():
                i += 1
            tokens.append(_Token("INT", int(text[start:i]), line, col))
            col += i - start
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(_Token("EOF", None, line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.value!r}", tok.line, tok.col)
        return tok

    def parse_presentation(self) -> FinitePresentation:
        self.expect("LT")
        gens: list[str] = []
        while self.peek().kind == "IDENT":
            tok = self.next()
            if tok.value in gens:
                raise ParseError(f"duplicate generator {tok.value!r}", tok.line, tok.col)
            gens.append(tok.value)
        if not gens:
            tok = self.peek()
            raise ParseError("expected at least one generator", tok.line, tok.col)
        self.expect("PIPE")
        index = {name: i for i, name in enumerate(gens)}
        relators: list[Word] = []
        if self.peek().kind not in ("GT", "EOF"):
            while True:
                relators.append(self.parse_relator(index))
                if self.peek().kind == "COMMA":
                    self.next()
                else:
                    break
        self.expect("GT")
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"trailing input {tok.value!r}", tok.line, tok.col)
        return FinitePresentation(gens, relators)

    def parse_relator(self, index: dict[str, int]) -> Word:
        tok_start = self.peek()
        raw = self.parse_word(index)
        if self.peek().kind == "EQ":
            self.next()
            rhs = self.parse_word(index)
            raw = raw + [(g, -e) for g, e in reversed(rhs)]
        word = Word.from_syllables(raw)
        if word.is_identity():
            raise ParseError("empty relator after reduction", tok_start.line, tok_start.col)
        return word

    def parse_word(self, index: dict[str, int]) -> list[tuple[int, int]]:
        out = self.parse_atom(index)
        while self.peek().kind in ("IDENT", "LBRACK", "LPAREN"):
            out.extend(self.parse_atom(index))
        return out

    def parse_atom(self, index: dict[str, int]) -> list[tuple[int, int]]:
        tok = self.next()
        if tok.kind == "IDENT":
            if tok.value not in index:
                raise ParseError(f"undeclared generator {tok.value!r}", tok.line, tok.col)
            g = index[tok.value]
            if self.peek().kind == "CARET":
                self.next()
                e = self.expect("INT").value
                return [(g, e)] if e != 0 else []
            return [(g, 1)]
        if tok.kind == "LBRACK":
            u = self.parse_word(index)
            self.expect("COMMA")
            v = self.parse_word(index)
            self.expect("RBRACK")
            return u + v + [(g, -e) for g, e in reversed(u)] + [(g, -e) for g, e in reversed(v)]
        if tok.kind == "LPAREN":
            u = self.parse_word(index)
            self.expect("RPAREN")
            self.expect("CARET")
            e = self.expect("INT").value
            if e == 0:
                return []
            if e < 0:
                u = [(g, -x) for g, x in reversed(u)]
            return u * abs(e)
        raise ParseError(f"expected a word, found {tok.value!r}", tok.line, tok.col)


def parse_presentation(text: str) -> FinitePresentation:
    """Parse presentation text, returning a presentation with freely reduced
    relators and generators in written order."""
    return _Parser(text).parse_presentation()


def parse_word(text: str, presentation: FinitePresentation) -> Word:
    """Parse a single word in the generators of ``presentation``."""
    parser = _Parser(text)
    index = {name: i for i, name in enumerate(presentation.names)}
    raw = parser.parse_word(index)
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.value!r}", tok.line, tok.col)
    return Word.from_syllables(raw)


# ---------------------------------------------------------------------------
# Presentation-level operations
# ---------------------------------------------------------------------------


def exponent_matrix(presentation: FinitePresentation) -> "IntMatrix":
    """|relators| x |generators| matrix of exponent sums."""
    return presentation.exponent_matrix()


def euler_characteristic(presentation: FinitePresentation) -> int:
    """Euler characteristic of the presentation 2-complex: 1 - |A| + |R|."""
    return 1 - len(presentation.generators) + len(presentation.relators)


def _suffix_names(p1: FinitePresentation, p2: FinitePresentation) -> tuple[list[str], list[str]]:
    if not (set(p1.names) & set(p2.names)):
        return list(p1.names), list(p2.names)
    names1 = [f"{n}_1" for n in p1.names]
    names2 = [f"{n}_2" for n in p2.names]
    combined = names1 + names2
    if len(set(combined)) != len(combined):
        raise PresentationError("generator name clash after suffixing in direct product")
    return names1, names2


def direct_product(p1: FinitePresentation, p2: FinitePresentation) -> FinitePresentation:
    """Presentation of the direct product: both relator sets plus all
    commutators [g1, g2].  Colliding generator names get _1/_2 suffixes."""
    names1, names2 = _suffix_names(p1, p2)
    k = len(p1.generators)
    relators = list(p1.relators) + [r.shift_ids(k) for r in p2.relators]
    for i in range(k):
        for j in range(len(p2.generators)):
            relators.append(commutator(Word.generator(i), Word.generator(k + j)))
    return FinitePresentation(names1 + names2, relators)


def _cyclic_canonical(word: Word) -> tuple:
    """Canonical form of a relator up to rotation and inversion, for
    duplicate detection."""
    letters = tuple(word.cyclically_reduced().letters())
    if not letters:
        return ()
    best = None
    for w in (letters, tuple(-x for x in reversed(letters))):
        for s in range(len(w)):
            rot = w[s:] + w[:s]
            if best is None or rot < best:
                best = rot
    return best


def _drop_generator(names: list[str], relators: list[Word], g: int,
                    image: Word) -> tuple[list[str], list[Word]]:
    """Substitute ``image`` (a word avoiding g) for generator g and remove g."""
    mapping = list(range(len(names)))
    images = []
    for h in range(len(names)):
        if h == g:
            images.append(image)
        else:
            new_id = h if h < g else h - 1
            mapping[h] = new_id
            images.append(Word.generator(h))
    substituted = [r.substitute(images) for r in relators]
    out_names = names[:g] + names[g + 1:]
    out_rels = [w.remap_ids(mapping) for w in substituted]
    return out_names, out_rels


def _find_elimination(names: list[str], relators: list[Word]) -> tuple[int, int, Word] | None:
    """Find (relator index, generator, image word) for a sound generator
    elimination that does not increase total relator length."""
    total = sum(len(r) for r in relators)
    best = None
    for ri, r in enumerate(relators):
        counts: dict[int, int] = {}
        for g, e in r.syllables:
            counts[g] = counts.get(g, 0) + abs(e)
        for g, occ in counts.items():
            if occ != 1:
                continue
            # r = p g^s q  =>  g = (p^-1 q^-1)^s
            letters = list(r.syllables)
            pos = next(i for i, (h, e) in enumerate(letters) if h == g)
            sign = letters[pos][1]
            prefix = Word.from_syllables(letters[:pos])
            suffix = Word.from_syllables(letters[pos + 1:])
            image = (prefix.inverse() * suffix.inverse())
            if sign < 0:
                image = image.inverse()
            others = relators[:ri] + relators[ri + 1:]
            uses = sum(
                sum(abs(e) for h, e in s.syllables if h == g) for s in others
            )
            new_total = total - len(r)
            if uses:
                imgs = [Word.generator(h) if h != g else image for h in range(len(names))]
                new_total = sum(len(s.substitute(imgs)) for s in others)
            if new_total <= total:
                key = (new_total, g, ri)
                if best is None or key < best[0]:
                    best = (key, ri, g, image)
    if best is None:
        return None
    return best[1], best[2], best[3]


def _find_subword_shortening(relators: list[Word]) -> tuple[int, Word] | None:
    """Find a relator that can be shortened by replacing a long common
    subword with the inverse complement of another relator."""
    sym: list[tuple[tuple[int, ...], int]] = []
    for si, s in enumerate(relators):
        letters = tuple(s.cyclically_reduced().letters())
        if not letters:
            continue
        for base in (letters, tuple(-x for x in reversed(letters))):
            for k in range(len(base)):
                sym.append((base[k:] + base[:k], si))
    for ri, r in enumerate(relators):
        letters = tuple(r.letters())
        n = len(letters)
        for rot, si in sym:
            if si == ri:
                continue
            m = len(rot)
            need = m // 2 + 1
            if need > n:
                continue
            for start in range(n - need + 1):
                length = 0
                while (start + length < n and length < m
                       and letters[start + length] == rot[length]):
                    length += 1
                if length >= need:
                    # letters[start:start+length] == rot[:length]; replace by
                    # the inverse of the rest of rot
                    rest = rot[length:]
                    repl = [-x for x in reversed(rest)]
                    new_letters = list(letters[:start]) + repl + list(letters[start + length:])
                    new_word = Word.from_syllables(
                        (abs(x) - 1, 1 if x > 0 else -1) for x in new_letters
                    )
                    if len(new_word) < len(r):
                        return ri, new_word
    return None


def tietze_simplify(presentation: FinitePresentation, budget: int = 100) -> FinitePresentation:
    """Greedy, budget-bounded Tietze simplification.

    Sound moves only: cyclic reduction, duplicate and freely redundant relator
    removal, subword shortening against other relators, and elimination of a
    generator defined by a relator in which it occurs exactly once.  The
    result presents an isomorphic group and never exceeds the input in
    generator count or total relator length.  A budget of 0 returns the input
    unchanged.
    """
    if budget < 0:
        raise PresentationError("budget must be nonnegative")
    if budget == 0:
        return presentation
    names = list(presentation.names)
    relators = list(presentation.relators)
    steps = 0

    def spend() -> bool:
        nonlocal steps
        steps += 1
        return steps >= budget

    changed = True
    while changed and steps < budget:
        changed = False
        # cyclic reduction and empty-relator removal
        cleaned: list[Word] = []
        for r in relators:
            c = r.cyclically_reduced()
            if c.is_identity():
                changed = True
                spend()
                continue
            if c != r:
                changed = True
                spend()
            cleaned.append(c)
        relators = cleaned
        # duplicates up to rotation and inversion
        seen: set[tuple] = set()
        unique: list[Word] = []
        for r in relators:
            key = _cyclic_canonical(r)
            if key in seen:
                changed = True
                spend()
                continue
            seen.add(key)
            unique.append(r)
        relators = unique
        if steps >= budget:
            break
        shortening = _find_subword_shortening(relators)
        if shortening is not None:
            ri, new_word = shortening
            relators[ri] = new_word
            changed = True
            if spend():
                break
            continue
        elim = _find_elimination(names, relators)
        if elim is not None:
            ri, g, image = elim
            relators = relators[:ri] + relators[ri + 1:]
            names, relators = _drop_generator(names, relators, g, image)
            relators = [r for r in relators if not r.is_identity()]
            changed = True
            if spend():
                break
    relators = [r for r in relators if not r.is_identity()]
    return FinitePresentation(names, relators)


@dataclass(frozen=True)
class GeneratorMap:
    """A homomorphism given on generators: one target word per source
    generator.  Relator triviality in the target is the caller's assertion;
    ``check_into_free`` covers the free-target case only."""

    source: FinitePresentation
    target: FinitePresentation
    images: tuple[Word, ...]

    def __post_init__(self):
        if len(self.images) != len(self.source.generators):
            raise PresentationError("one image word required per source generator")
        limit = len(self.target.generators)
        for w in self.images:
            if w.max_generator_id() >= limit:
                raise PresentationError("image word uses an undeclared target generator")

    def apply(self, word: Word) -> Word:
        return word.substitute(self.images)

    def check_into_free(self) -> bool:
        """True when every source relator maps to the free identity (valid
        test only when the target has no relators)."""
        return all(self.apply(r).is_identity() for r in self.source.relators)
