"""Presentation-to-presentation constructions: relator-cell replacement,
universal central extensions of perfect groups, the small-cancellation
embedding of an arbitrary finitely presented quotient, fibre products, and
torus-fibered graph-of-groups presentations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .homology import abelianization_invariants, solve_integer_system
from .presentations import (
    FinitePresentation,
    GeneratorMap,
    PresentationError,
    Word,
    commutator,
    direct_product,
    parse_presentation,
    parse_word,
    tietze_simplify,
)

__all__ = [
    "NotPerfectError",
    "SchemeExhausted",
    "higman_presentation",
    "j_construction",
    "uce_presentation",
    "uce_defect_words",
    "RipsOutput",
    "rips_construction",
    "small_cancellation_ratio",
    "FibreProductGenerators",
    "fibre_product_generators",
    "fibre_product_presentation_finite_quotient",
    "TubularBundleData",
    "tubular_bundle_presentation",
    "enumerate_tubular_bundles",
]


class NotPerfectError(PresentationError):
    """The operation requires a perfect group (trivial H1)."""

    def __init__(self, message: str, h1=None):
        super().__init__(message)
        self.h1 = h1


class SchemeExhausted(RuntimeError):
    """The filler-word scheme failed to reach the metric bound within its
    retry budget."""


_HIGMAN_TEXT = (
    "< a1 a2 a3 a4 | a2^-1 a1 a2 a1^-2, a3^-1 a2 a3 a2^-2, "
    "a4^-1 a3 a4 a3^-2, a1^-1 a4 a1 a4^-2 >"
)


def higman_presentation() -> FinitePresentation:
    """Higman's four-generator presentation of a perfect group with no
    nontrivial finite quotients (an aspherical presentation)."""
    return parse_presentation(_HIGMAN_TEXT)


# ---------------------------------------------------------------------------
# Relator-cell replacement ("J-construction")
# ---------------------------------------------------------------------------


def j_construction(
    p: FinitePresentation, j: FinitePresentation, alpha: str
) -> FinitePresentation:
    """Replace each relator 2-cell of ``p`` by a copy of the complex of ``j``
    attached along the loop of generator ``alpha``.

    Output: one suffixed copy of j's generators and relators per relator of
    p, followed by p's generators, plus the relators r_i * alpha_i^-1.
    ``alpha`` should have infinite order in j for the construction to carry
    its intended properties; that is the caller's assertion.
    """
    if alpha not in j.names:
        raise PresentationError(f"alpha {alpha!r} is not a generator of the vertex group")
    m = len(p.relators)
    if m < 1:
        raise PresentationError("input presentation needs at least one relator")
    k = len(j.generators)
    alpha_id = j.generator_id(alpha)
    names: list[str] = []
    for i in range(1, m + 1):
        names.extend(f"{name}_{i}" for name in j.names)
    names.extend(p.names)
    if len(set(names)) != len(names):
        raise PresentationError("generator name clash between suffixed copies and input")
    relators: list[Word] = []
    for i in range(m):
        relators.extend(r.shift_ids(i * k) for r in j.relators)
    offset = m * k
    for i, r in enumerate(p.relators):
        relators.append(r.shift_ids(offset) * Word.generator(i * k + alpha_id).inverse())
    return FinitePresentation(names, relators)


# ---------------------------------------------------------------------------
# Universal central extension of a perfect group
# ---------------------------------------------------------------------------


def uce_defect_words(p: FinitePresentation) -> list[Word]:
    """For each generator a, the word c_a = reduce(a * prod r_i^{lambda_i})
    where lambda solves the exponent-sum system so that c_a has zero exponent
    sums (hence lies in the commutator subgroup of the free group)."""
    h1 = abelianization_invariants(p)
    if not h1.is_trivial():
        raise NotPerfectError(
            f"universal central extension requires a perfect group; H1 = {h1.describe()}",
            h1=h1,
        )
    matrix = p.exponent_matrix()
    n = len(p.generators)
    out = []
    for a in range(n):
        target = [0] * n
        target[a] = -1
        lam = solve_integer_system(matrix, target)
        if lam is None:  # unreachable for perfect input; kept as a hard check
            raise NotPerfectError("exponent-sum system unsolvable; group is not perfect")
        prod = Word()
        for i, e in enumerate(lam):
            if e:
                prod = prod * (p.relators[i] ** e)
        out.append(Word.generator(a) * prod)
    return out


def uce_presentation(p: FinitePresentation) -> FinitePresentation:
    """Finite presentation of the universal central extension of the perfect
    group presented by ``p``: same generators, relators {[a, r]} for every
    generator a and relator r, plus {a^-1 c_a}; exactly |A|(1+|R|) relators."""
    defects = uce_defect_words(p)  # also enforces perfectness
    relators: list[Word] = []
    for a in range(len(p.generators)):
        ga = Word.generator(a)
        for r in p.relators:
            c = commutator(ga, r)
            if c.is_identity():
                raise PresentationError(
                    f"relator {r.render(p.names)} is a power of generator "
                    f"{p.names[a]}; its centrality relator collapses"
                )
            relators.append(c)
    for a in range(len(p.generators)):
        relators.append(Word.generator(a).inverse() * defects[a])
    return FinitePresentation(p.names, relators)


# ---------------------------------------------------------------------------
# Small-cancellation quotient embedding
# ---------------------------------------------------------------------------


def small_cancellation_ratio(p: FinitePresentation) -> Fraction:
    """Max over pieces of (piece length)/(relator length), computed on the
    symmetrized relator set (all cyclic shifts of all relators and inverses,
    as a set of words; relators are cyclically reduced first).  A piece is a
    common prefix of two distinct elements of that set; C'(1/6) holds iff the
    returned ratio is < 1/6.
    """
    if 2 * len(p.generators) > 255:
        raise PresentationError("more than 127 generators; piece checker uses byte codes")
    shifts: set[bytes] = set()
    for r in p.relators:
        letters = list(r.cyclically_reduced().letters())
        if not letters:
            continue
        enc = bytes((abs(x) - 1) * 2 + (0 if x > 0 else 1) for x in letters)
        inv = bytes((abs(x) - 1) * 2 + (1 if x > 0 else 0) for x in reversed(letters))
        length = len(enc)
        for base in (enc, inv):
            doubled = base + base
            for s in range(length):
                shifts.add(doubled[s : s + length])
    if len(shifts) < 2:
        return Fraction(0)
    # the max of lcp/min-length over all pairs is attained on a pair adjacent
    # in sorted order, so one sorted sweep suffices
    ordered = sorted(shifts)
    best = Fraction(0)
    for w1, w2 in zip(ordered, ordered[1:]):
        m = min(len(w1), len(w2))
        i = 0
        while i < m and w1[i : i + 128] == w2[i : i + 128]:
            i += 128
        j = min(i, m)
        while j < m and w1[j] == w2[j]:
            j += 1
        if j and Fraction(j, m) > best:
            best = Fraction(j, m)
    return best


@dataclass(frozen=True)
class RipsOutput:
    """Small-cancellation presentation H mapping onto the input group with
    3-generator kernel: |relators(H)| = |relators(Q)| + 6 |generators(Q)|."""

    presentation: FinitePresentation
    kernel_generators: tuple[Word, Word, Word]
    quotient_map: GeneratorMap
    ratio: Fraction
    offset: int  # filler-run base offset that passed the metric check


def _pair_sequence(e: int) -> list[int]:
    """Deterministic node sequence of an Eulerian circuit through all e^2
    ordered pairs over {1..e} (complete digraph with loops)."""
    succ = {u: list(range(e, 0, -1)) for u in range(1, e + 1)}
    stack = [1]
    circuit: list[int] = []
    while stack:
        u = stack[-1]
        if succ[u]:
            stack.append(succ[u].pop())
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    return circuit


_FILLER_RUNS = 36  # runs of a's per filler word; keeps pieces << 1/6 of relators


def rips_construction(q: FinitePresentation, seed: int = 0) -> RipsOutput:
    """Embed the group of ``q`` as the quotient of a C'(1/6) small-cancellation
    group by the normal closure of three fresh generators.

    Relators: x^e g x^-e * W^-1 for every generator x, sign e, and fresh
    generator g (six per generator of q), then y_j * W^-1 for every relator
    y_j.  The fillers W are pairwise-distinct positive words
    b a^{l+d1} b a^{l+d2} ... with digit windows cut from one Eulerian pair
    sequence, so no two fillers share an adjacent run pair; the base offset l
    starts from the seed and doubles until the C'(1/6) check passes.
    """
    n = len(q.generators)
    m = len(q.relators)
    count = m + 6 * n
    runs = _FILLER_RUNS
    e = 2
    while e * e < count * (runs - 1):
        e += 1
    seq = _pair_sequence(e)

    existing = set(q.names)
    knames: list[str] | None = None
    for suffix in [""] + [str(i) for i in range(count + 3)]:
        candidate = [nm + suffix for nm in ("a", "b", "c")]
        if not (set(candidate) & existing):
            knames = candidate
            break
    assert knames is not None
    names = list(q.names) + knames
    a_id, b_id, c_id = n, n + 1, n + 2

    offset = max(1, int(seed))
    for _ in range(32):
        def filler(k: int) -> Word:
            digits = seq[k * (runs - 1) : k * (runs - 1) + runs]
            syl: list[tuple[int, int]] = []
            for d in digits:
                syl.append((b_id, 1))
                syl.append((a_id, offset + d))
            return Word.from_syllables(syl)

        relators: list[Word] = []
        idx = 0
        for x in range(n):
            for sign in (1, -1):
                for g in (a_id, b_id, c_id):
                    w = filler(idx)
                    idx += 1
                    conj = Word.from_syllables([(x, sign), (g, 1), (x, -sign)])
                    relators.append(conj * w.inverse())
        for r in q.relators:
            w = filler(idx)
            idx += 1
            relators.append(r * w.inverse())
        h = FinitePresentation(names, relators)
        ratio = small_cancellation_ratio(h)
        if ratio < Fraction(1, 6):
            kernel = (Word.generator(a_id), Word.generator(b_id), Word.generator(c_id))
            images = tuple(Word.generator(i) for i in range(n)) + (Word(), Word(), Word())
            qmap = GeneratorMap(source=h, target=q, images=images)
            return RipsOutput(
                presentation=h,
                kernel_generators=kernel,
                quotient_map=qmap,
                ratio=ratio,
                offset=offset,
            )
        offset *= 2
    raise SchemeExhausted(
        "filler words failed the C'(1/6) check at every offset; input relators "
        "may be too repetitive for this scheme"
    )


# ---------------------------------------------------------------------------
# Fibre products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FibreProductGenerators:
    """Generating words of the fibre product inside the doubled group: the
    diagonal images of the quotient's generators followed by the (kernel, 1)
    images of the three kernel generators."""

    ambient: FinitePresentation
    generators: tuple[Word, ...]


def fibre_product_generators(rips: RipsOutput) -> FibreProductGenerators:
    h = rips.presentation
    k = len(h.generators)
    n = len(rips.quotient_map.target.generators)
    ambient = direct_product(h, h)
    words = [Word.from_syllables([(i, 1), (k + i, 1)]) for i in range(n)]
    words.extend(w for w in rips.kernel_generators)  # copy-1 block keeps its ids
    return FibreProductGenerators(ambient=ambient, generators=tuple(words))


def fibre_product_presentation_finite_quotient(
    h: FinitePresentation,
    kernel_gens: Sequence[Word],
    max_cosets: int,
    *,
    tietze_budget: int = 2000,
) -> FinitePresentation:
    """Presentation of the fibre product of H -> Q, valid when Q is finite:
    the fibre product then has index |Q| in H x H, so coset enumeration of the
    pulled-back diagonal subgroup followed by Reidemeister-Schreier rewriting
    and Tietze simplification yields a finite presentation.  Raises
    CosetLimitExceeded if Q is not shown finite within the budget."""
    from .finite_quotients import reidemeister_schreier, todd_coxeter

    ambient = direct_product(h, h)
    k = len(h.generators)
    subgroup = [Word.from_syllables([(i, 1), (k + i, 1)]) for i in range(k)]
    subgroup.extend(kernel_gens)
    table = todd_coxeter(ambient, subgroup, max_cosets)
    raw = reidemeister_schreier(table)
    return tietze_simplify(raw, tietze_budget)


# ---------------------------------------------------------------------------
# Tubular bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TubularBundleData:
    """Defining data of a torus-fibered graph of spaces over a star tree:
    fibre dimension d, rose rank n, m vertex complexes V_i with attaching
    loops c_i, edge words rho_i in the rose, and shift vectors z_i in Z^d."""

    d: int
    n: int
    m: int
    vertex_presentations: tuple[FinitePresentation, ...]
    attach_loops: tuple[Word, ...]
    rho: tuple[Word, ...]
    shifts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if min(self.d, self.n, self.m) < 1:
            raise PresentationError("bundle parameters d, n, m must be positive")
        if not (
            len(self.vertex_presentations)
            == len(self.attach_loops)
            == len(self.rho)
            == len(self.shifts)
            == self.m
        ):
            raise PresentationError("bundle data families must all have length m")
        for i, z in enumerate(self.shifts):
            if len(z) != self.d:
                raise PresentationError(f"shift vector {i} has length {len(z)}, expected {self.d}")
        for i, (v, c) in enumerate(zip(self.vertex_presentations, self.attach_loops)):
            if c.is_identity():
                raise PresentationError(f"attaching loop {i} is trivial")
            if c.max_generator_id() >= len(v.generators):
                raise PresentationError(f"attaching loop {i} uses undeclared generators")
        for i, r in enumerate(self.rho):
            if r.is_identity():
                raise PresentationError(f"edge word rho({i}) is trivial")
            if r.max_generator_id() >= self.n:
                raise PresentationError(f"edge word rho({i}) exceeds the rose rank")

    def rose_names(self) -> list[str]:
        return [f"a{i+1}" for i in range(self.n)]

    def to_json(self) -> dict:
        rose = self.rose_names()
        return {
            "d": self.d,
            "n": self.n,
            "m": self.m,
            "vertices": [v.render() for v in self.vertex_presentations],
            "loops": [
                c.render(v.names)
                for v, c in zip(self.vertex_presentations, self.attach_loops)
            ],
            "rho": [r.render(rose) for r in self.rho],
            "shifts": [list(z) for z in self.shifts],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TubularBundleData":
        vertices = tuple(parse_presentation(s) for s in data["vertices"])
        loops = tuple(
            parse_word(s, v) for v, s in zip(vertices, data["loops"])
        )
        rose = FinitePresentation([f"a{i+1}" for i in range(data["n"])])
        rho = tuple(parse_word(s, rose) for s in data["rho"])
        return cls(
            d=data["d"],
            n=data["n"],
            m=data["m"],
            vertex_presentations=vertices,
            attach_loops=loops,
            rho=rho,
            shifts=tuple(tuple(z) for z in data["shifts"]),
        )


def tubular_bundle_presentation(bundle: TubularBundleData) -> FinitePresentation:
    """Fundamental group presentation of the bundle's total space (van Kampen
    along the star tree): rose generators a1..an, torus generators t1..td
    commuting with everything, the vertex relators, and one edge relator
    rho(i)^-1 * c_i * t^{z_i} per vertex."""
    d, n, m = bundle.d, bundle.n, bundle.m
    names = bundle.rose_names() + [f"t{j+1}" for j in range(d)]
    torus0 = n
    offsets = []
    for i, v in enumerate(bundle.vertex_presentations):
        offsets.append(len(names))
        names.extend(f"{name}_{i+1}" for name in v.names)
    if len(set(names)) != len(names):
        raise PresentationError("generator name clash while assembling bundle presentation")

    relators: list[Word] = []
    for j in range(d):
        for k in range(j + 1, d):
            relators.append(commutator(Word.generator(torus0 + j), Word.generator(torus0 + k)))
    other_ids = list(range(n)) + [
        offsets[i] + g
        for i in range(m)
        for g in range(len(bundle.vertex_presentations[i].generators))
    ]
    for j in range(d):
        tj = Word.generator(torus0 + j)
        for g in other_ids:
            relators.append(commutator(tj, Word.generator(g)))
    for i, v in enumerate(bundle.vertex_presentations):
        relators.extend(r.shift_ids(offsets[i]) for r in v.relators)
    for i in range(m):
        loop = bundle.attach_loops[i].shift_ids(offsets[i])
        twist = Word.from_syllables(
            (torus0 + j, bundle.shifts[i][j])
            for j in range(d)
            if bundle.shifts[i][j] != 0
        )
        relators.append(bundle.rho[i].inverse() * loop * twist)
    return FinitePresentation(names, relators)


def enumerate_tubular_bundles(
    x: FinitePresentation,
    c: Word,
    d: int,
    n: int,
    m: int,
    rho: Sequence[Word],
    height: int,
) -> Iterator[TubularBundleData]:
    """All bundles over the fixed vertex complex (x, c) with the given edge
    words and shift vectors of max-norm <= height, in lexicographic order of
    the concatenated shift matrix.  Yields (2*height+1)^(d*m) bundles."""
    if height < 0:
        raise PresentationError("height must be nonnegative")
    if len(rho) != m:
        raise PresentationError(f"expected {m} edge words, got {len(rho)}")
    rho = tuple(rho)
    values = range(-height, height + 1)
    for flat in itertools.product(values, repeat=d * m):
        shifts = tuple(tuple(flat[i * d : (i + 1) * d]) for i in range(m))
        yield TubularBundleData(
            d=d,
            n=n,
            m=m,
            vertex_presentations=(x,) * m,
            attach_loops=(c,) * m,
            rho=rho,
            shifts=shifts,
        )
