"""Finite permutation groups, the nonabelian simple catalog, exhaustive
homomorphism/epimorphism counting, Todd-Coxeter coset enumeration, and
Reidemeister-Schreier subgroup presentations.

The homomorphism search is a depth-first enumeration of generator images with
relator-aware variable ordering: generators are ordered so each relator can be
checked as early as possible.  Searches partition the first generator's image
across workers; counts are identical for any worker count.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .homology import AbelianInvariants, abelianization_invariants
from .presentations import FinitePresentation, Word

__all__ = [
    "PermGroup",
    "perm_mul",
    "perm_inverse",
    "alternating_group",
    "psl2",
    "catalog_up_to",
    "catalog_group",
    "CatalogBoundError",
    "SearchResult",
    "count_homomorphisms",
    "hom_count",
    "epi_count",
    "epi_exists",
    "validate_witness",
    "EpiCountReport",
    "epi_count_report",
    "QuotientEntry",
    "SimpleQuotientReport",
    "simple_quotients_up_to",
    "CosetLimitExceeded",
    "CosetTable",
    "todd_coxeter",
    "reidemeister_schreier",
    "fibre_epi_count_formula",
]

CATALOG_MAX_ORDER = 2520


def perm_mul(p: tuple, q: tuple) -> tuple:
    """Product 'p then q': (p*q)(x) = q(p(x))."""
    return tuple(map(q.__getitem__, p))


def perm_inverse(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def _check_perm(p: Sequence[int], degree: int) -> tuple:
    t = tuple(p)
    if len(t) != degree or sorted(t) != list(range(degree)):
        raise ValueError(f"not a permutation of degree {degree}: {p!r}")
    return t


class PermGroup:
    """A finite permutation group given by generators on points 0..degree-1.
    The element list is the deterministic breadth-first closure of the
    generators."""

    def __init__(self, degree: int, generators: Iterable[Sequence[int]], name: str = ""):
        self.degree = degree
        self.generators = tuple(_check_perm(g, degree) for g in generators)
        self.name = name
        self._elements: tuple[tuple, ...] | None = None

    def elements(self) -> tuple[tuple, ...]:
        if self._elements is None:
            ident = tuple(range(self.degree))
            seen = {ident}
            out = [ident]
            frontier = [ident]
            while frontier:
                nxt = []
                for x in frontier:
                    for g in self.generators:
                        y = perm_mul(x, g)
                        if y not in seen:
                            seen.add(y)
                            out.append(y)
                            nxt.append(y)
                frontier = nxt
            self._elements = tuple(out)
        return self._elements

    @property
    def order(self) -> int:
        return len(self.elements())

    def __repr__(self) -> str:
        label = self.name or f"degree-{self.degree} group"
        return f"PermGroup({label}, order={self.order})"


def _cycle(degree: int, points: Sequence[int]) -> tuple:
    images = list(range(degree))
    for a, b in zip(points, points[1:]):
        images[a] = b
    images[points[-1]] = points[0]
    return tuple(images)


@lru_cache(maxsize=None)
def alternating_group(n: int) -> PermGroup:
    """A_n generated by (0 1 2) and an n-cycle (n odd) or an (n-1)-cycle
    fixing 0 (n even)."""
    if n < 3:
        raise ValueError("alternating_group requires n >= 3")
    three = _cycle(n, (0, 1, 2))
    big = _cycle(n, tuple(range(n))) if n % 2 == 1 else _cycle(n, tuple(range(1, n)))
    return PermGroup(n, [three, big], name=f"A{n}")


class _SmallField:
    """GF(q) for q prime or in {8, 9}, elements coded 0..q-1.  Prime powers
    use hard-coded irreducible polynomials: t^3 = t+1 over F2, t^2 = -1
    over F3."""

    def __init__(self, q: int):
        self.q = q
        if q in (8, 9):
            self.p, self.k = (2, 3) if q == 8 else (3, 2)
            # coefficients of t^k, low degree first
            self.reduction = (1, 1, 0) if q == 8 else (2, 0)
        else:
            if any(q % d == 0 for d in range(2, q)):
                raise ValueError(f"unsupported field size {q}")
            self.p, self.k = q, 1
            self.reduction = ()

    def _digits(self, x: int) -> list[int]:
        out = []
        for _ in range(self.k):
            out.append(x % self.p)
            x //= self.p
        return out

    def _code(self, digits: Sequence[int]) -> int:
        x = 0
        for d in reversed(list(digits)):
            x = x * self.p + d
        return x

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        return self._code(
            (x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))
        )

    def neg(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        return self._code((-x) % self.p for x in self._digits(a))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a * b) % self.p
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % self.p
        for i in range(2 * self.k - 2, self.k - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j, r in enumerate(self.reduction):
                    prod[i - self.k + j] = (prod[i - self.k + j] + c * r) % self.p
        return self._code(prod[: self.k])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("field inverse of zero")
        for b in range(1, self.q):
            if self.mul(a, b) == 1:
                return b
        raise AssertionError("field arithmetic inconsistent")


@lru_cache(maxsize=None)
def psl2(q: int) -> PermGroup:
    """PSL(2, q) on the projective line (q+1 points), generated by x -> x+1
    and x -> -1/x, plus x -> s*x for the prime-power fields (s a generator of
    the square class group; without it the first two maps only generate a
    proper subgroup when q is not prime).  Supported q: 5, 7, 8, 9, 11, 13,
    17.  The order q(q^2-1)/gcd(2, q-1) is verified by closure."""
    if q not in (5, 7, 8, 9, 11, 13, 17):
        raise ValueError(f"unsupported q for psl2: {q}")
    f = _SmallField(q)
    infinity = q
    shift = [f.add(x, 1) for x in range(q)] + [infinity]
    flip = [0] * (q + 1)
    flip[0] = infinity
    flip[infinity] = 0
    for x in range(1, q):
        flip[x] = f.neg(f.inv(x))
    generators = [tuple(shift), tuple(flip)]
    if f.k > 1:
        alpha = next(
            a for a in range(2, q)
            if all(_field_pow(f, a, d) != 1 for d in range(1, q - 1) if (q - 1) % d == 0)
        )
        s = alpha if f.p == 2 else f.mul(alpha, alpha)
        scale = [f.mul(s, x) for x in range(q)] + [infinity]
        generators.append(tuple(scale))
    group = PermGroup(q + 1, generators, name=f"PSL2_{q}")
    expected = q * (q * q - 1) // math.gcd(2, q - 1)
    if group.order != expected:
        raise AssertionError(f"PSL2_{q} closure has order {group.order}, expected {expected}")
    return group


def _field_pow(f: _SmallField, a: int, e: int) -> int:
    out = 1
    for _ in range(e):
        out = f.mul(out, a)
    return out


class CatalogBoundError(ValueError):
    """Requested bound exceeds the range on which the catalog is complete."""


_CATALOG_SPEC: tuple[tuple[int, str], ...] = (
    (60, "A5"),
    (168, "PSL2_7"),
    (360, "A6"),
    (504, "PSL2_8"),
    (660, "PSL2_11"),
    (1092, "PSL2_13"),
    (2448, "PSL2_17"),
    (2520, "A7"),
)


def catalog_group(name: str) -> PermGroup:
    if name.startswith("A") and name[1:].isdigit():
        return alternating_group(int(name[1:]))
    if name.startswith("PSL2_") and name[5:].isdigit():
        return psl2(int(name[5:]))
    raise ValueError(f"unknown catalog group name: {name!r}")


def catalog_up_to(bound: int) -> list[PermGroup]:
    """All nonabelian finite simple groups of order <= bound, one per
    isomorphism class (A5 and A6 stand in for PSL(2,5) and PSL(2,9)).  The
    list is complete only up to order 2520; larger bounds raise rather than
    silently truncate."""
    if bound > CATALOG_MAX_ORDER:
        raise CatalogBoundError(
            f"catalog is complete only up to order {CATALOG_MAX_ORDER}; got bound {bound}"
        )
    return [catalog_group(name) for order, name in _CATALOG_SPEC if order <= bound]


# ---------------------------------------------------------------------------
# Homomorphism / epimorphism search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    hom_count: int
    epi_count: int
    nodes: int
    complete: bool
    witness: tuple | None = None


class InconclusiveSearch(RuntimeError):
    """A node-limited search aborted before completing."""


def _relator_aware_order(presentation: FinitePresentation) -> list[int]:
    """Greedy generator ordering: each step picks the generator completing the
    most relators, breaking ties by occurrence count, then by index."""
    n = len(presentation.generators)
    supports = [frozenset(r.generator_ids()) for r in presentation.relators]
    occurrences = [0] * n
    for s in supports:
        for g in s:
            occurrences[g] += 1
    chosen: list[int] = []
    chosen_set: set[int] = set()
    remaining = list(range(n))
    pending = list(supports)
    while remaining:
        best = None
        for g in remaining:
            completed = sum(1 for s in pending if s <= chosen_set | {g})
            key = (-completed, -occurrences[g], g)
            if best is None or key < best[0]:
                best = (key, g)
        g = best[1]
        chosen.append(g)
        chosen_set.add(g)
        remaining.remove(g)
        pending = [s for s in pending if not (s <= chosen_set)]
    return chosen


def _encode_relators(presentation: FinitePresentation, order: list[int]):
    """Relators as letter tuples over assignment slots ((slot<<1)|sign),
    grouped by the level at which all their generators are assigned."""
    slot_of = {g: i for i, g in enumerate(order)}
    levels: list[list[tuple[int, ...]]] = [[] for _ in range(len(order))]
    for r in presentation.relators:
        letters = []
        top = 0
        for signed in r.letters():
            slot = slot_of[abs(signed) - 1]
            top = max(top, slot)
            letters.append((slot << 1) | (1 if signed < 0 else 0))
        levels[top].append(tuple(letters))
    return tuple(tuple(rels) for rels in levels)


class _BranchLimit(Exception):
    pass


def _search_block(args):
    """Depth-first count over all assignments whose first-generator image lies
    in ``first_indices``.  Levels past the first are evaluated vectorially:
    every relator completing at a level is checked against all candidate
    images at once, and only survivors are descended into.  Each first-image
    branch has its own node budget, so limit aborts are deterministic and
    independent of worker partitioning."""
    (n, rel_levels, elements, first_indices, branch_limit, count_epi, witness_mode) = args
    degree = len(elements[0])
    ident = tuple(range(degree))
    order = len(elements)
    inv_elements = [perm_inverse(p) for p in elements]
    index_of = {p: i for i, p in enumerate(elements)}
    ident_idx = index_of[ident]
    trivial = frozenset((ident_idx,))

    emat = np.array(elements, dtype=np.int16)
    einv = np.array(inv_elements, dtype=np.int16)
    ident_row = np.arange(degree, dtype=np.int16)

    imgs: list[tuple] = [ident] * n
    invs: list[tuple] = [ident] * n
    np_imgs: list[np.ndarray] = [ident_row] * n
    np_invs: list[np.ndarray] = [ident_row] * n
    chosen: list[int] = [ident_idx] * n
    memo: dict = {}

    hom = epi = nodes = 0
    branch_start = 0
    complete = True
    witness = None

    def bfs_closure(level: int) -> frozenset:
        gens = [elements[chosen[i]] for i in range(level + 1)]
        seen = {ident}
        out = {ident_idx}
        frontier = [ident]
        while frontier:
            nxt = []
            for x in frontier:
                for gp in gens:
                    y = tuple(map(gp.__getitem__, x))
                    if y not in seen:
                        seen.add(y)
                        out.add(index_of[y])
                        nxt.append(y)
            frontier = nxt
        return frozenset(out)

    def extend_closure(prev: frozenset, gi: int, level: int) -> frozenset:
        if gi in prev:
            return prev
        key = (prev, gi)
        got = memo.get(key)
        if got is None:
            got = bfs_closure(level)
            memo[key] = got
        return got

    def level_mask(level: int) -> np.ndarray | None:
        """Candidate mask at ``level``: True where all relators completing
        here evaluate to the identity.  None when there are none to check."""
        mask = None
        for letters in rel_levels[level]:
            first = letters[0]
            slot = first >> 1
            if slot == level:
                acc = einv if first & 1 else emat
            else:
                acc = np_invs[slot] if first & 1 else np_imgs[slot]
            for letter in letters[1:]:
                slot = letter >> 1
                if slot == level:
                    x = einv if letter & 1 else emat
                    if acc.ndim == 1:
                        acc = x[:, acc]
                    else:
                        acc = np.take_along_axis(x, acc, axis=1)
                else:
                    p = np_invs[slot] if letter & 1 else np_imgs[slot]
                    acc = p[acc]
            rel_ok = (acc == ident_row).all(axis=1)
            mask = rel_ok if mask is None else (mask & rel_ok)
        return mask

    def assign(level: int, gi: int):
        imgs[level] = elements[gi]
        invs[level] = inv_elements[gi]
        np_imgs[level] = emat[gi]
        np_invs[level] = einv[gi]
        chosen[level] = gi

    def rec(level: int, prev_closure: frozenset) -> bool:
        nonlocal hom, epi, nodes, witness
        nodes += order
        if branch_limit is not None and nodes - branch_start > branch_limit:
            raise _BranchLimit
        mask = level_mask(level)
        last = level == n - 1
        if last and not count_epi:
            hom += order if mask is None else int(mask.sum())
            return False
        survivors = range(order) if mask is None else np.nonzero(mask)[0]
        for gi in survivors:
            gi = int(gi)
            assign(level, gi)
            closure = extend_closure(prev_closure, gi, level) if count_epi else prev_closure
            if last:
                hom += 1
                if len(closure) == order:
                    epi += 1
                    if witness_mode:
                        witness = tuple(imgs)
                        return True
            elif rec(level + 1, closure):
                return True
        return False

    if n == 0:
        triv_epi = 1 if order == 1 else 0
        return 1, triv_epi, 0, True, (() if triv_epi else None)

    level0_rels = rel_levels[0]
    for fi in first_indices:
        branch_start = nodes
        nodes += 1
        assign(0, fi)
        ok = True
        for letters in level0_rels:
            first = letters[0]
            acc = invs[first >> 1] if first & 1 else imgs[first >> 1]
            for letter in letters[1:]:
                q = invs[letter >> 1] if letter & 1 else imgs[letter >> 1]
                acc = tuple(map(q.__getitem__, acc))
            if acc != ident:
                ok = False
                break
        if not ok:
            continue
        closure = extend_closure(trivial, fi, 0) if count_epi else trivial
        if n == 1:
            hom += 1
            if count_epi and len(closure) == order:
                epi += 1
                if witness_mode:
                    witness = tuple(imgs)
                    break
            continue
        try:
            if rec(1, closure):
                break
        except _BranchLimit:
            complete = False
    return hom, epi, nodes, complete, witness


def count_homomorphisms(
    presentation: FinitePresentation,
    group: PermGroup,
    *,
    count_epi: bool = True,
    node_limit: int | None = None,
    workers: int = 1,
    witness_mode: bool = False,
) -> SearchResult:
    """Exhaustive deterministic count of homomorphisms (and epimorphisms) from
    the presented group to ``group``.

    ``node_limit`` is a per-search budget, applied as ceil(limit/|S|) nodes
    per first-generator branch; exceeding it yields complete=False and the
    counts must be discarded.  ``witness_mode`` stops at the first
    epimorphism and reports it as a tuple of permutations indexed like the
    presentation's generators.
    """
    n = len(presentation.generators)
    gen_order = _relator_aware_order(presentation)
    rel_levels = _encode_relators(presentation, gen_order)
    elements = group.elements()
    if n == 0:
        return SearchResult(1, 1 if len(elements) == 1 else 0, 0, True)
    branch_limit = None
    if node_limit is not None:
        branch_limit = max(1, math.ceil(node_limit / len(elements)))
    first = list(range(len(elements)))
    workers = max(1, int(workers))
    if witness_mode:
        workers = 1  # keep 'first witness in search order' deterministic
    parts = [first[w::workers] for w in range(workers)]
    args = [
        (n, rel_levels, elements, tuple(part), branch_limit, count_epi or witness_mode, witness_mode)
        for part in parts
        if part
    ]
    if len(args) == 1:
        outs = [_search_block(args[0])]
    else:
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(len(args)) as pool:
                outs = pool.map(_search_block, args)
        except (ValueError, OSError):
            outs = [_search_block(a) for a in args]
    hom = sum(o[0] for o in outs)
    epi = sum(o[1] for o in outs)
    nodes = sum(o[2] for o in outs)
    complete = all(o[3] for o in outs)
    witness = next((o[4] for o in outs if o[4] is not None), None)
    if witness is not None:
        # search-slot order back to presentation order
        slot_of = {g: i for i, g in enumerate(gen_order)}
        witness = tuple(witness[slot_of[g]] for g in range(n))
    return SearchResult(hom, epi, nodes, complete, witness)


def hom_count(presentation: FinitePresentation, group: PermGroup, *, workers: int = 1) -> int:
    """Number of generator-image tuples satisfying all relators, exact."""
    return count_homomorphisms(presentation, group, count_epi=False, workers=workers).hom_count


def epi_count(presentation: FinitePresentation, group: PermGroup, *, workers: int = 1) -> int:
    """Number of homomorphism tuples whose images generate the whole group."""
    return count_homomorphisms(presentation, group, count_epi=True, workers=workers).epi_count


def epi_exists(
    presentation: FinitePresentation, group: PermGroup, *, node_limit: int | None = None
) -> tuple | None:
    """First epimorphism found in deterministic search order, as a tuple of
    permutations (one per generator), or None if there is none.  Raises
    InconclusiveSearch when a node-limited search aborts without a witness."""
    result = count_homomorphisms(
        presentation, group, count_epi=True, node_limit=node_limit, witness_mode=True
    )
    if result.witness is not None:
        return result.witness
    if not result.complete:
        raise InconclusiveSearch(
            f"epimorphism search onto {group.name or 'group'} hit the node limit"
        )
    return None


def validate_witness(
    presentation: FinitePresentation, group: PermGroup, images: Sequence[Sequence[int]]
) -> bool:
    """Re-validate a stored epimorphism: images satisfy every relator and
    generate the group."""
    degree = group.degree
    perms = [_check_perm(p, degree) for p in images]
    if len(perms) != len(presentation.generators):
        return False
    ident = tuple(range(degree))
    inv = [perm_inverse(p) for p in perms]
    for r in presentation.relators:
        acc = ident
        for signed in r.letters():
            g = abs(signed) - 1
            acc = perm_mul(acc, perms[g] if signed > 0 else inv[g])
        if acc != ident:
            return False
    sub = PermGroup(degree, perms)
    return sub.order == group.order


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EpiCountEntry:
    group: str
    order: int
    hom_count: int | None
    epi_count: int | None
    elapsed: float
    nodes: int
    complete: bool

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "order": self.order,
            "hom_count": self.hom_count,
            "epi_count": self.epi_count,
            "elapsed": round(self.elapsed, 3),
            "nodes": self.nodes,
            "status": "ok" if self.complete else "inconclusive",
        }


@dataclass(frozen=True)
class EpiCountReport:
    presentation: str
    entries: tuple[EpiCountEntry, ...]
    workers: int
    node_limit: int | None

    def entry(self, group_name: str) -> EpiCountEntry:
        for e in self.entries:
            if e.group == group_name:
                return e
        raise KeyError(group_name)

    def to_json(self) -> dict:
        return {
            "presentation": self.presentation,
            "config": {"workers": self.workers, "node_limit": self.node_limit},
            "entries": [e.to_json() for e in self.entries],
        }


def epi_count_report(
    presentation: FinitePresentation,
    groups: Sequence[PermGroup],
    *,
    workers: int = 1,
    node_limit: int | None = None,
) -> EpiCountReport:
    """Per-group hom/epi counts with search statistics.  Counts of searches
    that hit the node limit are reported as None, never as partial values."""
    entries = []
    for g in groups:
        t0 = time.perf_counter()
        res = count_homomorphisms(
            presentation, g, count_epi=True, node_limit=node_limit, workers=workers
        )
        elapsed = time.perf_counter() - t0
        entries.append(
            EpiCountEntry(
                group=g.name,
                order=g.order,
                hom_count=res.hom_count if res.complete else None,
                epi_count=res.epi_count if res.complete else None,
                elapsed=elapsed,
                nodes=res.nodes,
                complete=res.complete,
            )
        )
    return EpiCountReport(
        presentation=presentation.render(),
        entries=tuple(entries),
        workers=workers,
        node_limit=node_limit,
    )


@dataclass(frozen=True)
class QuotientEntry:
    group: str
    order: int
    epi_found: bool | None  # None = inconclusive
    witness: tuple | None
    nodes: int
    elapsed: float

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "order": self.order,
            "epi_found": self.epi_found,
            "witness": [list(p) for p in self.witness] if self.witness else None,
            "nodes": self.nodes,
            "elapsed": round(self.elapsed, 3),
        }


@dataclass(frozen=True)
class SimpleQuotientReport:
    presentation: str
    bound: int
    h1: AbelianInvariants
    abelian_witness: str | None
    entries: tuple[QuotientEntry, ...]
    verdict: str  # quotient_found | no_nontrivial_quotient_up_to_bound | inconclusive

    def to_json(self) -> dict:
        return {
            "presentation": self.presentation,
            "bound": self.bound,
            "h1": {"torsion": list(self.h1.torsion), "free_rank": self.h1.free_rank},
            "abelian_witness": self.abelian_witness,
            "entries": [e.to_json() for e in self.entries],
            "verdict": self.verdict,
        }


def _smallest_prime_factor(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


def simple_quotients_up_to(
    presentation: FinitePresentation,
    bound: int,
    *,
    workers: int = 1,
    node_limit: int | None = None,
) -> SimpleQuotientReport:
    """Bounded finite-quotient scan: the abelian side via H1, the nonabelian
    side by epimorphism search over the simple-group catalog up to ``bound``.
    The verdict 'no nontrivial quotient up to bound' is sound relative to
    catalog completeness and only issued when every search completed."""
    h1 = abelianization_invariants(presentation)
    abelian_witness = None
    if h1.free_rank > 0:
        abelian_witness = "Z quotient from H1 (hence Z/p for every prime p)"
    elif h1.torsion:
        p = _smallest_prime_factor(h1.torsion[-1])
        abelian_witness = f"Z/{p} quotient from H1"
    entries = []
    all_complete = True
    found = h1.free_rank > 0 or bool(h1.torsion)
    for g in catalog_up_to(bound):
        t0 = time.perf_counter()
        res = count_homomorphisms(
            presentation, g, count_epi=True, node_limit=node_limit, witness_mode=True,
            workers=workers,
        )
        elapsed = time.perf_counter() - t0
        if res.witness is not None:
            assert validate_witness(presentation, g, res.witness)
            entries.append(QuotientEntry(g.name, g.order, True, res.witness, res.nodes, elapsed))
            found = True
        elif res.complete:
            entries.append(QuotientEntry(g.name, g.order, False, None, res.nodes, elapsed))
        else:
            entries.append(QuotientEntry(g.name, g.order, None, None, res.nodes, elapsed))
            all_complete = False
    if found:
        verdict = "quotient_found"
    elif all_complete:
        verdict = "no_nontrivial_quotient_up_to_bound"
    else:
        verdict = "inconclusive"
    return SimpleQuotientReport(
        presentation=presentation.render(),
        bound=bound,
        h1=h1,
        abelian_witness=abelian_witness,
        entries=tuple(entries),
        verdict=verdict,
    )


def fibre_epi_count_formula(epi_h: int, epi_q: int) -> int:
    """Epi count of the fibre product onto a nonabelian simple group from the
    counts for H and Q: 2*epi_h - epi_q."""
    if epi_h < 0 or epi_q < 0:
        raise ValueError("epi counts must be nonnegative")
    value = 2 * epi_h - epi_q
    if value < 0:
        raise ValueError(
            f"inconsistent inputs: 2*{epi_h} - {epi_q} < 0 is impossible for valid counts"
        )
    return value


# ---------------------------------------------------------------------------
# Coset enumeration (HLT with row filling, deterministic lowest-first
# numbering) and Reidemeister-Schreier rewriting
# ---------------------------------------------------------------------------


class CosetLimitExceeded(RuntimeError):
    """Enumeration did not close within the coset budget; the index may be
    infinite or merely larger."""


@dataclass(frozen=True)
class CosetTable:
    """A closed, complete coset table.  Row 0 is the subgroup itself; letter
    2g is generator g, letter 2g+1 its inverse."""

    presentation: FinitePresentation
    subgroup_generators: tuple[Word, ...]
    table: tuple[tuple[int, ...], ...]

    @property
    def index(self) -> int:
        return len(self.table)

    def act(self, coset: int, word: Word) -> int:
        c = coset
        for signed in word.letters():
            g = abs(signed) - 1
            c = self.table[c][2 * g if signed > 0 else 2 * g + 1]
        return c


def _word_letters(word: Word) -> tuple[int, ...]:
    out = []
    for signed in word.letters():
        g = abs(signed) - 1
        out.append(2 * g if signed > 0 else 2 * g + 1)
    return tuple(out)


def todd_coxeter(
    presentation: FinitePresentation,
    subgroup_generators: Sequence[Word],
    max_cosets: int,
) -> CosetTable:
    """Enumerate cosets of the subgroup generated by ``subgroup_generators``.

    HLT strategy: subgroup generators are scanned at coset 0, then every
    relator is scanned (with gap filling) at every live coset, and remaining
    undefined entries are filled directly.  Raises CosetLimitExceeded when
    more than ``max_cosets`` cosets get defined, or if the table cannot close
    (e.g. free generators constrained by nothing)."""
    if max_cosets < 1:
        raise ValueError("max_cosets must be at least 1")
    n = len(presentation.generators)
    width = 2 * n
    rows: list[list[int | None]] = [[None] * width]
    rep = [0]
    defined = 1

    def find(c: int) -> int:
        root = c
        while rep[root] != root:
            root = rep[root]
        while rep[c] != root:
            rep[c], c = root, rep[c]
        return root

    def get(c: int, letter: int) -> int | None:
        v = rows[c][letter]
        if v is None:
            return None
        r = find(v)
        if r != v:
            rows[c][letter] = r
        return r

    def define(c: int, letter: int) -> int:
        nonlocal defined
        defined += 1
        if defined > max_cosets:
            raise CosetLimitExceeded(
                f"coset enumeration defined more than {max_cosets} cosets"
            )
        new = len(rows)
        rows.append([None] * width)
        rep.append(new)
        rows[c][letter] = new
        rows[new][letter ^ 1] = c
        return new

    def coincide(a: int, b: int):
        pairs = [(a, b)]
        while pairs:
            x, y = pairs.pop()
            x, y = find(x), find(y)
            if x == y:
                continue
            if x > y:
                x, y = y, x
            rep[y] = x
            rowy = rows[y]
            rowx = rows[x]
            for letter in range(width):
                mu = rowy[letter]
                if mu is None:
                    continue
                rowy[letter] = None
                if rowx[letter] is None:
                    rowx[letter] = mu
                else:
                    pairs.append((rowx[letter], mu))

    def deduce(x: int, letter: int, y: int):
        cur = get(x, letter)
        if cur is not None:
            if cur != y:
                coincide(cur, y)
            return
        back = get(y, letter ^ 1)
        if back is not None:
            if back != x:
                coincide(back, x)
            return
        rows[x][letter] = y
        rows[y][letter ^ 1] = x

    def scan_and_fill(start: int, letters: tuple[int, ...]):
        if not letters:
            return
        while True:
            alpha = find(start)
            f = alpha
            i = 0
            L = len(letters)
            while i < L:
                t = get(f, letters[i])
                if t is None:
                    break
                f = t
                i += 1
            if i == L:
                if f != alpha:
                    coincide(f, alpha)
                return
            b = alpha
            j = L - 1
            while j > i:
                t = get(b, letters[j] ^ 1)
                if t is None:
                    break
                b = t
                j -= 1
            if j == i:
                deduce(f, letters[i], b)
                continue
            define(f, letters[i])

    relator_letters = [_word_letters(r) for r in presentation.relators]
    for w in subgroup_generators:
        scan_and_fill(0, _word_letters(w))
    alpha = 0
    while alpha < len(rows):
        if find(alpha) != alpha:
            alpha += 1
            continue
        for rl in relator_letters:
            scan_and_fill(alpha, rl)
            if find(alpha) != alpha:
                break
        if find(alpha) == alpha:
            for letter in range(width):
                if get(alpha, letter) is None:
                    define(alpha, letter)
        alpha += 1

    live = [c for c in range(len(rows)) if find(c) == c]
    renumber = {old: new for new, old in enumerate(live)}
    final = []
    for old in live:
        row = []
        for letter in range(width):
            v = get(old, letter)
            if v is None:
                raise CosetLimitExceeded("coset table did not close")
            row.append(renumber[v])
        final.append(tuple(row))
    return CosetTable(
        presentation=presentation,
        subgroup_generators=tuple(subgroup_generators),
        table=tuple(final),
    )


def reidemeister_schreier(table: CosetTable) -> FinitePresentation:
    """Presentation of the subgroup on its Schreier generators.

    The Schreier transversal comes from a breadth-first spanning tree of the
    coset graph; freely trivial (tree edge) generators are removed during
    rewriting, and rewritten relators that reduce to the empty word are
    dropped."""
    ambient = table.presentation
    n = len(ambient.generators)
    index = table.index
    # spanning tree, breadth first, letters in order
    parent_edge: dict[int, tuple[int, int]] = {}
    visited = [False] * index
    visited[0] = True
    queue = [0]
    order_found = [0]
    while queue:
        c = queue.pop(0)
        for letter in range(2 * n):
            d = table.table[c][letter]
            if not visited[d]:
                visited[d] = True
                parent_edge[d] = (c, letter)
                queue.append(d)
                order_found.append(d)
    if len(order_found) != index:
        raise ValueError("coset table is not connected")

    trivial: set[tuple[int, int]] = set()  # (coset, gen) pairs with trivial Schreier gen
    for d, (c, letter) in parent_edge.items():
        g = letter >> 1
        if letter & 1:  # discovered via g^-1: the (d, g) generator is trivial
            trivial.add((d, g))
        else:
            trivial.add((c, g))

    gen_id: dict[tuple[int, int], int] = {}
    names: list[str] = []
    for c in range(index):
        for g in range(n):
            if (c, g) not in trivial:
                gen_id[(c, g)] = len(names)
                names.append(f"{ambient.generators[g].name}_{c}")

    def rewrite(start: int, letters: tuple[int, ...]) -> Word:
        out: list[tuple[int, int]] = []
        c = start
        for letter in letters:
            g = letter >> 1
            if letter & 1:
                d = table.table[c][letter]
                if (d, g) not in trivial:
                    out.append((gen_id[(d, g)], -1))
                c = d
            else:
                if (c, g) not in trivial:
                    out.append((gen_id[(c, g)], 1))
                c = table.table[c][letter]
        return Word.from_syllables(out)

    relators = []
    for c in range(index):
        for r in ambient.relators:
            w = rewrite(c, _word_letters(r))
            if not w.is_identity():
                relators.append(w)
    return FinitePresentation(names, relators)
