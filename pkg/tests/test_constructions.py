import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpgroups.constructions import (
    NotPerfectError,
    TubularBundleData,
    enumerate_tubular_bundles,
    fibre_product_generators,
    fibre_product_presentation_finite_quotient,
    higman_presentation,
    j_construction,
    rips_construction,
    small_cancellation_ratio,
    tubular_bundle_presentation,
    uce_defect_words,
    uce_presentation,
)
from fpgroups.homology import abelianization_invariants, h2_rank_2complex
from fpgroups.presentations import (
    FinitePresentation,
    PresentationError,
    Word,
    euler_characteristic,
    parse_presentation,
    parse_word,
    tietze_simplify,
)


def brute_piece_ratio(p: FinitePresentation) -> Fraction:
    """Oracle: materialize the symmetrized set and scan all pairs."""
    elems = set()
    for r in p.relators:
        letters = tuple(r.cyclically_reduced().letters())
        if not letters:
            continue
        for base in (letters, tuple(-x for x in reversed(letters))):
            for s in range(len(base)):
                elems.add(base[s:] + base[:s])
    elems = sorted(elems)
    best = Fraction(0)
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            w1, w2 = elems[i], elems[j]
            m = min(len(w1), len(w2))
            lcp = 0
            while lcp < m and w1[lcp] == w2[lcp]:
                lcp += 1
            if lcp:
                best = max(best, Fraction(lcp, m))
    return best


class TestJConstruction:
    def test_single_relator_shape(self):
        p = parse_presentation("< x | x >")
        out = j_construction(p, higman_presentation(), "a1")
        assert len(out.generators) == 1 + 4
        assert len(out.relators) == 4 + 1
        assert out.relators[-1].render(out.names) == "x a1_1^-1"

    def test_counts_and_euler(self):
        p = parse_presentation("< x y | x y, y x, x^2 y >")
        out = j_construction(p, higman_presentation(), "a1")
        assert len(out.generators) == 2 + 3 * 4
        assert len(out.relators) == 3 * 4 + 3
        assert euler_characteristic(out) == 3 - 2 + 1

    def test_h1_matches_base_for_perfect_vertex(self):
        p = parse_presentation("< a | a^2 >")
        out = j_construction(p, higman_presentation(), "a1")
        assert abelianization_invariants(out) == abelianization_invariants(p)

    def test_h1_property_on_corpus(self):
        corpus = [
            "< a | a^2 >",
            "< a b | a^3, b^2 a >",
            "< x y | [x,y] >",
            "< x | x^5, x^3 >",
            "< u v w | u v w, w^2 >",
        ]
        hig = higman_presentation()
        for text in corpus:
            p = parse_presentation(text)
            out = j_construction(p, hig, "a1")
            assert abelianization_invariants(out) == abelianization_invariants(p), text
            assert euler_characteristic(out) == len(p.relators) - len(p.generators) + 1

    def test_alpha_must_be_generator(self):
        with pytest.raises(PresentationError, match="alpha"):
            j_construction(parse_presentation("< x | x >"), higman_presentation(), "zz")


class TestUCE:
    def test_higman_relator_count(self):
        out = uce_presentation(higman_presentation())
        assert len(out.relators) == 4 * (1 + 4)
        assert out.names == higman_presentation().names

    def test_higman_defect_words(self):
        hig = higman_presentation()
        defects = uce_defect_words(hig)
        assert defects[0].render(hig.names) == "a1 a2^-1 a1 a2 a1^-2"
        for w in defects:
            assert all(s == 0 for s in w.exponent_sums(4))

    def test_uce_output_is_perfect(self):
        out = uce_presentation(higman_presentation())
        assert abelianization_invariants(out).is_trivial()

    def test_added_relators_have_zero_exponent_sums(self):
        hig = higman_presentation()
        out = uce_presentation(hig)
        for r in out.relators:
            assert all(s == 0 for s in r.exponent_sums(4))

    def test_free_group_rejected(self):
        with pytest.raises(NotPerfectError):
            uce_presentation(parse_presentation("< a b | >"))

    def test_nontrivial_torsion_rejected(self):
        with pytest.raises(NotPerfectError):
            uce_presentation(parse_presentation("< a | a^2 >"))

    def test_power_relator_collapse_is_detected(self):
        # perfect, but [a, r] collapses for r = a
        with pytest.raises(PresentationError, match="collapses"):
            uce_presentation(parse_presentation("< a b | a, b >"))


class TestSmallCancellation:
    def test_commutator_is_bad(self):
        ratio = small_cancellation_ratio(parse_presentation("< a b | [a,b] >"))
        assert ratio >= Fraction(1, 4)

    def test_single_letter_has_no_pieces(self):
        assert small_cancellation_ratio(parse_presentation("< a | a >")) == 0

    def test_one_relator_scan_matches_oracle(self):
        p = parse_presentation("< a b | a b a b^2 a b^3 >")
        assert small_cancellation_ratio(p) == brute_piece_ratio(p)

    @given(
        st.lists(
            st.lists(
                st.tuples(st.integers(0, 2), st.integers(-2, 2).filter(bool)),
                min_size=1,
                max_size=6,
            ),
            min_size=1,
            max_size=4,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_matches_brute_oracle(self, raws):
        relators = [w for w in (Word.from_syllables(r) for r in raws) if not w.is_identity()]
        if not relators:
            return
        p = FinitePresentation(["a", "b", "c"], relators)
        assert small_cancellation_ratio(p) == brute_piece_ratio(p)


class TestRips:
    def test_count_contract_small(self):
        out = rips_construction(parse_presentation("< x | x^2 >"))
        h = out.presentation
        assert len(h.generators) == 1 + 3
        assert len(h.relators) == 1 + 6 * 1
        assert out.ratio < Fraction(1, 6)

    def test_free_input(self):
        out = rips_construction(parse_presentation("< x y | >"))
        assert len(out.presentation.generators) == 5
        assert len(out.presentation.relators) == 12
        assert out.ratio < Fraction(1, 6)

    def test_ratio_verified_independently(self):
        out = rips_construction(parse_presentation("< x | x^3 >"))
        assert small_cancellation_ratio(out.presentation) == out.ratio

    def test_kernel_generators_are_fresh(self):
        q = parse_presentation("< a b c | a b c >")  # clashes with filler names
        out = rips_construction(q)
        names = out.presentation.names
        assert names[:3] == ("a", "b", "c")
        assert len(set(names)) == 7

    def test_quotient_map_kills_kernel(self):
        q = parse_presentation("< x y | x y^2 >")
        out = rips_construction(q)
        gm = out.quotient_map
        n = len(q.generators)
        for i, img in enumerate(gm.images):
            if i < n:
                assert tuple(img.letters()) == (i + 1,)
            else:
                assert img.is_identity()

    def test_seed_changes_offset_start(self):
        q = parse_presentation("< x | x^2 >")
        out1 = rips_construction(q, seed=0)
        out2 = rips_construction(q, seed=7)
        assert out2.offset >= 7
        assert out1.presentation != out2.presentation

    def test_random_inputs_meet_contract(self):
        rng = random.Random(11)
        for _ in range(6):
            n = rng.randint(1, 3)
            m = rng.randint(0, 4)
            gens = [f"x{i}" for i in range(n)]
            relators = []
            for _ in range(m):
                raw = [
                    (rng.randrange(n), rng.choice([-2, -1, 1, 2]))
                    for _ in range(rng.randint(1, 5))
                ]
                w = Word.from_syllables(raw)
                if not w.is_identity():
                    relators.append(w)
            q = FinitePresentation(gens, relators)
            out = rips_construction(q, seed=rng.randrange(4))
            assert len(out.presentation.relators) == len(q.relators) + 6 * n
            assert out.ratio < Fraction(1, 6)


class TestFibreProduct:
    def test_generator_counts(self):
        out = rips_construction(parse_presentation("< x | x^2 >"))
        fib = fibre_product_generators(out)
        assert len(fib.generators) == 1 + 3
        assert len(fib.ambient.generators) == 8

    def test_two_generator_count(self):
        out = rips_construction(parse_presentation("< x y | x y >"))
        fib = fibre_product_generators(out)
        assert len(fib.generators) == 2 + 3

    def test_diagonal_words_hit_both_factors(self):
        out = rips_construction(parse_presentation("< x | x^2 >"))
        fib = fibre_product_generators(out)
        k = len(out.presentation.generators)
        diag = fib.generators[0]
        assert diag.syllables == ((0, 1), (k, 1))

    def test_finite_quotient_presentation_index2(self):
        f2 = parse_presentation("< s t | >")
        kernel = [parse_word(w, f2) for w in ("s^2", "t", "s t s^-1")]
        pres = fibre_product_presentation_finite_quotient(f2, kernel, 1000)
        assert len(pres.generators) <= 7
        inv = abelianization_invariants(pres)
        assert inv.free_rank == 4 and not inv.torsion

    def test_trivial_quotient_gives_whole_product(self):
        h = parse_presentation("< s | s^2 >")
        pres = fibre_product_presentation_finite_quotient(h, [parse_word("s", h)], 100)
        # index 1: the product itself, Z/2 x Z/2
        inv = abelianization_invariants(pres)
        assert inv.torsion == (2, 2) and inv.free_rank == 0

    def test_infinite_quotient_exceeds_budget(self):
        from fpgroups.finite_quotients import CosetLimitExceeded

        f2 = parse_presentation("< s t | >")
        with pytest.raises(CosetLimitExceeded):
            fibre_product_presentation_finite_quotient(f2, [], 1000)


class TestTubularBundles:
    def toy(self, shift=(1,)):
        v = parse_presentation("< g | g >")
        return TubularBundleData(
            d=1,
            n=1,
            m=1,
            vertex_presentations=(v,),
            attach_loops=(Word.generator(0),),
            rho=(Word.generator(0),),
            shifts=(tuple(shift),),
        )

    def test_toy_presentation_shape(self):
        pres = tubular_bundle_presentation(self.toy())
        assert pres.names == ("a1", "t1", "g_1")
        rendered = [r.render(pres.names) for r in pres.relators]
        assert rendered == [
            "t1 a1 t1^-1 a1^-1",
            "t1 g_1 t1^-1 g_1^-1",
            "g_1",
            "a1^-1 g_1 t1",
        ]

    def test_toy_presents_the_integers(self):
        pres = tubular_bundle_presentation(self.toy())
        simp = tietze_simplify(pres)
        assert len(simp.generators) == 1 and len(simp.relators) == 0
        inv = abelianization_invariants(pres)
        assert inv.free_rank == 1 and not inv.torsion

    def test_count_formulas(self):
        hig = higman_presentation()
        base = parse_presentation("< x | x^2, x^3 >")
        for d in (1, 2, 3):
            b = next(
                enumerate_tubular_bundles(
                    hig, Word.generator(0), d, 1, 2, list(base.relators), 0
                )
            )
            pres = tubular_bundle_presentation(b)
            sv = sum(len(v.generators) for v in b.vertex_presentations)
            sr = sum(len(v.relators) for v in b.vertex_presentations)
            assert len(pres.generators) == 1 + d + sv
            assert len(pres.relators) == d * (d - 1) // 2 + d * (1 + sv) + sr + 2

    def test_zero_shift_h1_is_free_of_rank_d(self):
        hig = higman_presentation()
        base = parse_presentation("< x | x^2, x^3 >")
        for d in (1, 2):
            b = next(
                enumerate_tubular_bundles(
                    hig, Word.generator(0), d, 1, 2, list(base.relators), 0
                )
            )
            inv = abelianization_invariants(tubular_bundle_presentation(b))
            assert inv.free_rank == d and not inv.torsion

    def test_enumeration_counts(self):
        v = parse_presentation("< g | g >")
        g0 = Word.generator(0)
        assert len(list(enumerate_tubular_bundles(v, g0, 1, 1, 1, [g0], 1))) == 3
        assert len(list(enumerate_tubular_bundles(v, g0, 2, 1, 2, [g0, g0], 1))) == 81
        assert len(list(enumerate_tubular_bundles(v, g0, 1, 1, 1, [g0], 0))) == 1

    def test_enumeration_order_is_lexicographic(self):
        v = parse_presentation("< g | g >")
        g0 = Word.generator(0)
        shifts = [b.shifts for b in enumerate_tubular_bundles(v, g0, 1, 1, 2, [g0, g0], 1)]
        flat = [tuple(z for row in s for z in row) for s in shifts]
        assert flat == sorted(flat)

    def test_json_round_trip(self):
        b = self.toy(shift=(3,))
        assert TubularBundleData.from_json(b.to_json()) == b

    def test_shift_length_validated(self):
        with pytest.raises(PresentationError, match="shift"):
            self.toy(shift=(1, 2))
