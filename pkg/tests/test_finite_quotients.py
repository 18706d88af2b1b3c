import math

import pytest

from fpgroups.finite_quotients import (
    CatalogBoundError,
    CosetLimitExceeded,
    InconclusiveSearch,
    alternating_group,
    catalog_group,
    catalog_up_to,
    count_homomorphisms,
    epi_count,
    epi_count_report,
    epi_exists,
    fibre_epi_count_formula,
    hom_count,
    perm_inverse,
    perm_mul,
    psl2,
    reidemeister_schreier,
    simple_quotients_up_to,
    todd_coxeter,
    validate_witness,
)
from fpgroups.presentations import (
    FinitePresentation,
    Word,
    direct_product,
    parse_presentation,
    parse_word,
)

F2 = parse_presentation("< s t | >")
TRIANGLE = parse_presentation("< s t | s^2, t^3, (s t)^5 >")
HIGMAN = parse_presentation(
    "< a1 a2 a3 a4 | a2^-1 a1 a2 a1^-2, a3^-1 a2 a3 a2^-2, "
    "a4^-1 a3 a4 a3^-2, a1^-1 a4 a1 a4^-2 >"
)


class TestPermutations:
    def test_mul_then_inverse(self):
        p = (1, 2, 0)
        q = (0, 2, 1)
        pq = perm_mul(p, q)
        assert pq == tuple(q[p[i]] for i in range(3))
        assert perm_mul(pq, perm_inverse(pq)) == (0, 1, 2)

    def test_alternating_orders(self):
        for n in (3, 4, 5, 6, 7):
            assert alternating_group(n).order == math.factorial(n) // 2

    def test_psl2_orders_by_closure(self):
        expected = {5: 60, 7: 168, 8: 504, 9: 360, 11: 660, 13: 1092, 17: 2448}
        for q, order in expected.items():
            g = psl2(q)
            assert g.order == order
            assert g.degree == q + 1

    def test_psl2_rejects_unsupported(self):
        with pytest.raises(ValueError):
            psl2(19)


class TestCatalog:
    def test_small_bounds(self):
        assert [g.name for g in catalog_up_to(100)] == ["A5"]
        assert [g.order for g in catalog_up_to(700)] == [60, 168, 360, 504, 660]

    def test_full_catalog(self):
        assert [g.order for g in catalog_up_to(2520)] == [
            60, 168, 360, 504, 660, 1092, 2448, 2520,
        ]

    def test_bound_cap(self):
        with pytest.raises(CatalogBoundError):
            catalog_up_to(2521)

    def test_group_by_name(self):
        assert catalog_group("PSL2_7").order == 168
        with pytest.raises(ValueError):
            catalog_group("M11")


class TestHomCounts:
    def test_free_group_counts(self):
        a5 = catalog_group("A5")
        assert hom_count(F2, a5) == 3600
        assert epi_count(F2, a5) == 2280

    def test_hom_count_is_power_for_free_groups(self):
        a5 = catalog_group("A5")
        f1 = parse_presentation("< x | >")
        f3 = parse_presentation("< x y z | >")
        assert hom_count(f1, a5) == 60
        assert hom_count(f3, a5) == 60 ** 3

    def test_triangle_group(self):
        assert epi_count(TRIANGLE, catalog_group("A5")) == 120

    def test_cyclic_five(self):
        c5 = parse_presentation("< a | a^5 >")
        a5 = catalog_group("A5")
        assert hom_count(c5, a5) == 25
        assert epi_count(c5, a5) == 0

    def test_epi_exists_and_validates(self):
        a5 = catalog_group("A5")
        witness = epi_exists(TRIANGLE, a5)
        assert witness is not None
        assert validate_witness(TRIANGLE, a5, witness)
        assert epi_exists(parse_presentation("< a | a^5 >"), a5) is None

    def test_epi_exists_agrees_with_count(self):
        a5 = catalog_group("A5")
        for p in (F2, TRIANGLE, parse_presentation("< a | a^5 >")):
            assert (epi_exists(p, a5) is not None) == (epi_count(p, a5) > 0)

    def test_counts_invariant_under_generator_permutation(self):
        flipped = parse_presentation("< t s | t^3, s^2, (t^-1 t s t)^5 >")
        # same group as TRIANGLE with generators swapped and a redundant twist
        a5 = catalog_group("A5")
        assert epi_count(flipped, a5) == epi_count(TRIANGLE, a5)

    def test_direct_product_doubling(self):
        a5 = catalog_group("A5")
        ff = direct_product(F2, F2)
        assert epi_count(ff, a5, workers=2) == 2 * 2280

    def test_worker_counts_identical(self):
        a5 = catalog_group("A5")
        results = [count_homomorphisms(TRIANGLE, a5, workers=w) for w in (1, 2, 8)]
        assert len({(r.hom_count, r.epi_count) for r in results}) == 1

    def test_node_limit_marks_incomplete(self):
        a5 = catalog_group("A5")
        res = count_homomorphisms(F2, a5, node_limit=10)
        assert not res.complete
        with pytest.raises(InconclusiveSearch):
            epi_exists(parse_presentation("< a | a^5 >"), a5, node_limit=10)

    def test_report_marks_inconclusive_not_partial(self):
        a5 = catalog_group("A5")
        rep = epi_count_report(F2, [a5], node_limit=10)
        entry = rep.entry("A5")
        assert not entry.complete
        assert entry.hom_count is None and entry.epi_count is None


class TestSimpleQuotients:
    def test_abelian_witness(self):
        rep = simple_quotients_up_to(parse_presentation("< a | a^2 >"), 60)
        assert rep.abelian_witness == "Z/2 quotient from H1"
        assert rep.verdict == "quotient_found"

    def test_triangle_finds_a5(self):
        rep = simple_quotients_up_to(TRIANGLE, 60)
        entry = rep.entries[0]
        assert entry.group == "A5" and entry.epi_found
        assert validate_witness(TRIANGLE, catalog_group("A5"), entry.witness)

    def test_higman_small_bound(self):
        rep = simple_quotients_up_to(HIGMAN, 360)
        assert rep.h1.is_trivial()
        assert all(e.epi_found is False for e in rep.entries)
        assert rep.verdict == "no_nontrivial_quotient_up_to_bound"

    def test_json_round_trip_shape(self):
        rep = simple_quotients_up_to(TRIANGLE, 60)
        data = rep.to_json()
        assert data["verdict"] == "quotient_found"
        assert data["entries"][0]["witness"]


class TestTheFormula:
    def test_examples(self):
        assert fibre_epi_count_formula(2280, 0) == 4560
        assert fibre_epi_count_formula(2280, 120) == 4440
        assert fibre_epi_count_formula(0, 0) == 0

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            fibre_epi_count_formula(-1, 0)

    def test_inconsistent_inputs_flagged(self):
        with pytest.raises(ValueError, match="inconsistent"):
            fibre_epi_count_formula(1, 3)


class TestToddCoxeter:
    def test_index_two_in_free_group(self):
        kernel = [parse_word(w, F2) for w in ("s^2", "t", "s t s^-1")]
        table = todd_coxeter(F2, kernel, 100)
        assert table.index == 2
        # row 0 is the subgroup: subgroup generators fix coset 0
        for w in kernel:
            assert table.act(0, w) == 0

    def test_triangle_group_order(self):
        assert todd_coxeter(TRIANGLE, [], 2000).index == 60

    def test_whole_group_subgroup(self):
        table = todd_coxeter(TRIANGLE, [parse_word("s", TRIANGLE), parse_word("t", TRIANGLE)], 100)
        assert table.index == 1

    def test_cyclic_group(self):
        c5 = parse_presentation("< a | a^5 >")
        assert todd_coxeter(c5, [], 100).index == 5
        assert todd_coxeter(c5, [parse_word("a", c5)], 100).index == 1

    def test_infinite_group_exceeds(self):
        with pytest.raises(CosetLimitExceeded):
            todd_coxeter(F2, [], 1000)

    def test_index_invariant_under_relator_permutation(self):
        shuffled = parse_presentation("< s t | (s t)^5, s^2, t^3 >")
        assert todd_coxeter(shuffled, [], 2000).index == 60

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            todd_coxeter(F2, [], 0)


class TestReidemeisterSchreier:
    def test_free_index_two_gives_rank_three(self):
        kernel = [parse_word(w, F2) for w in ("s^2", "t", "s t s^-1")]
        sub = reidemeister_schreier(todd_coxeter(F2, kernel, 100))
        assert len(sub.generators) == 2 * (2 - 1) + 1
        assert len(sub.relators) == 0

    def test_index_one_is_isomorphic_copy(self):
        table = todd_coxeter(TRIANGLE, [parse_word("s", TRIANGLE), parse_word("t", TRIANGLE)], 100)
        sub = reidemeister_schreier(table)
        assert len(sub.generators) == 2
        assert len(sub.relators) == 3

    def test_index_two_in_f2xf2_counts(self):
        ambient = direct_product(F2, F2)
        kernel = [parse_word(w, F2) for w in ("s^2", "t", "s t s^-1")]
        diag = [Word.from_syllables([(i, 1), (2 + i, 1)]) for i in range(2)]
        table = todd_coxeter(ambient, diag + kernel, 100)
        assert table.index == 2
        sub = reidemeister_schreier(table)
        assert len(sub.generators) == 2 * 4 - (2 - 1)
        assert len(sub.relators) == 2 * 4

    def test_schreier_count_formula_index_five(self):
        c5 = parse_presentation("< a | a^5 >")
        sub = reidemeister_schreier(todd_coxeter(c5, [], 100))
        # 5 cosets, 1 generator: 5*1 - 4 = 1 Schreier generator, relator a^5 rewritten
        assert len(sub.generators) == 1
        assert len(sub.relators) == 5
