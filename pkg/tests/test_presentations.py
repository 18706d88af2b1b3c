import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpgroups.presentations import (
    FinitePresentation,
    GeneratorMap,
    ParseError,
    PresentationError,
    Word,
    commutator,
    direct_product,
    euler_characteristic,
    free_reduce,
    parse_presentation,
    parse_word,
    tietze_simplify,
)

HIGMAN = (
    "< a1 a2 a3 a4 | a2^-1 a1 a2 a1^-2, a3^-1 a2 a3 a2^-2, "
    "a4^-1 a3 a4 a3^-2, a1^-1 a4 a1 a4^-2 >"
)


def syllables(max_gens=3, max_len=8):
    exp = st.integers(-3, 3).filter(lambda e: e != 0)
    return st.lists(st.tuples(st.integers(0, max_gens - 1), exp), max_size=max_len)


def naive_reduce(raw):
    """Independent oracle: repeatedly cancel adjacent inverse letters."""
    letters = []
    for g, e in raw:
        step = 1 if e > 0 else -1
        letters.extend([(g, step)] * abs(e))
    changed = True
    while changed:
        changed = False
        for i in range(len(letters) - 1):
            if letters[i][0] == letters[i + 1][0] and letters[i][1] == -letters[i + 1][1]:
                del letters[i : i + 2]
                changed = True
                break
    return tuple(g * s for g, s in [(g + 1, s) for g, s in letters])


class TestParsing:
    def test_commutator_shorthand(self):
        p = parse_presentation("< a b | [a,b] >")
        assert p.names == ("a", "b")
        assert [r.render(p.names) for r in p.relators] == ["a b a^-1 b^-1"]

    def test_higman(self):
        p = parse_presentation(HIGMAN)
        assert len(p.generators) == 4
        assert len(p.relators) == 4

    def test_empty_relator_rejected(self):
        with pytest.raises(ParseError) as err:
            parse_presentation("< a | a a^-1 >")
        assert "empty relator" in str(err.value)

    def test_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_presentation("< a |\n a b >")
        assert err.value.line == 2

    def test_undeclared_generator(self):
        with pytest.raises(ParseError, match="undeclared"):
            parse_presentation("< a | b >")

    def test_duplicate_generator(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_presentation("< a a | a^2 >")

    def test_equation_relator(self):
        p = parse_presentation("< a b | a b = b a >")
        assert p.relators[0] == parse_word("a b a^-1 b^-1", p)

    def test_paren_power(self):
        p = parse_presentation("< s t | (s t)^5 >")
        assert len(p.relators[0]) == 10

    def test_comments_and_whitespace(self):
        p = parse_presentation("# header\n< a  # gens\n  | a^3 >  # done")
        assert p.render() == "< a | a^3 >"

    def test_free_group_empty_relators(self):
        p = parse_presentation("< a b | >")
        assert p.relators == ()
        assert parse_presentation(p.render()) == p

    def test_render_round_trip(self):
        for text in [HIGMAN, "< a b | [a,b] >", "< x | x^2, x^-3 >"]:
            p = parse_presentation(text)
            assert parse_presentation(p.render()) == p


class TestWords:
    def test_free_reduce_examples(self):
        assert free_reduce([(0, 1), (0, -1), (1, 1)]) == Word(((1, 1),))
        assert free_reduce([(1, 1), (0, 1), (1, -1)], cyclic=True) == Word(((0, 1),))
        assert free_reduce([]) == Word()

    def test_cyclic_keeps_non_conjugation(self):
        # a b a has no boundary cancellation
        w = free_reduce([(0, 1), (1, 1), (0, 1)], cyclic=True)
        assert w.syllables == ((0, 1), (1, 1), (0, 1))

    def test_cyclic_partial(self):
        # a^3 b a^-1 -> a^2 b
        w = free_reduce([(0, 3), (1, 1), (0, -1)], cyclic=True)
        assert w.syllables == ((0, 2), (1, 1))

    @given(syllables())
    def test_reduce_matches_naive_oracle(self, raw):
        fast = tuple(free_reduce(raw).letters())
        assert fast == naive_reduce(raw)

    @given(syllables())
    def test_reduce_idempotent(self, raw):
        w = free_reduce(raw)
        assert free_reduce(w.syllables) == w

    @given(syllables(), syllables(), syllables())
    def test_group_axioms(self, a, b, c):
        u, v, w = free_reduce(a), free_reduce(b), free_reduce(c)
        assert (u * v) * w == u * (v * w)
        assert u * u.inverse() == Word()
        assert u.inverse().inverse() == u

    def test_powers(self):
        a = Word.generator(0)
        b = Word.generator(1)
        assert (a * b) ** 0 == Word()
        assert (a * b) ** -1 == b.inverse() * a.inverse()
        assert (a ** 3).syllables == ((0, 3),)

    def test_substitute(self):
        w = parse_word("a b a^-1", parse_presentation("< a b | >"))
        out = w.substitute([Word.generator(1), Word.generator(0)])
        assert tuple(out.letters()) == (2, 1, -2)


class TestExponentMatrix:
    def test_higman_is_minus_identity(self):
        p = parse_presentation(HIGMAN)
        m = p.exponent_matrix()
        assert m.to_lists() == [
            [-1, 0, 0, 0],
            [0, -1, 0, 0],
            [0, 0, -1, 0],
            [0, 0, 0, -1],
        ]

    def test_commutator_zero(self):
        p = parse_presentation("< a b | [a,b] >")
        assert p.exponent_matrix().to_lists() == [[0, 0]]

    def test_single_power(self):
        p = parse_presentation("< a | a^2 >")
        assert p.exponent_matrix().to_lists() == [[2]]


class TestDirectProduct:
    def test_free_squares(self):
        p = parse_presentation("< a b | >")
        dp = direct_product(p, p)
        assert len(dp.generators) == 4
        assert len(dp.relators) == 4

    def test_higman_square_counts(self):
        h = parse_presentation(HIGMAN)
        dp = direct_product(h, h)
        assert len(dp.generators) == 8
        assert len(dp.relators) == 4 + 4 + 16

    def test_disjoint_names_kept(self):
        dp = direct_product(
            parse_presentation("< a | a^2 >"), parse_presentation("< b | >")
        )
        assert dp.render() == "< a b | a^2, a b a^-1 b^-1 >"

    def test_exponent_matrix_block_structure(self):
        p1 = parse_presentation("< a b | a^2 b, [a,b] >")
        p2 = parse_presentation("< x | x^5 >")
        m = direct_product(p1, p2).exponent_matrix().to_lists()
        assert m[0] == [2, 1, 0]
        assert m[1] == [0, 0, 0]
        assert m[2] == [0, 0, 5]
        assert all(row == [0, 0, 0] for row in m[3:])


class TestTietze:
    def test_defining_relator_elimination(self):
        p = tietze_simplify(parse_presentation("< a b | b a^-2 >"))
        assert len(p.generators) == 1
        assert len(p.relators) == 0

    def test_duplicate_removal(self):
        p = tietze_simplify(parse_presentation("< a | a^2, a^2 >"))
        assert p.render() == "< a | a^2 >"

    def test_budget_zero_is_noop(self):
        src = parse_presentation("< a b | b a^-2 >")
        assert tietze_simplify(src, budget=0) == src

    def test_never_grows(self):
        src = parse_presentation("< a b c | a b c, [a,b], c^4, b a c >")
        out = tietze_simplify(src)
        assert len(out.generators) <= len(src.generators)
        assert out.total_relator_length() <= src.total_relator_length()

    def test_inverted_duplicate_removed(self):
        p = tietze_simplify(parse_presentation("< a b | a b, b^-1 a^-1 >"))
        assert len(p.relators) <= 1


class TestEuler:
    def test_examples(self):
        assert euler_characteristic(parse_presentation(HIGMAN)) == 1
        assert euler_characteristic(parse_presentation("< a b | >")) == -1
        assert euler_characteristic(parse_presentation("< a | a^2 >")) == 1


class TestGeneratorMap:
    def test_image_validation(self):
        src = parse_presentation("< a | >")
        tgt = parse_presentation("< x | >")
        with pytest.raises(PresentationError):
            GeneratorMap(source=src, target=tgt, images=(Word.generator(5),))

    def test_apply_and_free_check(self):
        src = parse_presentation("< a b | a b a^-1 b^-1 >")
        tgt = parse_presentation("< x | >")
        gm = GeneratorMap(
            source=src, target=tgt, images=(Word.generator(0), Word.generator(0))
        )
        assert gm.check_into_free()

    def test_commutator_helper(self):
        a, b = Word.generator(0), Word.generator(1)
        assert tuple(commutator(a, b).letters()) == (1, 2, -1, -2)
