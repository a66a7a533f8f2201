import math
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randintegral.coefficients import (BetaMultiset, big_C, d_coeff, e_coeff, two_block_bracket,
                                       lagrange_identity_residual, lagrange_terms, little_c, pochhammer, rho)
from randintegral.errors import InvalidInputError

F = Fraction

rationals = st.fractions(min_value=F(1, 10), max_value=F(20), max_denominator=50)
distinct_rationals = st.lists(rationals, min_size=1, max_size=8, unique=True)


class TestBigC:
    def test_single(self):
        assert big_C([1.0]).values == (1.0,)

    def test_pair(self):
        assert big_C([1, 2]).values == (2, -1)

    def test_triple_exact(self):
        C = big_C([1, 2, 3], mode="exact")
        assert C.values == (3, -3, 1)
        assert C.total() == 1

    def test_duplicate_names_value(self):
        with pytest.raises(InvalidInputError, match="2"):
            big_C([1, 2, 2])

    def test_nonpositive_rejected(self):
        with pytest.raises(InvalidInputError, match="-1"):
            big_C([1, -1])

    def test_clustered_floats_refused(self):
        with pytest.raises(InvalidInputError, match="multiplicity"):
            big_C([1.0, 1.0 + 1e-12], mode="float")

    def test_exact_mode_keeps_fractions(self):
        C = big_C([F(1, 3), F(1, 2)], mode="exact")
        assert all(isinstance(v, Fraction) for v in C.values)

    @given(distinct_rationals)
    @settings(max_examples=80, deadline=None)
    def test_partition_of_unity_exact(self, betas):
        assert big_C(betas, mode="exact").total() == 1

    @given(distinct_rationals)
    @settings(max_examples=80, deadline=None)
    def test_partition_of_unity_float(self, betas):
        C = big_C([float(b) for b in betas], mode="float")
        assert abs(C.total() - 1) <= 1e-8 * max(abs(c) for c in C.values)


class TestLittleC:
    def test_examples(self):
        assert little_c([1]).values == (1,)
        assert little_c([1, 2]).values == (1, -1)
        assert little_c([2, 4], mode="exact").values == (F(1, 2), F(-1, 2))

    @given(distinct_rationals)
    @settings(max_examples=50, deadline=None)
    def test_relation_to_big_C(self, betas):
        C = big_C(betas, mode="exact")
        c = little_c(betas, mode="exact")
        prod = math.prod(C.exponents)
        assert all(Cj == prod / a * cj for Cj, cj, a in zip(C.values, c.values, C.exponents))

    @given(st.lists(rationals, min_size=2, max_size=8, unique=True))
    @settings(max_examples=50, deadline=None)
    def test_adding_one_exponent(self, vals):
        head, new = vals[:-1], vals[-1]
        c_n = dict(zip(little_c(head, mode="exact").exponents, little_c(head, mode="exact").values))
        c_next = dict(zip(little_c(vals, mode="exact").exponents, little_c(vals, mode="exact").values))
        for a, c in c_n.items():
            assert c / (new - a) == c_next[a]
        assert sum(c / (a - new) for a, c in c_n.items()) == c_next[new]


class TestD:
    def test_examples(self):
        assert d_coeff([1], 2, 0).values == (1,)
        assert d_coeff([1], 2, 1).values == (2,)
        assert d_coeff([1, 2], 4, 2, mode="exact").values == (F(32, 9), -4)

    def test_alpha_among_betas(self):
        with pytest.raises(InvalidInputError):
            d_coeff([1, 2], 2, 1)

    @given(distinct_rationals, rationals)
    @settings(max_examples=40, deadline=None)
    def test_zero_power_is_big_C(self, betas, alpha):
        if alpha in betas:
            return
        assert d_coeff(betas, alpha, 0, mode="exact").values == big_C(betas, mode="exact").values


def e_binomial(r, k, l):
    # (s)_{r-s}/(r-s)! = C(r-1, s-1) and (l)_{k-s}/(k-s)! = C(l+k-s-1, k-s)
    return sum((-1) ** s * comb(r - 1, s - 1) * comb(l + k - s - 1, k - s) for s in range(1, min(r, k) + 1))


class TestE:
    def test_examples(self):
        assert e_coeff(1, 1) == [-1]
        assert e_coeff(2, 1) == [-1, 0]

    @pytest.mark.parametrize("k", range(1, 9))
    @pytest.mark.parametrize("l", range(1, 9))
    def test_binomial_form(self, k, l):
        assert e_coeff(k, l) == [e_binomial(r, k, l) for r in range(1, k + l)]

    def test_rejects_zero(self):
        with pytest.raises(InvalidInputError):
            e_coeff(0, 2)

    def test_pochhammer(self):
        assert pochhammer(3, 0) == 1
        assert pochhammer(3, 4) == 3 * 4 * 5 * 6
        assert pochhammer(F(1, 2), 2) == F(3, 4)

    @given(st.integers(1, 8), st.integers(1, 8), rationals, rationals)
    @settings(max_examples=60, deadline=None)
    def test_two_block_bracket_is_one(self, k, l, alpha, gamma):
        if alpha == gamma:
            return
        assert two_block_bracket(k, l, alpha, gamma, mode="exact") == 1


class TestRho:
    def test_distinct_reduces_to_C(self):
        assert rho(BetaMultiset.of(1, 2)) == {1: 2, 2: -1}

    def test_repeated(self):
        A = BetaMultiset.from_pairs([(1, 1), (2, 2)])
        assert rho(A, 1) == 4
        assert rho(A, 2) == -1

    def test_not_member(self):
        with pytest.raises(InvalidInputError):
            rho(BetaMultiset.of(1, 2), 3)

    @given(distinct_rationals)
    @settings(max_examples=40, deadline=None)
    def test_sums_to_one(self, betas):
        r = rho(BetaMultiset.from_values(betas))
        assert sum(r.values()) == 1
        C = big_C(betas, mode="exact")
        assert [r[b] for b in C.exponents] == list(C.values)


class TestLagrange:
    def test_examples(self):
        assert lagrange_identity_residual([1, 2], 0) == 0
        assert lagrange_identity_residual([1 + 1j, 3, -2j], 5) < 1e-14
        assert lagrange_identity_residual([1, 2, 3, 4], 2) == 0

    def test_node_term_is_one(self):
        terms = lagrange_terms([1, 2, 3, 4], 2)
        assert terms == [0, 1, 0, 0]

    def test_duplicates_rejected(self):
        with pytest.raises(InvalidInputError):
            lagrange_identity_residual([1, 1], 0)

    @given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=8), st.complex_numbers(max_magnitude=5))
    @settings(max_examples=100, deadline=None)
    def test_random_configurations(self, zs, z):
        if any(abs(a - b) < 0.1 for i, a in enumerate(zs) for b in zs[:i]):
            return
        scale = max(1.0, max(abs(t) for t in lagrange_terms(zs, z)))
        assert lagrange_identity_residual(zs, z) <= 1e-10 * scale


class TestMultiset:
    def test_canonical_order(self):
        assert BetaMultiset.of(3, 1, 3) == BetaMultiset.from_pairs([(1, 1), (3, 2)])

    @given(st.lists(rationals, min_size=1, max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_permutation_invariant(self, vals):
        assert BetaMultiset.from_values(vals) == BetaMultiset.from_values(list(reversed(vals)))

    def test_parse(self):
        assert BetaMultiset.parse("2x3") == BetaMultiset.of(2, 2, 2)
        assert BetaMultiset.parse("1, 2x2") == BetaMultiset.of(1, 2, 2)
        assert BetaMultiset.parse("1/2").values == (F(1, 2),)

    @pytest.mark.parametrize("text", ["", "1,,2", "2x1.5", "0", "-1", "ax2", "2x0"])
    def test_parse_errors(self, text):
        with pytest.raises(InvalidInputError):
            BetaMultiset.parse(text)

    def test_size_and_expanded(self):
        A = BetaMultiset.parse("1,2x3")
        assert A.size == 4
        assert A.expanded() == (1, 2, 2, 2)
        assert not A.is_distinct
