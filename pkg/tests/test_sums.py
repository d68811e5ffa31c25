"""Birkhoff sums: direct, shifted, closed forms, Ostrowski, fast path."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from birkhoff import exact as ex
from birkhoff import sums as bs
from birkhoff.errors import (
    DomainError,
    InvalidDigitError,
    InvalidExpansionError,
    OutOfRangeError,
    PreconditionError,
)
from conftest import assert_form_close, mp_rho


def brute_sum(rho, n, x=ex.ZERO):
    """Straight evaluation of the defining sum, one lf_frac per term."""
    total = ex.ZERO
    for i in range(1, n + 1):
        total = total + ex.lf_frac(x + ex.linear_form(0, i), rho) - Fraction(1, 2)
    return total


class TestSumDirect:
    def test_frozen_golden_values(self, golden):
        assert bs.sum_direct(golden, 0) == ex.ZERO
        assert bs.sum_direct(golden, 1) == ex.linear_form(Fraction(-1, 2), 1)
        assert bs.sum_direct(golden, 2) == ex.linear_form(-2, 3)
        assert bs.sum_direct(golden, 4) == ex.linear_form(-6, 10)

    def test_matches_brute_force(self, rho_set):
        for rho in rho_set.values():
            for n in (1, 2, 7, 30):
                assert bs.sum_direct(rho, n) == brute_sum(rho, n)

    def test_closed_form_identity(self, golden, e2):
        # S = nx + n(n+1)/2 rho - n/2 - sum floor(x + i rho)
        for rho in (golden, e2):
            for n, x in [(5, ex.ZERO), (9, ex.linear_form(Fraction(2, 7))), (4, ex.linear_form(Fraction(1, 3), 2))]:
                floors = sum(
                    ex.lf_floor(x + ex.linear_form(0, i), rho) for i in range(1, n + 1)
                )
                closed = (
                    x * n
                    + ex.linear_form(0, Fraction(n * (n + 1), 2))
                    - Fraction(n, 2)
                    - floors
                )
                assert bs.sum_direct(rho, n, x) == closed

    def test_nonzero_initial_point(self, golden):
        x = ex.linear_form(Fraction(1, 3))
        assert bs.sum_direct(golden, 3, x) == brute_sum(golden, 3, x)

    def test_rational_rho(self):
        rho = ex.rotation_from_rational(Fraction(2, 3))
        got = bs.sum_direct(rho, 3)
        assert rho.sign_form(got - ex.linear_form(Fraction(-1, 2))) == 0

    def test_numeric_cross_check(self, rho_set):
        for spec, rho in rho_set.items():
            value = bs.sum_direct(rho, 50)
            r = mp_rho(spec)
            expected = sum((i * r) % 1 - Fraction(1, 2) for i in range(1, 51))
            assert_form_close(value, spec, expected)


class TestSumHat:
    def test_single_term(self, golden):
        assert bs.sum_hat(golden, 1) == ex.linear_form(Fraction(-1, 2))

    def test_shift_identity(self, golden, e2):
        for rho in (golden, e2):
            for n in (1, 2, 5, 11):
                for x in (ex.ZERO, ex.RHO, ex.linear_form(Fraction(2, 5))):
                    direct = bs.sum_direct(rho, n, ex.lf_frac(x - ex.RHO, rho))
                    assert bs.sum_hat(rho, n, x) == direct

    def test_hat_at_rho_equals_direct_at_zero(self, golden):
        assert bs.sum_hat(golden, 2, ex.RHO) == bs.sum_direct(golden, 2)

    def test_ranges_agree(self, golden):
        # extrema over the circle agree between the two index conventions
        n = 5
        vals_s = [bs.sum_direct(golden, n, ex.lf_frac(ex.linear_form(0, -i), golden)) for i in range(1, n + 1)]
        vals_hat = [bs.sum_hat(golden, n, ex.lf_frac(ex.linear_form(0, -i), golden)) for i in range(0, n)]
        lo_s = ex.exact_extremum(vals_s, golden, largest=False)[1]
        lo_h = ex.exact_extremum(vals_hat, golden, largest=False)[1]
        hi_s = ex.exact_extremum(vals_s, golden, largest=True)[1]
        hi_h = ex.exact_extremum(vals_hat, golden, largest=True)[1]
        assert lo_s == lo_h and hi_s == hi_h


class TestComplementIdentities:
    def test_reflection_identity(self, rho_set):
        # S(1-rho, n, {-x}) = -S(rho, n, x) away from discontinuities
        for rho in rho_set.values():
            comp = rho.complement()
            for n in (1, 3, 8):
                for x in (Fraction(1, 7), Fraction(3, 11), Fraction(9, 13)):
                    lhs = bs.sum_direct(comp, n, ex.lf_frac(ex.linear_form(-x), comp))
                    rhs = -bs.sum_direct(rho, n, ex.linear_form(x))
                    assert comp.substituted(lhs) == rhs, (rho.spec_string, n, x)

    def test_shift_identity(self, rho_set):
        # S(1-rho, n, {x + (n+1) rho}) = S(rho, n, x)
        for rho in rho_set.values():
            comp = rho.complement()
            for n in (1, 2, 6):
                for x in (ex.ZERO, ex.linear_form(Fraction(2, 9))):
                    arg = ex.lf_frac(x + ex.linear_form(0, n + 1), rho)
                    # rewrite the argument over the complement's field
                    arg_c = ex.substitute(arg, 1, -1)
                    lhs = bs.sum_direct(comp, n, arg_c)
                    rhs = bs.sum_direct(rho, n, x)
                    assert comp.substituted(lhs) == rhs, (rho.spec_string, n)


class TestOrbit:
    def test_golden_four_steps(self, golden):
        recs = list(bs.orbit(golden, 4))
        assert [r.value for r in recs] == [
            ex.linear_form(Fraction(-1, 2), 1),
            ex.linear_form(-2, 3),
            ex.linear_form(Fraction(-7, 2), 6),
            ex.linear_form(-6, 10),
        ]
        assert [(r.is_running_max, r.is_running_min) for r in recs] == [
            (True, True),
            (False, True),
            (True, False),
            (False, False),
        ]

    def test_increment_invariant(self, e2):
        recs = list(bs.orbit(e2, 12))
        prev = ex.ZERO
        for rec in recs:
            inc = rec.value - prev
            expected = ex.lf_frac(ex.linear_form(0, rec.i), e2) - Fraction(1, 2)
            assert inc == expected
            prev = rec.value

    def test_non_field_initial_point_rejected(self, golden):
        with pytest.raises(DomainError):
            list(bs.orbit(golden, 2, 0.4472135955))


class TestShiftedSum:
    def test_frozen_values(self, golden):
        # S at the discontinuity {-k rho}; n = 3 cases
        assert bs.shifted_sum(golden, 3, 1) == ex.linear_form(Fraction(-5, 2), 3)
        assert bs.shifted_sum(golden, 3, 2) == ex.linear_form(Fraction(-1, 2))
        assert bs.shifted_sum(golden, 3, 3) == ex.linear_form(Fraction(3, 2), -3)

    def test_matches_value_at_discontinuity(self, golden, e2):
        for rho in (golden, e2):
            for n in (1, 4, 9):
                for k in range(1, n + 1):
                    x = ex.lf_frac(ex.linear_form(0, -k), rho)
                    assert bs.shifted_sum(rho, n, k) == bs.sum_direct(rho, n, x)

    def test_pairing_sums_to_minus_one(self, rho_set):
        for rho in rho_set.values():
            for n in (1, 2, 3, 10, 25):
                for k in range(1, n + 1):
                    total = bs.shifted_sum(rho, n, k) + bs.shifted_sum(rho, n, n + 1 - k)
                    assert total == ex.linear_form(-1)

    def test_min_max_pairing(self, rho_set):
        # min at k*, max at n+1-k*, and max + 1 = -min
        for rho in rho_set.values():
            for n in (2, 3, 7, 20):
                vals = [bs.shifted_sum(rho, n, k) for k in range(1, n + 1)]
                idx_min, v_min = ex.exact_extremum(vals, rho, largest=False)
                idx_max, v_max = ex.exact_extremum(vals, rho, largest=True)
                assert (idx_min + 1) + (idx_max + 1) == n + 1  # k* pairs with n+1-k*
                assert v_max + 1 == -v_min

    def test_rational_rejected(self):
        rho = ex.rotation_from_rational(Fraction(1, 2))
        with pytest.raises(DomainError):
            bs.shifted_sum(rho, 2, 1)

    def test_bounds_checked(self, golden):
        with pytest.raises(PreconditionError):
            bs.shifted_sum(golden, 3, 0)
        with pytest.raises(PreconditionError):
            bs.shifted_sum(golden, 3, 4)


class TestClosedFormAtConvergents:
    def test_golden_small(self, golden):
        assert bs.s_qn(golden, 1) == ex.linear_form(Fraction(-1, 2), 1)
        assert bs.s_qn(golden, 2) == ex.linear_form(-2, 3)

    def test_e2_index_five(self, e2):
        # q_5 = 32, d_5 = 32 rho - 23 < 0: value (33 d_5 + 1)/2
        expected = (e2.convergent(5).d * 33 + 1) * Fraction(1, 2)
        assert bs.s_qn(e2, 5) == expected
        assert bs.s_qn(e2, 5) == bs.sum_direct(e2, 32)

    def test_matches_direct_all_rhos(self, rho_set):
        for rho in rho_set.values():
            n = 0
            while True:
                q = rho.convergent(n).q
                if q > 3000:
                    break
                assert bs.s_qn(rho, n) == bs.sum_direct(rho, q)
                n += 1

    def test_rational_out_of_range(self):
        rho = ex.rotation_from_rational(Fraction(2, 3))
        with pytest.raises(OutOfRangeError):
            bs.s_qn(rho, 9)


class TestFloorFracSums:
    def test_rational_d_zero(self):
        rho = ex.rotation_from_rational(Fraction(2, 3))
        assert bs.floor_sum(2, 3, rho) == 3
        frac = bs.frac_sum(2, 3, rho)
        assert rho.sign_form(frac - 1) == 0

    def test_e2_convergent(self, e2):
        assert bs.floor_sum(23, 32, e2) == 363

    def test_random_rational_instances(self):
        rng = random.Random(7)
        import math as m

        for _ in range(40):
            q = rng.randrange(2, 200)
            p = rng.randrange(1, q)
            if m.gcd(p, q) != 1:
                continue
            d = Fraction(rng.randrange(-(q - 2) or 1, (q - 2) or 2), q * (q - 1) + 1)
            rho_val = Fraction(p, q) + d / q
            if not 0 < rho_val < 1:
                continue
            rho = ex.rotation_from_rational(rho_val)
            direct_floor = sum((i * rho_val).__floor__() for i in range(1, q + 1))
            assert bs.floor_sum(p, q, rho) == direct_floor
            direct_frac = sum((i * rho_val) % 1 for i in range(1, q + 1))
            got = bs.frac_sum(p, q, rho)
            assert rho.sign_form(got - direct_frac) == 0

    def test_preconditions(self, golden):
        with pytest.raises(PreconditionError):
            bs.floor_sum(2, 4, golden)  # gcd != 1
        with pytest.raises(PreconditionError):
            bs.floor_sum(1, 1, golden)  # q < 2
        with pytest.raises(PreconditionError):
            # golden is not within 1/(q-1) of 1/17
            bs.floor_sum(1, 17, golden)


class TestOstrowski:
    def test_golden_four(self, golden):
        exp = bs.ostrowski_expand(golden, 4)
        assert exp.digits == (0, 1, 0, 1)
        assert bs.ostrowski_value(exp) == 4

    def test_zero(self, golden):
        exp = bs.ostrowski_expand(golden, 0)
        assert exp.digits == () and bs.ostrowski_value(exp) == 0

    def test_basis_element(self, golden):
        exp = bs.ostrowski_expand(golden, golden.convergent(5).q)
        assert exp.digits == (0, 0, 0, 0, 0, 1)

    def test_e2_basis_element(self, e2):
        exp = bs.ostrowski_expand(e2, 32)
        assert exp.digits == (0, 0, 0, 0, 0, 1)
        assert bs.ostrowski_value(exp) == 32

    def test_round_trip(self, rho_set):
        for rho in rho_set.values():
            for m in range(0, 2000):
                assert bs.ostrowski_value(bs.ostrowski_expand(rho, m)) == m

    @given(st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_random(self, m):
        rho = ex.rotation_e_minus_2()
        assert bs.ostrowski_value(bs.ostrowski_expand(rho, m)) == m

    def test_partial_values_bounded(self, e2):
        exp = bs.ostrowski_expand(e2, 987654)
        for k in range(exp.leading_index + 1):
            assert exp.partial_value(k) < e2.convergent(k + 1).q

    def test_inadmissible_rejected(self, golden):
        with pytest.raises(InvalidExpansionError):
            # b_0 must be <= a_1 - 1 = 0 for the golden basis
            bs.OstrowskiExpansion(golden, (1,))
        with pytest.raises(InvalidExpansionError):
            # b_2 = a_3 = 1 forces b_1 = 0
            bs.OstrowskiExpansion(golden, (0, 1, 1))
        with pytest.raises(InvalidExpansionError):
            bs.OstrowskiExpansion(golden, (0, 1, 0, 0))  # trailing zero


class TestSumFast:
    def test_frozen(self, golden):
        assert bs.sum_fast(golden, 4) == ex.linear_form(-6, 10)
        assert bs.sum_fast(golden, 2) == ex.linear_form(-2, 3)
        assert bs.sum_fast(golden, 0) == ex.ZERO

    def test_agrees_with_direct(self, rho_set):
        for rho in rho_set.values():
            a_arr, b_arr = bs.sum_prefix(rho, 1500)
            for m in range(1501):
                assert bs.sum_fast(rho, m) == bs.prefix_form(a_arr, b_arr, m)

    def test_rational_rejected(self):
        with pytest.raises(DomainError):
            bs.sum_fast(ex.rotation_from_rational(Fraction(1, 2)), 10)

    def test_huge_index(self, golden):
        value = bs.sum_fast(golden, 10**12)
        assert value.b == Fraction(500000000000500000000000)


class TestRecursionStep:
    def test_frozen(self, golden):
        got = bs.recursion_step(golden, 2, 1)
        assert got == ex.linear_form(Fraction(-7, 2), 6)

    def test_k_zero(self, golden):
        assert bs.recursion_step(golden, 3, 0) == bs.sum_direct(golden, 3)

    def test_exhaustive_small(self, golden, e2):
        for rho in (golden, e2):
            for n in range(0, 6):
                q_next = rho.convergent(n + 1).q
                for k in range(0, q_next):
                    bs.recursion_step(rho, n, k)  # verify=True asserts internally

    def test_out_of_range_k(self, golden):
        with pytest.raises(PreconditionError):
            bs.recursion_step(golden, 2, golden.convergent(3).q)


class TestDigitInfluence:
    def test_zero_digit(self, golden):
        exp = bs.ostrowski_expand(golden, 4)
        assert bs.digit_influence(golden, exp, 1, 0) == ex.ZERO

    def test_frozen_golden(self, golden):
        exp = bs.ostrowski_expand(golden, 4)
        assert bs.digit_influence(golden, exp, 3, 1) == ex.linear_form(Fraction(-11, 2), 9)

    def test_residual_constant_over_digit(self, rho_set):
        rng = random.Random(3)
        for rho in rho_set.values():
            for _ in range(6):
                m = rng.randrange(1, 4000)
                exp = bs.ostrowski_expand(rho, m)
                for m_index in range(exp.leading_index + 1):
                    residuals = set()
                    for b in bs.admissible_digit_values(exp, m_index):
                        modified = exp.with_digit(m_index, b)
                        value = bs.sum_fast(rho, modified.value()) if modified.digits else ex.ZERO
                        residuals.add(value - bs.digit_influence(rho, exp, m_index, b))
                    assert len(residuals) == 1

    def test_quadratic_sign(self, e2):
        exp = bs.ostrowski_expand(e2, 500)
        for m_index in range(1, exp.leading_index + 1):
            c = e2.convergent(m_index)
            sign = e2.sign_form(c.d * c.q)
            assert sign == (1 if m_index % 2 == 0 else -1)

    def test_inadmissible_digit_rejected(self, golden):
        exp = bs.ostrowski_expand(golden, 4)
        with pytest.raises(InvalidDigitError):
            bs.digit_influence(golden, exp, 0, 1)


class TestMaximizeDigit:
    def test_matches_exhaustive_scan(self, rho_set):
        rng = random.Random(11)
        for rho in rho_set.values():
            for _ in range(8):
                m = rng.randrange(2, 5000)
                exp = bs.ostrowski_expand(rho, m)
                for m_index in range(1, exp.leading_index + 1, 2):
                    best = bs.maximize_digit(rho, exp, m_index)
                    allowed = bs.admissible_digit_values(exp, m_index)
                    scored = [
                        (bs.digit_influence(rho, exp, m_index, b), b) for b in allowed
                    ]
                    top = scored[0]
                    for val, b in scored[1:]:
                        if ex.lf_cmp(val, top[0], rho) > 0:
                            top = (val, b)
                    assert best == top[1]

    def test_even_index_rejected(self, golden):
        exp = bs.ostrowski_expand(golden, 4)
        with pytest.raises(PreconditionError):
            bs.maximize_digit(golden, exp, 2)


class TestRunningExtrema:
    def test_golden_four(self, golden):
        ext = bs.running_extrema(golden, 4)
        assert [r.index for r in ext.maxima] == [1, 3]
        assert [r.index for r in ext.minima] == [1, 2]
        assert ext.maxima[1].value == ex.linear_form(Fraction(-7, 2), 6)

    def test_single_step(self, golden):
        ext = bs.running_extrema(golden, 1)
        assert [r.index for r in ext.maxima] == [1]
        assert [r.index for r in ext.minima] == [1]

    def test_bracket_report(self, golden):
        ext = bs.running_extrema(golden, 4)
        min2 = ext.minima[1]
        assert min2.index == 2
        assert min2.bracket_index == 2 and min2.bracket_ok

    def test_matches_orbit_flags(self, e2):
        ext = bs.running_extrema(e2, 60)
        recs = list(bs.orbit(e2, 60))
        max_idx = [r.i for r in recs if r.is_running_max]
        min_idx = [r.i for r in recs if r.is_running_min]
        assert [r.index for r in ext.maxima] == max_idx
        assert [r.index for r in ext.minima] == min_idx

    def test_rational_rejected(self):
        with pytest.raises(DomainError):
            bs.running_extrema(ex.rotation_from_rational(Fraction(1, 3)), 5)
