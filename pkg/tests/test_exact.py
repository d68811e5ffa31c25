"""Exact arithmetic: digits, convergents, comparisons, floors, rendering."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from birkhoff import exact as ex
from birkhoff.errors import (
    DomainError,
    InvalidDigitError,
    OutOfRangeError,
    PreconditionError,
    RefinementExhaustedError,
)
from conftest import mp_rho


class TestRotationConstruction:
    def test_golden_digits(self, golden):
        assert golden.digits_prefix(6) == [1] * 6

    def test_silver_digits(self, silver):
        assert silver.digits_prefix(4) == [2] * 4

    def test_e_minus_2_digit_pattern(self, e2):
        assert e2.digits_prefix(8) == [1, 2, 1, 1, 4, 1, 1, 6]

    def test_e_minus_2_convergent_denominators(self, e2):
        qs = [e2.convergent(n).q for n in range(1, 12)]
        assert qs == [1, 3, 4, 7, 32, 39, 71, 465, 536, 1001, 8544]

    def test_e_minus_2_approximant_719_1001(self, e2):
        c = e2.convergent(10)
        assert (c.p, c.q) == (719, 1001)

    def test_metallic_six_early_denominators(self, metallic6):
        assert [metallic6.convergent(n).q for n in range(3)] == [1, 6, 37]

    def test_golden_convergents(self, golden):
        c2, c3 = golden.convergent(2), golden.convergent(3)
        assert (c2.p, c2.q) == (1, 2)
        assert c2.d == ex.linear_form(-1, 2)
        assert (c3.p, c3.q) == (2, 3)
        assert golden.sign_form(c3.d) < 0  # odd index, d < 0

    def test_rational_from_finite_cf(self):
        rho = ex.rotation_from_cf([2])
        assert rho.is_rational and rho.rational_value == Fraction(1, 2)

    def test_rational_digits_via_euclid(self):
        rho = ex.rotation_from_rational(Fraction(2, 3))
        assert rho.digits_prefix(2) == [1, 2]
        last = rho.convergent(2)
        assert (last.p, last.q) == (2, 3)
        assert rho.sign_form(last.d) == 0

    def test_bad_digits_rejected(self):
        with pytest.raises(InvalidDigitError):
            ex.rotation_from_cf([0])
        with pytest.raises(InvalidDigitError):
            ex.rotation_from_cf([1], [1, -2])
        with pytest.raises(InvalidDigitError):
            ex.rotation_metallic(0)
        with pytest.raises(InvalidDigitError):
            ex.rotation_from_cf([1], [])

    def test_numeric_values(self, rho_set):
        for spec, rho in rho_set.items():
            f, err = rho.value_float()
            assert abs(mp_rho(spec) - f) <= err

    @given(st.lists(st.integers(min_value=1, max_value=9), min_size=1, max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_convergent_recursion_invariants(self, digits):
        rho = ex.rotation_from_cf([], digits)
        prev = None
        for n in range(12):
            c = rho.convergent(n)
            sign = rho.sign_form(c.d)
            assert sign == (1 if n % 2 == 0 else -1)
            q_next = rho.convergent(n + 1).q
            # |d_n| < 1/q_{n+1}
            abs_d = c.d if sign > 0 else -c.d
            assert rho.sign_form(abs_d * q_next - 1) < 0
            if prev is not None and n >= 2:
                assert c.q > prev.q
                abs_prev = prev.d if rho.sign_form(prev.d) > 0 else -prev.d
                assert rho.sign_form(abs_d - abs_prev) < 0
            prev = c


class TestComparisons:
    def test_golden_vs_half(self, golden):
        assert golden.compare_to_rational(Fraction(1, 2)) == ex.GREATER

    def test_golden_vs_two_thirds(self, golden):
        assert golden.compare_to_rational(Fraction(2, 3)) == ex.LESS

    def test_rational_equality(self):
        rho = ex.rotation_from_rational(Fraction(1, 2))
        assert rho.compare_to_rational(Fraction(1, 2)) == ex.EQUAL

    def test_lf_cmp_examples(self, golden):
        rho_f = ex.RHO
        assert ex.lf_cmp(rho_f, ex.linear_form(-1, 2), golden) == ex.GREATER
        assert ex.lf_cmp(rho_f, rho_f, golden) == ex.EQUAL
        assert ex.lf_cmp(ex.linear_form(-2, 3), ex.ZERO, golden) == ex.LESS

    def test_refinement_cap_guards_buggy_streams(self):
        # digits pinned to 1 forever but with a tiny cap: comparing against a
        # rational inside the final bracket cannot resolve
        rho = ex.rotation_from_cf([], [1], refinement_cap=6)
        near = ex.rotation_golden().convergent(30)
        with pytest.raises(RefinementExhaustedError):
            rho.compare_to_rational(Fraction(near.p, near.q))

    def test_float_never_contradicts_exact_order(self, rho_set):
        probes = [Fraction(k, 17) for k in range(1, 17)]
        for rho in rho_set.values():
            f, err = rho.value_float()
            for r in probes:
                cmp = rho.compare_to_rational(r)
                if float(r) < f - err:
                    assert cmp == ex.GREATER
                if float(r) > f + err:
                    assert cmp == ex.LESS


class TestLinearFormArithmetic:
    def test_field_operations(self):
        u = ex.linear_form(Fraction(1, 2), 3)
        v = ex.linear_form(-2, Fraction(1, 5))
        assert u + v == ex.linear_form(Fraction(-3, 2), Fraction(16, 5))
        assert u - v == ex.linear_form(Fraction(5, 2), Fraction(14, 5))
        assert -u == ex.linear_form(Fraction(-1, 2), -3)
        assert u * 2 == ex.linear_form(1, 6)
        assert u / 2 == ex.linear_form(Fraction(1, 4), Fraction(3, 2))

    def test_product_of_nonconstant_forms_rejected(self):
        u = ex.linear_form(0, 1)
        with pytest.raises(DomainError):
            u * u

    def test_constant_product_allowed(self):
        u = ex.linear_form(0, 2)
        c = ex.linear_form(Fraction(1, 2), 0)
        assert u * c == ex.linear_form(0, 1)


class TestFloorFrac:
    def test_two_rho_golden(self, golden):
        v = ex.linear_form(0, 2)
        assert ex.lf_floor(v, golden) == 1
        assert ex.lf_frac(v, golden) == ex.linear_form(-1, 2)

    def test_constant(self, golden):
        v = ex.linear_form(Fraction(5, 2))
        assert ex.lf_floor(v, golden) == 2
        assert ex.lf_frac(v, golden) == ex.linear_form(Fraction(1, 2))

    def test_four_rho_golden(self, golden):
        assert ex.lf_floor(ex.linear_form(0, 4), golden) == 2

    def test_rational_rho(self):
        rho = ex.rotation_from_rational(Fraction(2, 3))
        assert ex.lf_floor(ex.linear_form(0, 3), rho) == 2
        assert ex.lf_frac(ex.linear_form(0, 3), rho) == ex.linear_form(-2, 3)

    @given(
        st.fractions(min_value=-50, max_value=50, max_denominator=40),
        st.fractions(min_value=-50, max_value=50, max_denominator=40),
    )
    @settings(max_examples=60, deadline=None)
    def test_floor_frac_reconstruct(self, a, b):
        rho = ex.rotation_golden()
        v = ex.LinearForm(a, b)
        k = ex.lf_floor(v, rho)
        frac = ex.lf_frac(v, rho)
        assert frac + k == v
        assert rho.sign_form(frac) >= 0
        assert rho.sign_form(frac - 1) < 0


class TestCertifiedFloats:
    def test_rho_to_float(self, golden):
        f, bound = ex.lf_to_float(ex.RHO, golden, 30)
        assert bound <= 2.0**-30
        assert abs(mp_rho("golden") - f) <= bound

    def test_zero_exact(self, golden):
        f, bound = ex.lf_to_float(ex.ZERO, golden, 30)
        assert f == 0.0

    def test_two_rho_minus_one(self, golden):
        f, bound = ex.lf_to_float(ex.linear_form(-1, 2), golden, 30)
        assert abs(2 * mp_rho("golden") - 1 - f) <= bound

    def test_large_bits_rejected(self, golden):
        with pytest.raises(PreconditionError):
            ex.lf_to_float(ex.RHO, golden, 60)

    def test_sample_forms_all_rhos(self, rho_set):
        for spec, rho in rho_set.items():
            for a, b in [(0, 1), (-3, 5), (Fraction(7, 2), Fraction(-11, 3))]:
                v = ex.linear_form(a, b)
                f, bound = ex.lf_to_float(v, rho, 48)
                assert bound <= 2.0**-48
                assert abs(mp_rho(spec) * Fraction(b) + Fraction(a) - f) <= bound


class TestDerivedRotations:
    def test_complement_digits_of_golden(self, golden):
        comp = golden.complement()
        assert comp.digits_prefix(5) == [2, 1, 1, 1, 1]

    def test_complement_value(self, rho_set):
        for spec, rho in rho_set.items():
            comp = rho.complement()
            f, err = comp.value_float()
            assert abs((1 - mp_rho(spec)) - f) <= err

    def test_rational_complement(self):
        comp = ex.rotation_from_rational(Fraction(1, 3)).complement()
        assert comp.rational_value == Fraction(2, 3)

    def test_affine_shift_of_e2(self, e2):
        shifted = ex.rotation_affine(e2, Fraction(-22, 32), 1)
        expected = mp_rho("e-2") - Fraction(22, 32)
        f, err = shifted.value_float()
        assert abs(expected - f) <= err
        # the trapezoid normal form (1+d)/q starts its expansion with q = 32
        assert shifted.digit(1) == 32

    def test_affine_sign_consistency(self, e2):
        shifted = ex.rotation_affine(e2, Fraction(-22, 32), 1)
        lo, hi = Fraction(3, 100), Fraction(4, 100)
        assert shifted.compare_to_rational(lo) == ex.GREATER
        assert shifted.compare_to_rational(hi) == ex.LESS

    def test_affine_outside_unit_interval_rejected(self, golden):
        with pytest.raises(DomainError):
            ex.rotation_affine(golden, 1, 1)


class TestSortingAndExtrema:
    def test_exact_sorted_near_ties(self, golden):
        # convergent defects d_n are nearly zero and famously close together
        forms = [golden.convergent(n).d for n in range(3, 14)]
        forms += [ex.ZERO, ex.linear_form(Fraction(1, 10**9))]
        ordered = ex.exact_sorted(forms, golden)
        for u, v in zip(ordered, ordered[1:]):
            assert ex.lf_cmp(u, v, golden) <= 0

    def test_exact_extremum(self, golden):
        forms = [ex.linear_form(0, 1), ex.linear_form(-1, 2), ex.linear_form(1, -1)]
        idx, best = ex.exact_extremum(forms, golden, largest=True)
        assert idx == 0
        idx, worst = ex.exact_extremum(forms, golden, largest=False)
        assert idx == 1

    def test_exact_sorted_with_duplicates(self, golden):
        forms = [ex.RHO, ex.linear_form(0, 1), ex.ZERO]
        ordered = ex.exact_sorted(forms, golden)
        assert ordered[0] == ex.ZERO


class TestRhoSpecGrammar:
    @pytest.mark.parametrize(
        "spec,digits",
        [
            ("golden", [1, 1, 1]),
            ("silver", [2, 2, 2]),
            ("metallic:6", [6, 6, 6]),
            ("e-2", [1, 2, 1]),
            ("cf:1,2;3,4", [1, 2, 3, 4, 3, 4]),
            ("cf:;6,11,2,1", [6, 11, 2, 1, 6, 11]),
        ],
    )
    def test_parse_irrational(self, spec, digits):
        rho = ex.parse_rho_spec(spec)
        assert rho.digits_prefix(len(digits)) == digits

    def test_parse_rational(self):
        rho = ex.parse_rho_spec("rat:2/3")
        assert rho.is_rational and rho.rational_value == Fraction(2, 3)

    def test_parse_finite_cf(self):
        rho = ex.parse_rho_spec("cf:2")
        assert rho.is_rational and rho.rational_value == Fraction(1, 2)

    @pytest.mark.parametrize("bad", ["gold", "rat:1/0", "cf:0,1", "metallic:x", ""])
    def test_parse_errors(self, bad):
        with pytest.raises(InvalidDigitError):
            ex.parse_rho_spec(bad)

    def test_out_of_range_convergent(self):
        rho = ex.parse_rho_spec("rat:2/3")
        with pytest.raises(OutOfRangeError):
            rho.convergent(5)


class TestSerialization:
    def test_lf_json_wire_format(self, golden):
        obj = ex.lf_to_json(ex.linear_form(-1, 2), golden, 48)
        assert set(obj) == {"a", "b", "float"}
        assert obj["a"] == "-1/1" and obj["b"] == "2/1"
        assert abs(obj["float"] - 0.2360679) < 1e-6
        assert ex.lf_from_json(obj) == ex.linear_form(-1, 2)


class TestConcurrency:
    def test_shared_cache_growth(self):
        # many threads racing to refine the same rotation number must agree
        from concurrent.futures import ThreadPoolExecutor

        rho = ex.rotation_e_minus_2()

        def work(seed):
            out = []
            for k in range(1, 40):
                c = rho.convergent((seed + k) % 37 + 1)
                out.append((c.n, c.p, c.q))
                rho.sign_affine(-(seed % 7) - 1, k)
            return out

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(work, range(16)))
        reference = ex.rotation_e_minus_2()
        for rows in results:
            for n, p, q in rows:
                c = reference.convergent(n)
                assert (c.p, c.q) == (p, q)
