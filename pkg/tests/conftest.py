"""Shared fixtures and the independent high-precision oracle.

Exact results are cross-checked numerically against mpmath at 60 digits;
mpmath computes the rotation numbers from closed forms (sqrt, e), not
through the package's convergent machinery, so agreement is meaningful.
"""

from fractions import Fraction

import mpmath
import pytest

from birkhoff import exact as ex

mpmath.mp.dps = 60


def mp_rho(spec: str):
    """High-precision value of a named rotation number, computed independently."""
    if spec == "golden":
        return (mpmath.sqrt(5) - 1) / 2
    if spec == "silver":
        return mpmath.sqrt(2) - 1
    if spec == "e-2":
        return mpmath.e - 2
    if spec.startswith("metallic:"):
        a = int(spec.split(":")[1])
        return (mpmath.sqrt(a * a + 4) - a) / 2
    if spec == "cf:;6,11,2,1":
        return cf_backward([6, 11, 2, 1] * 25)
    raise ValueError(spec)


def cf_backward(digits):
    """Evaluate a continued fraction prefix bottom-up; error < 1/q_K^2."""
    x = mpmath.mpf(0)
    for a in reversed(digits):
        x = 1 / (a + x)
    return x


def mp_form(form, spec: str):
    """High-precision value of a + b*rho."""
    a = mpmath.mpf(form.a.numerator) / form.a.denominator
    b = mpmath.mpf(form.b.numerator) / form.b.denominator
    return a + b * mp_rho(spec)


def assert_form_close(form, spec: str, expected, tol=mpmath.mpf("1e-45")):
    got = mp_form(form, spec)
    assert abs(got - expected) < tol, f"{form} evaluates to {got}, expected {expected}"


@pytest.fixture(scope="session")
def golden():
    return ex.rotation_golden()


@pytest.fixture(scope="session")
def silver():
    return ex.rotation_silver()


@pytest.fixture(scope="session")
def e2():
    return ex.rotation_e_minus_2()


@pytest.fixture(scope="session")
def metallic6():
    return ex.rotation_metallic(6)


@pytest.fixture(scope="session")
def per6():
    return ex.rotation_from_cf([], [6, 11, 2, 1])


@pytest.fixture(scope="session")
def rho_set(golden, silver, e2, metallic6, per6):
    return {
        "golden": golden,
        "silver": silver,
        "e-2": e2,
        "metallic:6": metallic6,
        "cf:;6,11,2,1": per6,
    }


def F(*args) -> Fraction:
    return Fraction(*args)
