"""Exact arithmetic over the field Q + Q*rho of a rotation number rho.

A rotation number is described by its continued fraction digits, never by a
decimal.  Every derived quantity in the package (sums, breakpoints,
discrepancies) is an affine form ``a + b*rho`` with rational coefficients, so
deciding an ordering reduces to one primitive: the sign of an integer affine
form ``A + B*rho``, settled by refining the convergent bracket around rho
until both endpoints give the same sign.  That primitive is
:meth:`RotationNumber.sign_affine`; everything else here is bookkeeping
around it (floors, fractional parts, certified floats, exact sorting).
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .errors import (
    DomainError,
    InvalidDigitError,
    OutOfRangeError,
    PreconditionError,
    RefinementExhaustedError,
    ResourceLimitError,
)

LESS, EQUAL, GREATER = -1, 0, 1

RatLike = Union[int, Fraction]

DEFAULT_REFINEMENT_CAP = 10_000

# |rho_float - rho| is kept below this before the float is handed out.
_FLOAT_ERR = 2.0 ** -60
_ULP_SLACK = 2.0 ** -50


def _as_fraction(x: RatLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an int or Fraction, got {type(x).__name__}")


def _sign(x) -> int:
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------
# LinearForm
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class LinearForm:
    """The exact value ``a + b*rho`` for an ambient rotation number rho.

    Closed under addition, subtraction and scaling by rationals.  A product
    of two forms with both ``b != 0`` would leave the field and is rejected.
    Comparisons need the ambient rho and live in :func:`lf_cmp` and friends.
    """

    a: Fraction
    b: Fraction

    def __add__(self, other):
        if isinstance(other, LinearForm):
            return LinearForm(self.a + other.a, self.b + other.b)
        if isinstance(other, (int, Fraction)):
            return LinearForm(self.a + other, self.b)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, LinearForm):
            return LinearForm(self.a - other.a, self.b - other.b)
        if isinstance(other, (int, Fraction)):
            return LinearForm(self.a - other, self.b)
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return LinearForm(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, LinearForm):
            if other.is_constant:
                other = other.a
            elif self.is_constant:
                return LinearForm(self.a * other.a, self.a * other.b)
            else:
                raise DomainError("product of two non-constant forms leaves Q + Q*rho")
        if isinstance(other, (int, Fraction)):
            return LinearForm(self.a * other, self.b * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LinearForm):
            if not other.is_constant:
                raise DomainError("division by a non-constant form leaves Q + Q*rho")
            other = other.a
        if isinstance(other, (int, Fraction)):
            return LinearForm(self.a / other, self.b / other)
        return NotImplemented

    @property
    def is_constant(self) -> bool:
        return self.b == 0

    def scaled_integer_coeffs(self) -> tuple[int, int, int]:
        """Return ``(A, B, D)`` with ``self = (A + B*rho)/D`` and integer A, B, D > 0."""
        d = self.a.denominator * self.b.denominator // math.gcd(
            self.a.denominator, self.b.denominator
        )
        return int(self.a * d), int(self.b * d), d

    def __repr__(self):
        return f"LinearForm({self.a!s}, {self.b!s})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*rho"
        return f"{self.a} + {self.b}*rho"


ZERO = LinearForm(Fraction(0), Fraction(0))
ONE = LinearForm(Fraction(1), Fraction(0))
HALF = LinearForm(Fraction(1, 2), Fraction(0))
RHO = LinearForm(Fraction(0), Fraction(1))


def linear_form(a: RatLike = 0, b: RatLike = 0) -> LinearForm:
    return LinearForm(_as_fraction(a), _as_fraction(b))


def as_linear_form(x) -> LinearForm:
    if isinstance(x, LinearForm):
        return x
    if isinstance(x, (int, Fraction)):
        return LinearForm(_as_fraction(x), Fraction(0))
    raise DomainError(
        f"value of type {type(x).__name__} is outside the exact field Q + Q*rho"
    )


# ---------------------------------------------------------------------------
# Convergents
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Convergent:
    """The triple ``(p_n, q_n, d_n)`` with ``d_n = q_n*rho - p_n``."""

    n: int
    p: int
    q: int

    @property
    def d(self) -> LinearForm:
        return LinearForm(Fraction(-self.p), Fraction(self.q))

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)


# ---------------------------------------------------------------------------
# RotationNumber
# ---------------------------------------------------------------------------


class RotationNumber:
    """A rotation angle in [0, 1] given by continued fraction digits.

    Three flavours share this class: exact rationals (finite digit list),
    eventually periodic digit strings (quadratic irrationals), and arbitrary
    digit generators.  Digit and convergent caches grow monotonically under a
    lock; published values are immutable, so instances are safe to share
    between threads.
    """

    def __init__(
        self,
        digits: Sequence[int] = (),
        provider: Optional[Iterator[int]] = None,
        rational: Optional[Fraction] = None,
        spec: str = "",
        refinement_cap: int = DEFAULT_REFINEMENT_CAP,
    ):
        digits = [int(a) for a in digits]
        for a in digits:
            if a < 1:
                raise InvalidDigitError(f"continued fraction digit {a} < 1")
        self._digits = digits
        self._provider = provider
        self._rational = rational
        self._spec = spec
        self._cap = refinement_cap
        self._lock = threading.RLock()
        # p, q convergent caches, index 0 upward
        self._p = [0]
        self._q = [1]
        self._depth = 1  # current comparison bracket depth
        self._float: Optional[tuple[float, float]] = None
        self._aux: dict = {}  # per-instance caches used by other modules
        if rational is not None and not 0 <= rational <= 1:
            raise DomainError(f"rotation number {rational} is outside [0, 1]")

    # -- digits and convergents ------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self._rational is not None

    @property
    def rational_value(self) -> Fraction:
        if self._rational is None:
            raise DomainError("rotation number is irrational")
        return self._rational

    @property
    def spec_string(self) -> str:
        return self._spec

    @property
    def cf_length(self) -> Optional[int]:
        """Number of digits for a rational, None for an irrational."""
        return len(self._digits) if self.is_rational else None

    def _ensure_digits(self, k: int) -> None:
        if len(self._digits) >= k:
            return
        with self._lock:
            while len(self._digits) < k:
                if self._provider is None:
                    raise OutOfRangeError(
                        f"continued fraction has only {len(self._digits)} digits"
                    )
                if len(self._digits) >= self._cap:
                    raise RefinementExhaustedError(
                        f"refinement cap of {self._cap} digits reached"
                    )
                a = int(next(self._provider))
                if a < 1:
                    raise InvalidDigitError(f"digit generator produced {a} < 1")
                self._digits.append(a)

    def digit(self, k: int) -> int:
        """The k-th continued fraction digit a_k (1-based)."""
        if k < 1:
            raise OutOfRangeError("digit indices start at 1")
        self._ensure_digits(k)
        return self._digits[k - 1]

    def digits_prefix(self, k: int) -> list[int]:
        self._ensure_digits(k)
        return self._digits[:k]

    def convergent(self, n: int) -> Convergent:
        """Exact ``(p_n, q_n)`` from the standard recursion."""
        if n < 0:
            raise OutOfRangeError("convergent indices start at 0")
        if n >= len(self._p):
            with self._lock:
                while len(self._p) <= n:
                    k = len(self._p)  # about to fill index k
                    a = self.digit(k)
                    if k == 1:
                        self._p.append(1)
                        self._q.append(a)
                    else:
                        self._p.append(a * self._p[k - 1] + self._p[k - 2])
                        self._q.append(a * self._q[k - 1] + self._q[k - 2])
        return Convergent(n, self._p[n], self._q[n])

    def convergents_upto_q(self, q_max: int, start: int = 1) -> list[Convergent]:
        """All convergents with index >= start and denominator <= q_max."""
        out = []
        n = start
        while True:
            try:
                c = self.convergent(n)
            except OutOfRangeError:
                break
            if c.q > q_max:
                break
            out.append(c)
            n += 1
        return out

    # -- the sign primitive ----------------------------------------------

    def sign_affine(self, A: int, B: int) -> int:
        """Exact sign of ``A + B*rho`` for integers A, B."""
        if B == 0:
            return _sign(A)
        if self._rational is not None:
            r = self._rational
            return _sign(A * r.denominator + B * r.numerator)
        if A == 0:
            return _sign(B)  # rho > 0 for an irrational in (0, 1)
        k = self._depth
        while True:
            self.convergent(k)
            pl, ql = self._p[k - 1], self._q[k - 1]
            ph, qh = self._p[k], self._q[k]
            s_prev = _sign(A * ql + B * pl)
            s_cur = _sign(A * qh + B * ph)
            if s_prev == s_cur and s_prev != 0:
                if k > self._depth:
                    self._depth = k
                return s_prev
            k += 1

    def sign_form(self, v: LinearForm) -> int:
        """Exact sign of an affine form over this rotation number."""
        if v.b == 0:
            return _sign(v.a)
        A, B, _ = v.scaled_integer_coeffs()
        return self.sign_affine(A, B)

    def compare_to_rational(self, r: RatLike) -> int:
        """Ordering of rho against a rational: LESS, EQUAL or GREATER."""
        r = _as_fraction(r)
        if self._rational is not None:
            return _sign(self._rational - r)
        return self.sign_affine(-r.numerator, r.denominator)

    # -- certified floating point ------------------------------------------

    def bracket(self, n: int) -> tuple[Fraction, Fraction]:
        """Rational bounds ``lo < rho < hi`` from convergents n-1 and n."""
        if self._rational is not None:
            return self._rational, self._rational
        self.convergent(max(n, 1))
        n = max(n, 1)
        lo = Fraction(self._p[n - 1], self._q[n - 1])
        hi = Fraction(self._p[n], self._q[n])
        return (lo, hi) if lo < hi else (hi, lo)

    def bracket_for_width(self, width: Fraction) -> tuple[Fraction, Fraction]:
        """A bracket of width at most the given rational (irrational rho)."""
        n = max(self._depth, 1)
        while True:
            self.convergent(n)
            if Fraction(1, self._q[n - 1] * self._q[n]) <= width:
                return self.bracket(n)
            n += 1

    def value_float(self) -> tuple[float, float]:
        """A double for rho with a certified absolute error bound."""
        if self._float is not None:
            return self._float
        if self._rational is not None:
            f = float(self._rational)
            approx = (f, math.ulp(f))
        else:
            lo, hi = self.bracket_for_width(Fraction(1, 2**62))
            mid = (lo + hi) / 2
            f = float(mid)
            approx = (f, float(hi - lo) + math.ulp(f))
        self._float = approx
        return approx

    def value_longdouble(self):
        """An extended-precision rho with a certified error bound.

        On x86 this is the 80-bit long double (64-bit mantissa); on platforms
        where long double is a plain double the bound widens accordingly.
        """
        cached = self._aux.get("longdouble")
        if cached is not None:
            return cached
        eps = float(np.finfo(np.longdouble).eps)
        if self._rational is not None:
            p, q = self._rational.numerator, self._rational.denominator
            width = np.longdouble(0)
        else:
            lo, _ = self.bracket_for_width(Fraction(1, 2**80))
            p, q = lo.numerator, lo.denominator
            width = np.longdouble(2.0) ** -80
        # a 2^-80 bracket endpoint has q ~ 2^40, so the pieces convert exactly
        if abs(p) < 2**62 and q < 2**62:
            val = np.longdouble(p) / np.longdouble(q)
            err = width + np.longdouble(2 * eps)
        else:
            f, fe = self.value_float()
            val = np.longdouble(f)
            err = np.longdouble(fe) + np.longdouble(2 * eps)
        result = (val, err)
        self._aux["longdouble"] = result
        return result

    # -- derived rotation numbers ----------------------------------------

    def complement(self) -> "RotationNumber":
        """The rotation number 1 - rho."""
        if self._rational is not None:
            return rotation_from_rational(1 - self._rational)
        return rotation_affine(self, 1, -1, spec=f"complement({self._spec})")

    # -- bulk floors -------------------------------------------------------

    def floor_multiples(self, n: int) -> np.ndarray:
        """``floor(i*rho)`` for i = 0..n as an int64 array.

        Vectorized through the certified float; entries whose fractional part
        falls inside the float error band are re-decided exactly.
        """
        if n > 50_000_000:
            raise ResourceLimitError(f"floor table of size {n} refused")
        if self._rational is not None:
            p, q = self._rational.numerator, self._rational.denominator
            return np.array([(i * p) // q for i in range(n + 1)], dtype=np.int64)
        rf, re = self.value_float()
        i = np.arange(n + 1, dtype=np.float64)
        t = i * rf
        c = np.floor(t)
        frac = t - c
        bound = i * re + (np.abs(t) + 1.0) * _ULP_SLACK
        risky = np.nonzero((frac <= bound) | (frac >= 1.0 - bound))[0]
        out = c.astype(np.int64)
        for j in map(int, risky):
            out[j] = _exact_floor_multiple(self, j)
        return out

    def __repr__(self):
        return f"RotationNumber({self._spec or self._digits[:6]!r})"


def _exact_floor_multiple(rho: RotationNumber, i: int) -> int:
    """floor(i*rho) by certified search around the float estimate."""
    if i == 0:
        return 0
    rf, _ = rho.value_float()
    k = math.floor(i * rf)
    # adjust until k <= i*rho < k+1
    while rho.sign_affine(-k, i) < 0:  # i*rho < k
        k -= 1
    while rho.sign_affine(-(k + 1), i) >= 0:  # i*rho >= k+1
        k += 1
    return k


class AffineRotation(RotationNumber):
    """The rotation number ``u + v*rho`` for rational u, v over a base rho.

    Sign decisions delegate to the base field, so measure and sum
    constructions over an affine image cost the same as over the base.
    Continued fraction digits, when asked for, are produced lazily by the
    homographic (Gosper-style) expansion algorithm.
    """

    def __init__(self, base: RotationNumber, u: Fraction, v: Fraction, spec: str = ""):
        if base.is_rational:
            raise DomainError("affine images of rationals should be built as rationals")
        if v == 0:
            raise DomainError("affine image with v = 0 is a plain rational")
        self.base = base
        self.u = u
        self.v = v
        num_den = u.denominator * v.denominator // math.gcd(u.denominator, v.denominator)
        gen = _homographic_cf_digits(
            base, int(u * num_den), int(v * num_den), num_den, 0
        )
        super().__init__(provider=gen, spec=spec or f"affine({u}+{v}*rho)")
        if self.sign_affine(0, 1) <= 0 or self.sign_affine(-1, 1) >= 0:
            raise DomainError(f"affine image {u} + {v}*rho is outside (0, 1)")

    def sign_affine(self, A: int, B: int) -> int:
        c = A + B * self.u
        d = B * self.v
        if d == 0:
            return _sign(c)
        scale = c.denominator * d.denominator // math.gcd(c.denominator, d.denominator)
        return self.base.sign_affine(int(c * scale), int(d * scale))

    def value_float(self) -> tuple[float, float]:
        if self._float is None:
            rf, re = self.base.value_float()
            f = float(self.u) + float(self.v) * rf
            err = abs(float(self.v)) * re + (abs(f) + 1.0) * _ULP_SLACK
            self._float = (f, err)
        return self._float

    def value_longdouble(self):
        cached = self._aux.get("longdouble")
        if cached is None:
            if (
                max(abs(self.u.numerator), self.u.denominator) >= 2**62
                or max(abs(self.v.numerator), self.v.denominator) >= 2**62
            ):
                return super().value_longdouble()
            base_val, base_err = self.base.value_longdouble()
            eps = np.longdouble(float(np.finfo(np.longdouble).eps))
            u = np.longdouble(self.u.numerator) / np.longdouble(self.u.denominator)
            v = np.longdouble(self.v.numerator) / np.longdouble(self.v.denominator)
            val = u + v * base_val
            err = abs(v) * base_err + (abs(u) + abs(v) + 1) * 4 * eps
            cached = (val, err)
            self._aux["longdouble"] = cached
        return cached

    def substituted(self, form: LinearForm) -> LinearForm:
        """Rewrite a form over this rotation number as a form over the base."""
        return LinearForm(form.a + form.b * self.u, form.b * self.v)


def _homographic_cf_digits(
    base: RotationNumber, na: int, nb: int, da: int, db: int
) -> Iterator[int]:
    """Continued fraction digits of ``x = (na + nb*rho)/(da + db*rho)``.

    x must be irrational and in (0, 1).  Floors are decided by evaluating the
    state over a shrinking rational bracket for rho, which is exact and
    terminates because x never has a rational tail.
    """
    # state y = (A + B*rho)/(C + D*rho); start from y = 1/x
    A, B, C, D = da, db, na, nb
    while True:
        a = _homographic_floor(base, A, B, C, D)
        yield a
        A, B, C, D = C, D, A - a * C, B - a * D


def _homographic_floor(base: RotationNumber, A: int, B: int, C: int, D: int) -> int:
    depth = base._depth
    while True:
        lo, hi = base.bracket(depth)
        den_lo, den_hi = C + D * lo, C + D * hi
        if den_lo != 0 and den_hi != 0 and _sign(den_lo) == _sign(den_hi):
            y_lo = (A + B * lo) / den_lo
            y_hi = (A + B * hi) / den_hi
            f_lo, f_hi = (y_lo, y_hi) if y_lo <= y_hi else (y_hi, y_lo)
            k_lo = f_lo.numerator // f_lo.denominator
            k_hi = f_hi.numerator // f_hi.denominator
            if k_lo == k_hi:
                return k_lo
        depth += 1
        base.convergent(depth)


# ---------------------------------------------------------------------------
# Constructors and the rho-spec grammar
# ---------------------------------------------------------------------------


def rotation_from_rational(r: RatLike, spec: str = "") -> RotationNumber:
    r = _as_fraction(r)
    if not 0 <= r <= 1:
        raise DomainError(f"rotation number {r} is outside [0, 1]")
    digits = []
    num, den = r.numerator, r.denominator
    # Euclid on r in (0, 1]: digits of [a1, a2, ...]
    while num:
        a, rem = divmod(den, num)
        if rem == 0:
            digits.append(a)
            break
        digits.append(a)
        den, num = num, rem
    return RotationNumber(
        digits=digits, rational=r, spec=spec or f"rat:{r.numerator}/{r.denominator}"
    )


def rotation_from_cf(
    pre: Sequence[int],
    period: Optional[Sequence[int]] = None,
    spec: str = "",
    refinement_cap: int = DEFAULT_REFINEMENT_CAP,
) -> RotationNumber:
    """Rotation number from continued fraction digits.

    A finite ``pre`` with no period is an exact rational; a nonempty
    ``period`` makes the digit string eventually periodic.
    """
    pre = [int(a) for a in pre]
    for a in pre:
        if a < 1:
            raise InvalidDigitError(f"continued fraction digit {a} < 1")
    if period is None:
        if not spec:
            spec = "cf:" + ",".join(map(str, pre))
        # evaluate the finite continued fraction exactly
        value = Fraction(0)
        for a in reversed(pre):
            value = Fraction(1, a + value)
        return rotation_from_rational(value, spec=spec)
    period = [int(a) for a in period]
    if not period:
        raise InvalidDigitError("period must be nonempty")
    for a in period:
        if a < 1:
            raise InvalidDigitError(f"continued fraction digit {a} < 1")
    if not spec:
        spec = "cf:" + ",".join(map(str, pre)) + ";" + ",".join(map(str, period))
    provider = itertools.cycle(period)
    return RotationNumber(
        digits=pre, provider=provider, spec=spec, refinement_cap=refinement_cap
    )


def rotation_metallic(a: int, spec: str = "") -> RotationNumber:
    """The metallic mean [a, a, a, ...]."""
    if a < 1:
        raise InvalidDigitError(f"metallic parameter {a} < 1")
    return rotation_from_cf([], [a], spec=spec or f"metallic:{a}")


def rotation_golden() -> RotationNumber:
    return rotation_metallic(1, spec="golden")


def rotation_silver() -> RotationNumber:
    return rotation_metallic(2, spec="silver")


def _e_minus_2_digits() -> Iterator[int]:
    yield 1
    k = 1
    while True:
        yield 2 * k
        yield 1
        yield 1
        k += 1


def rotation_e_minus_2() -> RotationNumber:
    """e - 2 = [1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8, ...]."""
    return RotationNumber(provider=_e_minus_2_digits(), spec="e-2")


def rotation_affine(
    base: RotationNumber, u: RatLike, v: RatLike, spec: str = ""
) -> RotationNumber:
    """The rotation number ``u + v*base`` reduced to the simplest kind."""
    u, v = _as_fraction(u), _as_fraction(v)
    if base.is_rational:
        return rotation_from_rational(u + v * base.rational_value, spec=spec)
    if v == 0:
        return rotation_from_rational(u, spec=spec)
    if isinstance(base, AffineRotation):
        return AffineRotation(base.base, u + v * base.u, v * base.v, spec=spec)
    return AffineRotation(base, u, v, spec=spec)


def parse_rho_spec(text: str) -> RotationNumber:
    """Parse the textual rho grammar shared by the CLI, service and fixtures.

    ``golden | silver | metallic:<a> | e-2 | cf:<a1>,...[;<periodic digits>]
    | rat:<p>/<q>``
    """
    text = text.strip()
    if text == "golden":
        return rotation_golden()
    if text == "silver":
        return rotation_silver()
    if text == "e-2":
        return rotation_e_minus_2()
    try:
        if text.startswith("metallic:"):
            return rotation_metallic(int(text.split(":", 1)[1]), spec=text)
        if text.startswith("rat:"):
            p_str, q_str = text.split(":", 1)[1].split("/")
            return rotation_from_rational(Fraction(int(p_str), int(q_str)), spec=text)
        if text.startswith("cf:"):
            body = text.split(":", 1)[1]
            if ";" in body:
                pre_str, per_str = body.split(";", 1)
                pre = [int(t) for t in pre_str.split(",") if t]
                period = [int(t) for t in per_str.split(",") if t]
                return rotation_from_cf(pre, period, spec=text)
            pre = [int(t) for t in body.split(",") if t]
            return rotation_from_cf(pre, None, spec=text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidDigitError(f"bad rotation spec {text!r}: {exc}") from None
    raise InvalidDigitError(f"unrecognized rotation spec {text!r}")


# ---------------------------------------------------------------------------
# Comparisons, floors, fractional parts
# ---------------------------------------------------------------------------


def lf_sign(v: LinearForm, rho: RotationNumber) -> int:
    return rho.sign_form(v)


def lf_cmp(u: LinearForm, v: LinearForm, rho: RotationNumber) -> int:
    """Ordering of two forms over the same rho: LESS, EQUAL or GREATER."""
    return rho.sign_form(u - v)


def lf_approx(v: LinearForm, rho: RotationNumber) -> tuple[float, float]:
    """A double for the form with a certified (conservative) error bound."""
    rf, re = rho.value_float()
    af, bf = float(v.a), float(v.b)
    f = af + bf * rf
    err = abs(bf) * re + (1.0 + abs(af) + abs(bf) + abs(f)) * _ULP_SLACK
    return f, err


def lf_floor(v: LinearForm, rho: RotationNumber) -> int:
    """The integer k with ``k <= v < k+1``, decided exactly."""
    if v.b == 0:
        return v.a.numerator // v.a.denominator
    if rho.is_rational:
        exact = v.a + v.b * rho.rational_value
        return exact.numerator // exact.denominator
    if abs(v.b) > 2**40:
        # the shared float is too coarse; evaluate over a dedicated bracket
        lo, hi = rho.bracket_for_width(Fraction(1, 8 * abs(v.b.numerator) + 8))
        mid = v.a + v.b * (lo + hi) / 2
        k = mid.numerator // mid.denominator
    else:
        f, _ = lf_approx(v, rho)
        k = math.floor(f)
    while rho.sign_form(v - k) < 0:
        k -= 1
    while rho.sign_form(v - (k + 1)) >= 0:
        k += 1
    return k


def lf_frac(v: LinearForm, rho: RotationNumber) -> LinearForm:
    """``v - floor(v)``, an exact form in [0, 1)."""
    return v - lf_floor(v, rho)


def lf_to_float(
    v: LinearForm, rho: RotationNumber, bits: int = 48
) -> tuple[float, float]:
    """A double for the form plus a certified bound ``<= 2**-bits``.

    The bound must leave room for one double rounding, so ``bits`` is capped
    at 50.
    """
    if bits < 1:
        raise PreconditionError("bits must be >= 1")
    if bits > 50:
        raise PreconditionError("bits > 50 cannot be certified in a double")
    if v.b == 0 or rho.is_rational:
        exact = v.a if v.b == 0 else v.a + v.b * rho.rational_value
        f = float(exact)
        return f, math.ulp(f)
    # bracket rho until |b| * width <= 2^-(bits+4), then one correct rounding
    denom = 16 * (abs(v.b.numerator) + v.b.denominator) * (2**bits)
    lo, hi = rho.bracket_for_width(Fraction(v.b.denominator, denom))
    v_lo = v.a + v.b * lo
    v_hi = v.a + v.b * hi
    if v_lo > v_hi:
        v_lo, v_hi = v_hi, v_lo
    f = float((v_lo + v_hi) / 2)
    bound = float(v_hi - v_lo) * 0.505 + 0.51 * math.ulp(f)
    if bound > 2.0**-bits:
        raise PreconditionError(
            f"a value near {f:.3g} cannot be rendered within 2^-{bits} in a double"
        )
    return f, bound


def substitute(form: LinearForm, u: RatLike, v: RatLike) -> LinearForm:
    """Rewrite ``a + b*rho'`` as a form over rho when ``rho' = u + v*rho``."""
    u, v = _as_fraction(u), _as_fraction(v)
    return LinearForm(form.a + form.b * u, form.b * v)


# ---------------------------------------------------------------------------
# Exact sorting and extrema with a certified float fast path
# ---------------------------------------------------------------------------


def exact_sorted(items: Iterable, rho: RotationNumber, key: Callable = None) -> list:
    """Sort items by the exact value of ``key(item)`` (a LinearForm).

    Floats order everything whose certified intervals are disjoint; runs of
    near-ties are re-sorted with exact comparisons only.
    """
    items = list(items)
    if key is None:
        key = lambda x: x
    decorated = []
    for it in items:
        f, e = lf_approx(key(it), rho)
        decorated.append((f, e, it))
    decorated.sort(key=lambda t: t[0])
    out = []
    run: list = []
    prev_f = prev_e = None
    for f, e, it in decorated:
        if run and f - prev_f > prev_e + e:
            out.extend(_exact_insertion(run, rho, key))
            run = []
        run.append(it)
        prev_f, prev_e = f, e
    out.extend(_exact_insertion(run, rho, key))
    return out


def _exact_insertion(run: list, rho: RotationNumber, key: Callable) -> list:
    if len(run) <= 1:
        return run
    out = []
    for it in run:
        lo, hi = 0, len(out)
        while lo < hi:
            mid = (lo + hi) // 2
            if lf_cmp(key(it), key(out[mid]), rho) < 0:
                hi = mid
            else:
                lo = mid + 1
        out.insert(lo, it)
    return out


def exact_extremum(
    forms: Sequence[LinearForm], rho: RotationNumber, largest: bool = True
) -> tuple[int, LinearForm]:
    """Index and value of the exact max (or min) of a nonempty list of forms."""
    if not forms:
        raise PreconditionError("extremum of an empty list")
    sign = 1.0 if largest else -1.0
    approx = [lf_approx(f, rho) for f in forms]
    best = max(sign * f - e for f, e in approx)
    idx_candidates = [
        i for i, (f, e) in enumerate(approx) if sign * f + e >= best
    ]
    winner = idx_candidates[0]
    for i in idx_candidates[1:]:
        c = lf_cmp(forms[i], forms[winner], rho)
        if (c > 0) if largest else (c < 0):
            winner = i
    return winner, forms[winner]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def lf_to_json(v: LinearForm, rho: RotationNumber, bits: int = 48) -> dict:
    """The wire form ``{"a": "p/q", "b": "p/q", "float": x}``."""
    f, _ = lf_to_float(v, rho, bits)
    return {"a": fraction_str(v.a), "b": fraction_str(v.b), "float": f}


def lf_from_json(obj: dict) -> LinearForm:
    return LinearForm(parse_fraction(obj["a"]), parse_fraction(obj["b"]))
