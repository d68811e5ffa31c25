"""Birkhoff sums S(rho, n, x) = sum_{i=1..n} ({x + i*rho} - 1/2).

Four evaluation routes live here: direct summation, incremental orbits,
shifted sums anchored at the discontinuities, and the O(log m) fast path
through the Ostrowski expansion of m.  They are deliberately independent so
they can cross-check each other exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    InternalInconsistencyError,
    InvalidDigitError,
    InvalidExpansionError,
    OutOfRangeError,
    PreconditionError,
)
from .exact import (
    ONE,
    RHO,
    ZERO,
    LinearForm,
    RotationNumber,
    as_linear_form,
    lf_approx,
    lf_cmp,
    lf_floor,
    lf_frac,
    linear_form,
)

_PREFIX_KEY = "sum_prefix"


# ---------------------------------------------------------------------------
# Prefix tables: S(m) for all m <= n at once
# ---------------------------------------------------------------------------


def sum_prefix(rho: RotationNumber, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer arrays (A, B) with ``S(rho, m, 0) = (A[m] + B[m]*rho)/2``.

    Derived from ``S(m) = m(m+1)/2 * rho - sum floor(i*rho) - m/2``; the
    floor table is certified, so the arrays are exact.  Cached per rho.
    """
    with rho._lock:
        cached = rho._aux.get(_PREFIX_KEY)
        if cached is not None and len(cached[0]) > n:
            return cached
        floors = rho.floor_multiples(max(n, 64))
        csum = np.cumsum(floors)
        m = np.arange(len(floors), dtype=np.int64)
        a_arr = -2 * csum - m
        b_arr = m * (m + 1)
        rho._aux[_PREFIX_KEY] = (a_arr, b_arr)
        return a_arr, b_arr


def prefix_form(a_arr: np.ndarray, b_arr: np.ndarray, m: int) -> LinearForm:
    return LinearForm(Fraction(int(a_arr[m]), 2), Fraction(int(b_arr[m]), 2))


def prefix_floats(
    rho: RotationNumber, a_arr: np.ndarray, b_arr: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Extended-precision values of (a + b*rho)/2 with certified error bounds.

    int64 coefficients convert to long double exactly, so the bound is just
    the rho uncertainty plus a few arithmetic roundings of the magnitudes.
    """
    rho_ld, rho_err = rho.value_longdouble()
    eps = np.longdouble(float(np.finfo(np.longdouble).eps))
    a_ld = a_arr.astype(np.longdouble)
    b_ld = b_arr.astype(np.longdouble)
    vals = (a_ld + b_ld * rho_ld) / 2
    errs = (np.abs(b_ld) * rho_err + (np.abs(a_ld) + np.abs(b_ld)) * (4 * eps)) / 2
    return vals, errs


def sum_value(rho: RotationNumber, m: int) -> LinearForm:
    """S(rho, m, 0) through the prefix table."""
    a_arr, b_arr = sum_prefix(rho, m)
    return prefix_form(a_arr, b_arr, m)


# ---------------------------------------------------------------------------
# Direct and hat sums
# ---------------------------------------------------------------------------


def sum_direct(rho: RotationNumber, n: int, x=ZERO) -> LinearForm:
    """S(rho, n, x), exactly.  S(rho, 0, x) is the empty sum 0."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    if n == 0:
        return ZERO
    x = as_linear_form(x)
    if x == ZERO:
        return sum_value(rho, n)
    pos = lf_frac(x + RHO, rho)
    total = pos
    for _ in range(n - 1):
        pos = pos + RHO
        if lf_cmp(pos, ONE, rho) >= 0:
            pos = pos - 1
        total = total + pos
    return total - Fraction(n, 2)


def sum_hat(rho: RotationNumber, n: int, x=ZERO) -> LinearForm:
    """The variant summed over i = 0..n-1; equals S(rho, n, {x - rho})."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    if n == 0:
        return ZERO
    x = as_linear_form(x)
    return sum_direct(rho, n, lf_frac(x - RHO, rho))


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class OrbitRecord:
    i: int
    value: LinearForm
    is_running_max: bool
    is_running_min: bool


def orbit(rho: RotationNumber, n_steps: int, x0=ZERO) -> Iterator[OrbitRecord]:
    """Lazily yield S(rho, i, x0) for i = 1..n_steps with running extremum flags.

    x0 must live in Q + Q*rho; the first record counts as both running
    maximum and minimum.
    """
    if n_steps < 1:
        raise PreconditionError("n_steps must be >= 1")
    x0 = as_linear_form(x0)
    pos = lf_frac(x0 + RHO, rho)
    total = pos - Fraction(1, 2)
    best_max = best_min = total
    yield OrbitRecord(1, total, True, True)
    for i in range(2, n_steps + 1):
        pos = pos + RHO
        if lf_cmp(pos, ONE, rho) >= 0:
            pos = pos - 1
        total = total + pos - Fraction(1, 2)
        hi = lf_cmp(total, best_max, rho) > 0
        lo = lf_cmp(total, best_min, rho) < 0
        if hi:
            best_max = total
        if lo:
            best_min = total
        yield OrbitRecord(i, total, hi, lo)


# ---------------------------------------------------------------------------
# Shifted sums and closed forms
# ---------------------------------------------------------------------------


def shifted_sum(rho: RotationNumber, n: int, k: int) -> LinearForm:
    """sum_{i=1..n} ({(i-k)*rho} - 1/2), the value of S at the discontinuity
    {-k*rho}.  Needs irrational rho (it uses {-j*rho} = 1 - {j*rho})."""
    if rho.is_rational:
        raise DomainError("shifted sums are defined for irrational rho only")
    if not 1 <= k <= n:
        raise PreconditionError("need 1 <= k <= n")
    return -sum_value(rho, k - 1) + sum_value(rho, n - k) - Fraction(1, 2)


def s_qn(rho: RotationNumber, n: int) -> LinearForm:
    """Closed form ((q_n + 1) d_n + (-1)^(n+1)) / 2 for S(rho, q_n, 0)."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    c = rho.convergent(n)
    sign = 1 if n % 2 == 0 else -1  # (-1)^(n+1)
    return (c.d * (c.q + 1) + (-sign)) * Fraction(1, 2)


def floor_sum(p: int, q: int, rho: RotationNumber, verify: bool = True) -> int:
    """sum_{i=1..q} floor(i*rho) = ((q+1)p - q + 1)/2 + floor(d), d = q*rho - p."""
    d = _checked_d(p, q, rho)
    result = ((q + 1) * p - q + 1) // 2 + lf_floor(d, rho)
    if verify:
        direct = int(rho.floor_multiples(q).sum())
        if direct != result:
            raise InternalInconsistencyError(
                f"floor_sum closed form {result} != direct {direct}"
            )
    return result


def frac_sum(p: int, q: int, rho: RotationNumber, verify: bool = True) -> LinearForm:
    """sum_{i=1..q} {i*rho} = ((q+1)d + q - 1)/2 - floor(d)."""
    d = _checked_d(p, q, rho)
    result = (d * (q + 1) + (q - 1)) * Fraction(1, 2) - lf_floor(d, rho)
    if verify:
        csum = int(rho.floor_multiples(q).sum())
        direct = LinearForm(Fraction(-csum), Fraction(q * (q + 1), 2))
        if direct != result and rho.sign_form(direct - result) != 0:
            raise InternalInconsistencyError("frac_sum closed form mismatch")
    return result


def _checked_d(p: int, q: int, rho: RotationNumber) -> LinearForm:
    if q < 2:
        raise PreconditionError("q must be >= 2")
    if math.gcd(p, q) != 1:
        raise PreconditionError(f"p = {p} and q = {q} are not coprime")
    d = linear_form(-p, q)
    abs_d = d if rho.sign_form(d) >= 0 else -d
    if rho.sign_form(abs_d - Fraction(1, q - 1)) >= 0:
        raise PreconditionError(f"|d| >= 1/(q-1) for p/q = {p}/{q}")
    return d


# ---------------------------------------------------------------------------
# Ostrowski numeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OstrowskiExpansion:
    """Digits (b_0, ..., b_N) representing m = sum b_i q_i in the q-basis of rho.

    Admissibility: 0 <= b_0 <= a_1 - 1; 0 <= b_i <= a_{i+1} for i >= 1; and
    b_i = a_{i+1} forces b_{i-1} = 0.  The partial values L_k = sum_{i<=k}
    b_i q_i then satisfy L_k < q_{k+1}.
    """

    rho: RotationNumber
    digits: tuple[int, ...]

    def __post_init__(self):
        _validate_ostrowski(self.rho, self.digits)

    @property
    def leading_index(self) -> int:
        return len(self.digits) - 1

    def partial_value(self, k: int) -> int:
        """L_k = sum_{i <= k} b_i q_i (L_{-1} = 0)."""
        if k < 0:
            return 0
        return sum(
            b * self.rho.convergent(i).q for i, b in enumerate(self.digits[: k + 1])
        )

    def value(self) -> int:
        return self.partial_value(self.leading_index)

    def with_digit(self, index: int, b: int) -> "OstrowskiExpansion":
        digits = list(self.digits)
        digits[index] = b
        while digits and digits[-1] == 0:
            digits.pop()
        return OstrowskiExpansion(self.rho, tuple(digits))


def _next_digit_bound(rho: RotationNumber, i: int) -> Optional[int]:
    """a_{i+1} if available (None for a rational basis that ends at i)."""
    try:
        return rho.digit(i + 1)
    except OutOfRangeError:
        return None


def _validate_ostrowski(rho: RotationNumber, digits: Sequence[int]) -> None:
    if not digits:
        return
    if digits[-1] <= 0:
        raise InvalidExpansionError("leading digit must be positive")
    for i, b in enumerate(digits):
        if b < 0:
            raise InvalidExpansionError(f"digit b_{i} = {b} < 0")
        bound = _next_digit_bound(rho, i)
        if i == 0:
            cap = (rho.digit(1) - 1) if bound is not None else None
            if cap is not None and b > cap:
                raise InvalidExpansionError(f"b_0 = {b} > a_1 - 1 = {cap}")
        elif bound is not None:
            if b > bound:
                raise InvalidExpansionError(f"b_{i} = {b} > a_{i+1} = {bound}")
            if b == bound and digits[i - 1] != 0:
                raise InvalidExpansionError(
                    f"b_{i} = a_{i+1} requires b_{i-1} = 0 (got {digits[i-1]})"
                )


def ostrowski_expand(rho: RotationNumber, m: int) -> OstrowskiExpansion:
    """The unique admissible expansion of m, by greedy descent on the q basis."""
    if m < 0:
        raise PreconditionError("m must be >= 0")
    if m == 0:
        return OstrowskiExpansion(rho, ())
    lead = 0
    while True:
        try:
            nxt = rho.convergent(lead + 1)
        except OutOfRangeError:
            break
        if nxt.q > m:
            break
        lead += 1
    digits = [0] * (lead + 1)
    rem = m
    for k in range(lead, -1, -1):
        qk = rho.convergent(k).q
        digits[k], rem = divmod(rem, qk)
    if rem != 0:
        raise InternalInconsistencyError("greedy expansion left a remainder")
    exp = OstrowskiExpansion(rho, tuple(digits))  # validates admissibility
    if exp.value() != m:
        raise InternalInconsistencyError("expansion does not reproduce m")
    return exp


def ostrowski_value(exp: OstrowskiExpansion) -> int:
    """sum b_i q_i; the exact inverse of ostrowski_expand."""
    return exp.value()


# ---------------------------------------------------------------------------
# Fast summation and the digit-influence quadratic
# ---------------------------------------------------------------------------


def sum_fast(rho: RotationNumber, m: int) -> LinearForm:
    """S(rho, m, 0) in O(number of Ostrowski digits) exact operations.

    Uses S(L_n) = sum_k b_k/2 * [(b_k q_k + 2 L_{k-1} + 1) d_k + (-1)^{k+1}].
    """
    if rho.is_rational:
        raise DomainError("the fast summation path needs irrational rho")
    if m < 0:
        raise PreconditionError("m must be >= 0")
    if m == 0:
        return ZERO
    exp = ostrowski_expand(rho, m)
    total = ZERO
    partial = 0  # L_{k-1}
    for k, b in enumerate(exp.digits):
        c = rho.convergent(k)
        if b:
            sign = -1 if k % 2 == 0 else 1  # (-1)^{k+1}
            term = (c.d * (b * c.q + 2 * partial + 1) + sign) * Fraction(b, 2)
            total = total + term
        partial += b * c.q
    return total


def recursion_step(
    rho: RotationNumber, n: int, k: int, verify: bool = True
) -> LinearForm:
    """S(q_n) + S(k) + k*d_n, which equals S(rho, q_n + k, 0) for 0 <= k < q_{n+1}."""
    if rho.is_rational:
        raise DomainError("the recursion step needs irrational rho")
    c = rho.convergent(n)
    if not 0 <= k < rho.convergent(n + 1).q:
        raise PreconditionError(f"need 0 <= k < q_{n+1}")
    result = sum_value(rho, c.q) + sum_value(rho, k) + c.d * k
    if verify:
        direct = sum_value(rho, c.q + k)
        if direct != result:
            raise InternalInconsistencyError("recursion step disagrees with direct sum")
    return result


def admissible_digit_values(exp: OstrowskiExpansion, m_index: int) -> list[int]:
    """All values the digit at m_index may take with the other digits fixed."""
    if m_index < 0 or m_index > exp.leading_index:
        raise PreconditionError("m_index outside the expansion")
    rho = exp.rho
    if m_index == 0:
        bound = _next_digit_bound(rho, 0)
        hi = (bound - 1) if bound is not None else max(exp.digits[0], 0)
    else:
        bound = _next_digit_bound(rho, m_index)
        hi = bound if bound is not None else exp.digits[m_index]
        if bound is not None and b_nonzero(exp, m_index - 1) and hi == bound:
            hi = bound - 1
    above = m_index + 1
    if above <= exp.leading_index:
        cap_above = _next_digit_bound(rho, above)
        if cap_above is not None and exp.digits[above] == cap_above:
            return [0]
    return list(range(0, hi + 1))


def b_nonzero(exp: OstrowskiExpansion, index: int) -> bool:
    return 0 <= index <= exp.leading_index and exp.digits[index] != 0


def digit_influence(
    rho: RotationNumber, exp: OstrowskiExpansion, m_index: int, b: int
) -> LinearForm:
    """The quadratic share of S(L_n) carried by digit b at position m_index.

    B(m, n, b) = b^2/2 q_m d_m
               + b [ (-1)^{m+1}/2 + L_{m-1} d_m + d_m/2 + q_m sum_{j>m} b_j d_j ].
    S(L_n) - B(m, n, b_m) does not depend on b_m.
    """
    if b not in admissible_digit_values(exp, m_index):
        raise InvalidDigitError(f"digit {b} is not admissible at index {m_index}")
    if b == 0:
        return ZERO
    quad, lin = _influence_coeffs(rho, exp, m_index)
    return quad * (b * b) + lin * b


def _influence_coeffs(
    rho: RotationNumber, exp: OstrowskiExpansion, m_index: int
) -> tuple[LinearForm, LinearForm]:
    c = rho.convergent(m_index)
    sign = Fraction(-1 if m_index % 2 == 0 else 1, 2)  # (-1)^{m+1}/2
    tail = ZERO
    for j in range(m_index + 1, exp.leading_index + 1):
        bj = exp.digits[j]
        if bj:
            tail = tail + rho.convergent(j).d * bj
    lin = (
        linear_form(sign)
        + c.d * exp.partial_value(m_index - 1)
        + c.d * Fraction(1, 2)
        + tail * c.q
    )
    quad = c.d * Fraction(c.q, 2)
    return quad, lin


def maximize_digit(rho: RotationNumber, exp: OstrowskiExpansion, m_index: int) -> int:
    """The admissible digit maximizing the influence quadratic at an odd index.

    The quadratic is concave there, so it is enough to evaluate the two
    integers bracketing the real vertex, clamped to the admissible range.
    Ties break toward the smaller digit.
    """
    if m_index % 2 == 0:
        raise PreconditionError("maximization applies to odd indices only")
    allowed = admissible_digit_values(exp, m_index)
    hi = allowed[-1]
    if hi == 0:
        return 0
    quad, lin = _influence_coeffs(rho, exp, m_index)
    if rho.sign_form(quad) >= 0:
        raise InternalInconsistencyError("odd-index influence quadratic not concave")
    # vertex at b* = -lin / (2 quad); find t with t <= b* < t+1
    qf, _ = lf_approx(quad, rho)
    lf, _ = lf_approx(lin, rho)
    t = math.floor(-lf / (2 * qf))

    def below_vertex(t_val: int) -> bool:
        # t <= b*  <=>  -lin - 2*quad*t >= 0 flipped by sign(2*quad) < 0
        num = -lin - quad * (2 * t_val)
        return rho.sign_form(num) <= 0

    while not below_vertex(t):
        t -= 1
    while below_vertex(t + 1):
        t += 1
    candidates = sorted({min(max(t, 0), hi), min(max(t + 1, 0), hi)})
    best = candidates[0]
    best_val = digit_influence(rho, exp, m_index, best) if best else ZERO
    for b in candidates[1:]:
        val = digit_influence(rho, exp, m_index, b) if b else ZERO
        if lf_cmp(val, best_val, rho) > 0:
            best, best_val = b, val
    return best


# ---------------------------------------------------------------------------
# Running extrema of S(rho, i, 0)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ExtremumRecord:
    index: int
    value: LinearForm
    bracket_index: int  # the k with q_k <= index < q_{k+1}
    bracket_ok: bool  # odd k for maxima, even k for minima


@dataclass(frozen=True)
class RunningExtrema:
    maxima: tuple[ExtremumRecord, ...]
    minima: tuple[ExtremumRecord, ...]


def running_extrema(rho: RotationNumber, n_steps: int) -> RunningExtrema:
    """Indices where S(rho, i, 0) strictly exceeds (falls below) all earlier
    values, with exact values and the convergent bracket each index falls in.

    Index 1 opens both lists.
    """
    if n_steps < 1:
        raise PreconditionError("n_steps must be >= 1")
    if rho.is_rational:
        raise DomainError("running extrema are studied for irrational rho")
    a_arr, b_arr = sum_prefix(rho, n_steps)
    vals, errs = prefix_floats(rho, a_arr[: n_steps + 1], b_arr[: n_steps + 1])

    q_list = [rho.convergent(0).q]
    while q_list[-1] <= n_steps:
        q_list.append(rho.convergent(len(q_list)).q)

    def bracket_of(i: int) -> int:
        k = 0
        for idx in range(len(q_list) - 1):
            if q_list[idx] <= i:
                k = idx
        return k

    def record(i: int, want_odd: bool) -> ExtremumRecord:
        k = bracket_of(i)
        return ExtremumRecord(
            i, prefix_form(a_arr, b_arr, i), k, (k % 2 == 1) == want_odd
        )

    def scan(sign: int, want_odd: bool) -> list[ExtremumRecord]:
        # indices that could strictly exceed everything earlier: everything
        # else is ruled out by the certified running bound, vectorized.
        # index 0 (the empty sum) is not part of the scanned sequence.
        v = sign * vals
        prev_best = np.maximum.accumulate((v - errs)[1:-1])
        candidates = np.nonzero(v[2:] + errs[2:] >= prev_best)[0] + 2
        out = [record(1, want_odd)]
        best = 1
        for i in map(int, candidates):
            if v[i] - errs[i] > v[best] + errs[best]:
                above = True
            elif v[i] + errs[i] < v[best] - errs[best]:
                above = False
            else:
                above = (
                    sign
                    * rho.sign_affine(
                        int(a_arr[i] - a_arr[best]), int(b_arr[i] - b_arr[best])
                    )
                    > 0
                )
            if above:
                out.append(record(i, want_odd))
                best = i
        return out

    return RunningExtrema(tuple(scan(1, True)), tuple(scan(-1, False)))
