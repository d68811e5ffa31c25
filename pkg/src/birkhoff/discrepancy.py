"""Clumpiness n*D_n of rotation orbits, by four independent exact routes.

The four routes are: the O(n log n) sorted-points formula, a quadratic
oracle straight from the interval definition, the support length of the
Birkhoff density, and the route through maxima of Birkhoff sum differences.
They must agree as identical exact values; the package's acceptance suite
leans on that agreement as its main theorem check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np

from .errors import (
    DomainError,
    InternalInconsistencyError,
    PreconditionError,
    ResourceLimitError,
)
from .exact import (
    LinearForm,
    RotationNumber,
    exact_sorted,
    exact_extremum,
    lf_cmp,
    lf_frac,
    lf_to_float,
    linear_form,
    rotation_from_rational,
)
from .measure import density
from .sums import prefix_floats, prefix_form, running_extrema, sum_fast, sum_prefix

_ORACLE_CAP = 2000


# ---------------------------------------------------------------------------
# Point sets
# ---------------------------------------------------------------------------

_CONSTANT_AMBIENT = rotation_from_rational(0, spec="rat:0/1")


@dataclass(frozen=True)
class PointSet:
    """Finitely many exact points in [0, 1).

    rho is the ambient rotation number the coordinates refer to; it may be
    omitted when every coordinate is a plain rational.  presorted promises
    the values are already in ascending order.
    """

    values: tuple[LinearForm, ...]
    rho: RotationNumber = _CONSTANT_AMBIENT
    presorted: bool = False

    def __post_init__(self):
        for v in self.values:
            if self.rho is _CONSTANT_AMBIENT and not v.is_constant:
                raise PreconditionError("non-constant points need an ambient rho")
            if self.rho.sign_form(v) < 0 or self.rho.sign_form(v - 1) >= 0:
                raise PreconditionError(f"point {v} is outside [0, 1)")

    def __len__(self):
        return len(self.values)

    def sorted_values(self) -> list[LinearForm]:
        if self.presorted:
            return list(self.values)
        return exact_sorted(self.values, self.rho)


def point_set(values, rho: Optional[RotationNumber] = None) -> PointSet:
    """Build a PointSet, reducing the given exact values mod 1."""
    ambient = rho if rho is not None else _CONSTANT_AMBIENT
    forms = tuple(
        lf_frac(v if isinstance(v, LinearForm) else linear_form(v), ambient)
        for v in values
    )
    return PointSet(forms, ambient)


def orbit_points(rho: RotationNumber, n: int) -> PointSet:
    """The orbit {i*rho}, i = 1..n."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    floors = rho.floor_multiples(n)
    vals = tuple(
        LinearForm(Fraction(-int(floors[i])), Fraction(i)) for i in range(1, n + 1)
    )
    return PointSet(vals, rho)


# ---------------------------------------------------------------------------
# Route 1: sorted-points formula
# ---------------------------------------------------------------------------


def clumpiness_points(pts: PointSet) -> LinearForm:
    """n*D_n = 1 + max_j(n y_j - j) - min_i(n y_i - i) over the sorted points."""
    if not len(pts):
        raise PreconditionError("empty point set")
    n = len(pts)
    ys = pts.sorted_values()
    scored = [ys[j] * n - (j + 1) for j in range(n)]
    _, top = exact_extremum(scored, pts.rho, largest=True)
    _, bot = exact_extremum(scored, pts.rho, largest=False)
    return 1 + top - bot


# ---------------------------------------------------------------------------
# Route 2: the quadratic oracle from the interval definition
# ---------------------------------------------------------------------------


def discrepancy_oracle(pts: PointSet, cap: int = _ORACLE_CAP) -> LinearForm:
    """n*D_n straight from the definition: sup of (count - n*length) over all
    half-open intervals anchored at the points, and their complements.

    Quadratic in the number of points, deliberately independent of the other
    routes.  The maximum is located through certified floats but decided by
    exact comparisons.
    """
    n = len(pts)
    if n == 0:
        raise PreconditionError("empty point set")
    if n > cap:
        raise ResourceLimitError(f"oracle refuses {n} > {cap} points")
    rho = pts.rho
    ys = pts.sorted_values()

    denom = 1
    for y in ys:
        denom = math.lcm(denom, y.a.denominator, y.b.denominator)
    a_int = [int(y.a * denom) for y in ys]
    b_int = [int(y.b * denom) for y in ys]
    bound = max(
        (n + 2) * denom + 2 * n * max(map(abs, a_int)),
        2 * n * max(map(abs, b_int)),
    )
    if bound > 2**52:
        best = _oracle_exact_scan(rho, ys, n)
        return best
    pair = _oracle_vectorized(rho, a_int, b_int, denom, n)
    return LinearForm(Fraction(pair[0], denom), Fraction(pair[1], denom))


def _oracle_pair_blocks(av, bv, idx, denom, n, block=256):
    """Yield the (U, V, valid) integer matrices of all anchored candidates."""
    for start in range(0, n, block):
        rows = slice(start, min(start + block, n))
        da = av[None, :] - av[rows, None]  # A_j - A_i
        db = bv[None, :] - bv[rows, None]
        gap = idx[None, :] - idx[rows, None]  # j - i
        valid = gap >= 0
        # interval [y_i, y_j+): count j-i+1, length y_j-y_i
        yield (gap + 1) * denom - n * da, -n * db, valid
        # wrap-around complement [y_j, y_i+): count n-(j-i)+1, length 1-(y_j-y_i)
        yield (1 - gap) * denom + n * da, n * db, valid


def _oracle_vectorized(rho, a_int, b_int, denom, n) -> tuple[int, int]:
    av = np.array(a_int, dtype=np.int64)
    bv = np.array(b_int, dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    rf, re = rho.value_float()

    def approx(u, v):
        w = u.astype(np.float64) + v.astype(np.float64) * rf
        err = (
            np.abs(v) * (re + 2.0**-50)
            + (np.abs(u).astype(np.float64) + np.abs(w)) * 2.0**-50
            + 2.0**-40
        )
        return w, err

    lower = -np.inf  # certified lower bound for the global supremum
    for u, v, valid in _oracle_pair_blocks(av, bv, idx, denom, n):
        w, err = approx(u, v)
        masked = np.where(valid, w - err, -np.inf)
        lower = max(lower, float(masked.max()))

    best_pair = None
    for u, v, valid in _oracle_pair_blocks(av, bv, idx, denom, n):
        w, err = approx(u, v)
        hits = np.argwhere(valid & (w + err >= lower))
        for i, j in hits:
            pair = (int(u[i, j]), int(v[i, j]))
            if best_pair is None or rho.sign_affine(
                pair[0] - best_pair[0], pair[1] - best_pair[1]
            ) > 0:
                best_pair = pair
    return best_pair


def _oracle_exact_scan(rho, ys, n) -> LinearForm:
    # fallback for coefficient sizes the vectorized path cannot certify
    best = linear_form(1)
    for i in range(n):
        for j in range(i, n):
            v1 = (j - i + 1) - (ys[j] - ys[i]) * n
            v2 = (i - j + 1) + (ys[j] - ys[i]) * n
            for v in (v1, v2):
                if lf_cmp(v, best, rho) > 0:
                    best = v
    return best


# ---------------------------------------------------------------------------
# Route 3: support of the Birkhoff density
# ---------------------------------------------------------------------------


def clumpiness_range(rho: RotationNumber, n: int) -> LinearForm:
    """Support length of the Birkhoff density of S(rho, n, .)."""
    return density(rho, n).support_length()


# ---------------------------------------------------------------------------
# Route 4: maxima of Birkhoff sum differences
# ---------------------------------------------------------------------------


def clumpiness_ramshaw(rho: RotationNumber, n: int) -> LinearForm:
    """n*D_n = 1 + 2 max over m of (S(m) - S(n-1-m)), with S(0) = 0.

    The maximum runs over 0 <= m <= n-1: both boundary pairs participate
    (the pair (m, n-1-m) = (0, n-1) is the maximizer for some rho and n),
    and n = 1 degenerates to the single pair (0, 0), giving 1.
    """
    if rho.is_rational:
        raise DomainError("this route needs irrational rho")
    if n < 1:
        raise PreconditionError("n must be >= 1")
    a_m, b_m = _ramshaw_best_pair(rho, n)
    return LinearForm(1 + Fraction(a_m), Fraction(b_m))


def _ramshaw_best_pair(rho: RotationNumber, n: int) -> tuple[int, int]:
    """Integer (A, B) with max_m 2(S(m) - S(n-1-m)) = A + B*rho."""
    a_arr, b_arr = sum_prefix(rho, n - 1 if n > 1 else 1)
    da = a_arr[0:n] - a_arr[n - 1 :: -1] if n > 1 else np.zeros(1, dtype=np.int64)
    db = b_arr[0:n] - b_arr[n - 1 :: -1] if n > 1 else np.zeros(1, dtype=np.int64)
    w, err = prefix_floats(rho, da, db)
    lower = (w - err).max()
    hits = np.nonzero(w + err >= lower)[0]
    best = (int(da[hits[0]]), int(db[hits[0]]))
    for m in map(int, hits[1:]):
        cand = (int(da[m]), int(db[m]))
        if rho.sign_affine(cand[0] - best[0], cand[1] - best[1]) > 0:
            best = cand
    return best


def clumpiness_qn(rho: RotationNumber, k: int) -> LinearForm:
    """At a convergent denominator: q_k D_{q_k} = 1 + (q_k - 1)|d_k|."""
    if rho.is_rational:
        raise DomainError("this closed form needs irrational rho")
    c = rho.convergent(k)
    abs_d = c.d if rho.sign_form(c.d) >= 0 else -c.d
    return 1 + abs_d * (c.q - 1)


# ---------------------------------------------------------------------------
# Running maxima of i*D_i and the predicted indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ClumpinessRecord:
    index: int
    value: LinearForm


@dataclass(frozen=True, slots=True)
class PredictionRecord:
    level: int  # the n in M_{2n+1}, m_{2n}
    max_index: int
    min_index: int
    predicted_index: int
    predicted_value: LinearForm  # 1 + 2(S(M) - S(m)), the conditional formula
    is_running_max: Optional[bool]  # None when the index exceeds the scan range
    hypothesis_ok: Optional[bool]  # M_{2n+1}-M_{2n-1} < m_{2n+2}-m_{2n}
    value_matches_scan: Optional[bool]  # formula vs the direct maximum at the index


@dataclass(frozen=True)
class ClumpinessReport:
    maxima: tuple[ClumpinessRecord, ...]
    predictions: tuple[PredictionRecord, ...]


def _predictions(rho: RotationNumber, n_steps: int) -> list[PredictionRecord]:
    """Predicted running-maximum indices 1 + M_{2n+1} + m_{2n} of i*D_i.

    M and m are the last running maximum (minimum) of S inside the odd
    (even) convergent bracket.  When q_0 = q_1 the even bracket [q_0, q_1)
    is empty and S(0) = 0 takes the role of m_0.  The prediction is
    conditional on a spacing hypothesis that holds for metallic means but
    not for every rotation number, so the formula value is compared against
    the direct maximum scan (whenever the index is in reach) and the
    outcome is recorded rather than enforced.
    """
    extrema = running_extrema(rho, n_steps)
    max_by_bracket: dict[int, int] = {}
    for rec in extrema.maxima:
        if rec.bracket_index % 2 == 1:
            max_by_bracket[rec.bracket_index] = rec.index
    min_by_bracket: dict[int, int] = {}
    for rec in extrema.minima:
        if rec.bracket_index % 2 == 0:
            min_by_bracket[rec.bracket_index] = rec.index
    min_by_bracket.setdefault(0, 0)

    a_arr, b_arr = sum_prefix(rho, n_steps)
    predictions = []
    level = 0
    while True:
        mk, mn = 2 * level + 1, 2 * level
        if mk not in max_by_bracket or mn not in min_by_bracket:
            break
        idx_max = max_by_bracket[mk]
        idx_min = min_by_bracket[mn]
        predicted = 1 + idx_max + idx_min
        value = 1 + (
            prefix_form(a_arr, b_arr, idx_max) - prefix_form(a_arr, b_arr, idx_min)
        ) * 2
        hypothesis = None
        prev_mk, next_mn = 2 * level - 1, 2 * level + 2
        if prev_mk in max_by_bracket and next_mn in min_by_bracket:
            hypothesis = (idx_max - max_by_bracket[prev_mk]) < (
                min_by_bracket[next_mn] - idx_min
            )
        matches = None
        if predicted <= n_steps:
            a_m, b_m = _ramshaw_best_pair(rho, predicted)
            direct = LinearForm(1 + Fraction(a_m), Fraction(b_m))
            matches = rho.sign_form(direct - value) == 0
        predictions.append(
            PredictionRecord(
                level, idx_max, idx_min, predicted, value, None, hypothesis, matches
            )
        )
        level += 1
    return predictions


def running_clumpiness_maxima(
    rho: RotationNumber, n_steps: int, cap: int = 20_000
) -> ClumpinessReport:
    """Running maxima of i*D_i for i <= n_steps, plus the indices
    1 + M_{2n+1} + m_{2n} predicted from the running extrema of S.

    Quadratic in n_steps (one maximum scan per index), hence the cap.
    """
    if rho.is_rational:
        raise DomainError("needs irrational rho")
    if n_steps < 1:
        raise PreconditionError("n_steps must be >= 1")
    if n_steps > cap:
        raise ResourceLimitError(f"running clumpiness scan of {n_steps} > {cap}")
    maxima = [ClumpinessRecord(1, linear_form(1))]
    best = (1, 0)  # value as integer pair A + B*rho
    for i in range(2, n_steps + 1):
        a_m, b_m = _ramshaw_best_pair(rho, i)
        cand = (1 + a_m, b_m)
        if rho.sign_affine(cand[0] - best[0], cand[1] - best[1]) > 0:
            best = cand
            maxima.append(
                ClumpinessRecord(i, LinearForm(Fraction(cand[0]), Fraction(cand[1])))
            )
    runmax_indices = {r.index for r in maxima}

    predictions = [
        PredictionRecord(
            p.level,
            p.max_index,
            p.min_index,
            p.predicted_index,
            p.predicted_value,
            (p.predicted_index in runmax_indices)
            if p.predicted_index <= n_steps
            else None,
            p.hypothesis_ok,
            p.value_matches_scan,
        )
        for p in _predictions(rho, n_steps)
    ]
    return ClumpinessReport(tuple(maxima), tuple(predictions))


# ---------------------------------------------------------------------------
# Metallic means
# ---------------------------------------------------------------------------


def metallic_c(a: int, bits: int = 48) -> tuple[float, float]:
    """Ramshaw's constant c(a) for the metallic mean [a, a, ...].

    c(a) = a / (16 ln(1/rho_a)) for even a and
    c(a) = a(a^2+3) / (16(a^2+4) ln(1/rho_a)) for odd a,
    with rho_a = (sqrt(a^2+4) - a)/2.  Certified by interval arithmetic.
    """
    if a < 1:
        raise PreconditionError("a must be >= 1")
    prec = bits + 24
    while True:
        with mpmath.workprec(prec):
            iv = mpmath.iv
            iv.prec = prec
            root = iv.sqrt(iv.mpf(a * a + 4))
            rho_iv = (root - a) / 2
            log_inv = -iv.log(rho_iv)
            if a % 2 == 0:
                c_iv = iv.mpf(a) / 16 / log_inv
            else:
                c_iv = iv.mpf(a * (a * a + 3)) / (16 * (a * a + 4)) / log_inv
            lo, hi = float(c_iv.a), float(c_iv.b)
        mid = (lo + hi) / 2
        err = (hi - lo) / 2 + math.ulp(mid)
        if err <= 2.0**-bits or prec > bits + 200:
            return mid, err
        prec += 32


# ---------------------------------------------------------------------------
# Asymptotic report: S / ln n along structured maxima
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class AsymptoticRow:
    index: int
    value: float
    ratio: float


@dataclass(frozen=True)
class AsymptoticReport:
    a: int
    c_value: float
    s_rows: tuple[AsymptoticRow, ...]  # best structured S(m)/ln m per decade
    d_rows: tuple[AsymptoticRow, ...]  # i*D_i / ln i at predicted maxima


def _structured_candidates(
    rho: RotationNumber, a: int, limit: int, beam_width: int = 512
) -> dict[int, tuple[float, int]]:
    """Beam search over odd-position Ostrowski digit vectors (even digits 0).

    Returns, per decade of the index, the best (float score, index) found.
    The scores are the exact summation formula evaluated in floats; callers
    re-evaluate winners exactly through sum_fast.
    """
    states = [(0.0, 0)]  # (score, L)
    best_per_decade: dict[int, tuple[float, int]] = {}
    k = 1
    while True:
        c = rho.convergent(k)
        if c.q > limit:
            break
        qk = c.q
        # d_k rendered through the certified path: the naive float of
        # q_k*rho - p_k cancels catastrophically for large q_k
        dk, _ = lf_to_float(c.d, rho, 48)
        nxt = {}
        for score, partial in states:
            for b in range(0, a + 1):
                new_l = partial + b * qk
                if new_l > limit:
                    break
                term = 0.5 * b * ((b * qk + 2 * partial + 1) * dk + 1.0) if b else 0.0
                cand = (score + term, new_l)
                cur = nxt.get(new_l)
                if cur is None or cand[0] > cur[0]:
                    nxt[new_l] = cand
                if new_l:
                    decade = len(str(new_l))
                    prev = best_per_decade.get(decade)
                    if prev is None or cand[0] > prev[0]:
                        best_per_decade[decade] = (cand[0], new_l)
        states = sorted(nxt.values(), reverse=True)[:beam_width]
        k += 2
    return best_per_decade


def asymptotic_report(
    a: int, max_index_exponent: int, d_index_cap: int = 100_000
) -> AsymptoticReport:
    """Ratios S(rho_a, m, 0)/ln m along structured running-maximum candidates
    up to 10^max_index_exponent, and i*D_i/ln i at the predicted clumpiness
    maxima up to d_index_cap, both against Ramshaw's constant c(a)."""
    if a < 1:
        raise PreconditionError("a must be >= 1")
    from .exact import rotation_metallic

    rho = rotation_metallic(a)
    limit = 10**max_index_exponent
    c_val, _ = metallic_c(a)

    decades = _structured_candidates(rho, a, limit)
    s_rows = []
    for decade in sorted(decades):
        _, m = decades[decade]
        if m < 2:
            continue
        exact = sum_fast(rho, m)
        val, _ = lf_to_float(exact, rho, 48)
        s_rows.append(AsymptoticRow(m, val, val / math.log(m)))

    d_rows = []
    for pred in _predictions(rho, d_index_cap):
        i = pred.predicted_index
        if i < 2 or i > d_index_cap or pred.value_matches_scan is False:
            continue
        val, _ = lf_to_float(pred.predicted_value, rho, 48)
        d_rows.append(AsymptoticRow(i, val, val / math.log(i)))
    return AsymptoticReport(a, c_val, tuple(s_rows), tuple(d_rows))
