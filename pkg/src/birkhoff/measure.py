"""The Birkhoff density of S(rho, n, .) as an exact step function.

S has slope-n branches split by the discontinuities {-i*rho}; pushing
Lebesgue measure through the branch decomposition produces a right-continuous
step density with values in {1/n, ..., 1}.  The structural facts (tiling by
integer translates, symmetry, the reduced-residue equivalence, plateau width,
trapezoid shape at convergent denominators) are all verified here by exact
comparisons, never by floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    InternalInconsistencyError,
    PreconditionError,
    PrecisionInsufficientError,
)
from .exact import (
    AffineRotation,
    LinearForm,
    RotationNumber,
    ZERO,
    exact_sorted,
    lf_cmp,
    lf_floor,
    lf_frac,
    lf_to_float,
    lf_to_json,
    linear_form,
    rotation_affine,
)
from .sums import sum_direct, sum_prefix, _checked_d

# ---------------------------------------------------------------------------
# Branch decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Branch:
    """One linear piece of S: domain [left, left + length), slope n."""

    left: LinearForm
    length: LinearForm
    v_min: LinearForm
    v_sup: LinearForm
    source: int  # smallest i with left = {-i*rho}


@dataclass(frozen=True)
class BranchDecomposition:
    rho: RotationNumber
    n: int
    branches: tuple[Branch, ...]
    multiplicities: tuple[int, ...]  # size of the drop at each branch's left end


def _discontinuities(rho: RotationNumber, n: int) -> list[tuple[LinearForm, int]]:
    """({-i*rho}, i) for i = 1..n."""
    if rho.is_rational:
        return [(lf_frac(linear_form(0, -i), rho), i) for i in range(1, n + 1)]
    floors = rho.floor_multiples(n)
    # {i*rho} is never 0 for irrational rho, so {-i*rho} = 1 + floor(i*rho) - i*rho
    return [
        (LinearForm(Fraction(1 + int(floors[i])), Fraction(-i)), i)
        for i in range(1, n + 1)
    ]


def branch_decomposition(rho: RotationNumber, n: int) -> BranchDecomposition:
    """All branches of S(rho, n, .), with exact endpoints and ranges.

    Coinciding discontinuities (possible for rational rho) merge into one
    endpoint whose drop is the multiplicity.  The chain of branch values is
    re-derived from a single evaluation of S and checked for consistency all
    the way around the circle.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    pts = exact_sorted(_discontinuities(rho, n), rho, key=lambda t: t[0])
    groups: list[tuple[LinearForm, list[int]]] = []
    for y, i in pts:
        if groups and lf_cmp(groups[-1][0], y, rho) == 0:
            groups[-1][1].append(i)
        else:
            groups.append((y, [i]))

    if rho.is_rational:
        v_mins = [sum_direct(rho, n, y) for y, _ in groups]
    else:
        a_arr, b_arr = sum_prefix(rho, n)
        v_mins = []
        for _, idx in groups:
            i = idx[0]
            # S at {-i*rho} equals -S(i-1) + S(n-i) - 1/2
            a = a_arr[n - i] - a_arr[i - 1] - 1
            b = b_arr[n - i] - b_arr[i - 1]
            v_mins.append(LinearForm(Fraction(int(a), 2), Fraction(int(b), 2)))

    branches = []
    mults = []
    k = len(groups)
    for j, (y, idx) in enumerate(groups):
        y_next = groups[(j + 1) % k][0]
        length = (y_next - y) if j + 1 < k else (y_next + 1 - y)
        branches.append(
            Branch(y, length, v_mins[j], v_mins[j] + length * n, min(idx))
        )
        mults.append(len(idx))

    total_len = ZERO
    for br in branches:
        total_len = total_len + br.length
    if rho.sign_form(total_len - 1) != 0:
        raise InternalInconsistencyError("branch lengths do not tile the circle")
    for j, br in enumerate(branches):
        nxt = branches[(j + 1) % k]
        drop = mults[(j + 1) % k]
        if rho.sign_form(br.v_sup - drop - nxt.v_min) != 0:
            raise InternalInconsistencyError("branch value chain is inconsistent")
    return BranchDecomposition(rho, n, tuple(branches), tuple(mults))


# ---------------------------------------------------------------------------
# Step densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepDensity:
    """Right-continuous step function: value values[j] on [z_j, z_{j+1})."""

    rho: RotationNumber
    n: int
    breakpoints: tuple[LinearForm, ...]
    values: tuple[Fraction, ...]

    def intervals(self):
        for j, v in enumerate(self.values):
            yield self.breakpoints[j], self.breakpoints[j + 1], v

    def value_at(self, z: LinearForm) -> Fraction:
        """The density value at z (0 outside the support)."""
        bps = self.breakpoints
        if lf_cmp(z, bps[0], self.rho) < 0 or lf_cmp(z, bps[-1], self.rho) >= 0:
            return Fraction(0)
        lo, hi = 0, len(bps) - 1  # invariant: bps[lo] <= z < bps[hi]
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if lf_cmp(z, bps[mid], self.rho) >= 0:
                lo = mid
            else:
                hi = mid
        return self.values[lo]

    def support(self) -> tuple[LinearForm, LinearForm]:
        return self.breakpoints[0], self.breakpoints[-1]

    def support_length(self) -> LinearForm:
        return self.breakpoints[-1] - self.breakpoints[0]

    def integral(self) -> LinearForm:
        total = ZERO
        for left, right, v in self.intervals():
            total = total + (right - left) * v
        return total


def density(rho: RotationNumber, n: int) -> StepDensity:
    """The Birkhoff density: sweep the branch ranges, +1/n per covering branch."""
    dec = branch_decomposition(rho, n)
    events = []
    for br in dec.branches:
        events.append((br.v_min, 1))
        events.append((br.v_sup, -1))
    events = exact_sorted(events, rho, key=lambda e: e[0])

    breakpoints = []
    values = []
    count = 0
    j = 0
    while j < len(events):
        pos = events[j][0]
        delta = 0
        while j < len(events) and lf_cmp(events[j][0], pos, rho) == 0:
            delta += events[j][1]
            j += 1
        if delta == 0:
            continue
        if count > 0:
            values.append(Fraction(count, n))
        breakpoints.append(pos)
        count += delta
    if count != 0:
        raise InternalInconsistencyError("branch ranges do not close up")
    dens = StepDensity(rho, n, tuple(breakpoints), tuple(values))
    _check_density(dens)
    return dens


def _check_density(dens: StepDensity) -> None:
    n = dens.n
    for v in dens.values:
        if not 0 < v <= 1 or (v * n).denominator != 1:
            raise InternalInconsistencyError(f"density value {v} outside {{1/n..1}}")
    if dens.rho.sign_form(dens.integral() - 1) != 0:
        raise InternalInconsistencyError("density does not integrate to 1")


def support(dens: StepDensity) -> tuple[LinearForm, LinearForm]:
    """The closed support interval [lo, hi] (the density lives on [lo, hi))."""
    return dens.support()


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TilingResult:
    ok: bool
    witness_cell: Optional[tuple[LinearForm, LinearForm]]
    witness_total: Optional[Fraction]


def tiling_check(dens: StepDensity) -> TilingResult:
    """Verify sum over integers i of density(z + i) == 1 for every z.

    The translate sum is a step function whose breakpoints are the density
    breakpoints reduced mod 1, so it suffices to test one midpoint per
    elementary cell of that reduction, exactly.
    """
    rho = dens.rho
    reduced = exact_sorted((lf_frac(z, rho) for z in dens.breakpoints), rho)
    cells_pts = [reduced[0]]
    for z in reduced[1:]:
        if lf_cmp(z, cells_pts[-1], rho) != 0:
            cells_pts.append(z)
    lo, hi = dens.support()
    k = len(cells_pts)
    for j in range(k):
        left = cells_pts[j]
        right = cells_pts[j + 1] if j + 1 < k else cells_pts[0] + 1
        mid = (left + right) / 2
        total = Fraction(0)
        i_lo = lf_floor(lo - mid, rho)
        i_hi = lf_floor(hi - mid, rho) + 1
        for i in range(i_lo, i_hi + 1):
            total += dens.value_at(mid + i)
        if total != 1:
            return TilingResult(False, (left, right), total)
    return TilingResult(True, None, None)


def symmetry_check(dens: StepDensity) -> bool:
    """Exact check that the density is invariant under z -> -z."""
    bps, vals = dens.breakpoints, dens.values
    m = len(bps)
    for j in range(m):
        if dens.rho.sign_form(bps[j] + bps[m - 1 - j]) != 0:
            return False
    return all(vals[j] == vals[len(vals) - 1 - j] for j in range(len(vals)))


def _rooted(dens: StepDensity) -> tuple[RotationNumber, list[LinearForm]]:
    """Express the breakpoints over the base field of an affine rotation."""
    rho = dens.rho
    if isinstance(rho, AffineRotation):
        return rho.base, [rho.substituted(z) for z in dens.breakpoints]
    return rho, list(dens.breakpoints)


def densities_equal(d1: StepDensity, d2: StepDensity) -> bool:
    """Exact equality as step functions.

    Works whenever the two densities live over the same root field (same
    rotation number, affine images of one, or rational evaluations).
    """
    root1, bps1 = _rooted(d1)
    root2, bps2 = _rooted(d2)
    if root2.is_rational:
        r = root2.rational_value
        bps2 = [linear_form(z.a + z.b * r) for z in bps2]
        root2 = root1
    elif root1.is_rational:
        r = root1.rational_value
        bps1 = [linear_form(z.a + z.b * r) for z in bps1]
        root1 = root2
    if root1 is not root2:
        raise PreconditionError("densities live over unrelated rotation numbers")
    if len(bps1) != len(bps2) or d1.values != d2.values:
        return False
    return all(root1.sign_form(u - v) == 0 for u, v in zip(bps1, bps2))


@dataclass(frozen=True)
class PlateauResult:
    lo: LinearForm
    hi: LinearForm
    width: LinearForm
    verified: bool


def plateau(p: int, q: int, rho: RotationNumber) -> PlateauResult:
    """The maximal interval where the density of S(rho, q, .) equals 1.

    For d = q*rho - p with |d| < 1/(q-1) the interval is
    [-(1 - (q-1)|d|)/2, +(1 - (q-1)|d|)/2), verified against the density:
    value 1 exactly there, at most (q-1)/q elsewhere.
    """
    d = _checked_d(p, q, rho)
    abs_d = d if rho.sign_form(d) >= 0 else -d
    width = 1 - abs_d * (q - 1)
    hi = width / 2
    lo = -hi
    dens = density(rho, q)
    ones = [(l, r) for l, r, v in dens.intervals() if v == 1]
    verified = bool(ones)
    if verified:
        for (l1, r1), (l2, r2) in zip(ones, ones[1:]):
            if rho.sign_form(r1 - l2) != 0:  # the value-1 region must be contiguous
                verified = False
        if verified:
            verified = (
                rho.sign_form(ones[0][0] - lo) == 0
                and rho.sign_form(ones[-1][1] - hi) == 0
            )
    if verified:
        cap = Fraction(q - 1, q)
        verified = all(
            v <= cap for _, _, v in dens.intervals() if v != 1
        )
    return PlateauResult(lo, hi, width, verified)


def reduced_residue_check(
    rho: RotationNumber, q: int, p: int, p_prime: int
) -> bool:
    """Densities of (p+d)/q and (p'+d)/q coincide when gcd(p,q)=gcd(p',q)=1.

    rho must be (p+d)/q with |d| < 1/(q-1); the partner rotation number is
    rho - (p - p')/q.
    """
    import math as _math

    _checked_d(p, q, rho)
    if _math.gcd(p_prime, q) != 1:
        raise PreconditionError(f"p' = {p_prime} and q = {q} are not coprime")
    if p == p_prime:
        return True
    shift = Fraction(p - p_prime, q)
    rho2 = rotation_affine(rho, -shift, 1, spec=f"{rho.spec_string}-{shift}")
    return densities_equal(density(rho, q), density(rho2, q))


@dataclass(frozen=True)
class TrapezoidReport:
    is_step_trapezoid: bool
    step_count: int
    expected_steps: int
    top_interval: Optional[tuple[LinearForm, LinearForm]]
    side_length: Optional[LinearForm]
    isosceles: bool
    failures: tuple[str, ...]


def trapezoid_classify(dens: StepDensity, q: int) -> TrapezoidReport:
    """Check the step-trapezoid shape: one top interval, paired equal-length
    side intervals, and level infima increasing with the level."""
    rho = dens.rho
    levels: dict[Fraction, list[tuple[LinearForm, LinearForm]]] = {}
    for left, right, v in dens.intervals():
        levels.setdefault(v, []).append((left, right))
    ordered = sorted(levels)
    failures = []
    if len(ordered) != q:
        failures.append(f"{len(ordered)} distinct values, expected {q}")
    top = ordered[-1]
    top_iv = None
    if len(levels[top]) == 1:
        top_iv = levels[top][0]
    else:
        failures.append("top value taken on more than one interval")
    side_length = None
    for v in ordered[:-1]:
        ivs = levels[v]
        if len(ivs) != 2:
            failures.append(f"value {v} taken on {len(ivs)} intervals, expected 2")
            continue
        for left, right in ivs:
            if side_length is None:
                side_length = right - left
            elif rho.sign_form((right - left) - side_length) != 0:
                failures.append("side intervals have unequal lengths")
    infima = [levels[v][0][0] for v in ordered]  # intervals stored left-to-right
    for a, b in zip(infima, infima[1:]):
        if lf_cmp(a, b, rho) >= 0:
            failures.append("level infima are not increasing")
            break
    return TrapezoidReport(
        is_step_trapezoid=not failures,
        step_count=len(ordered),
        expected_steps=q,
        top_interval=top_iv,
        side_length=side_length,
        isosceles=symmetry_check(dens),
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# L1 distance between densities over possibly unrelated rotation numbers
# ---------------------------------------------------------------------------


def l1_distance(
    d1: StepDensity, d2: StepDensity, bits: int = 48
) -> tuple[float, float]:
    """integral |d1 - d2| as a float with a certified error bound.

    Densities over the same root field are integrated exactly (the bound is
    then a rounding ulp); unrelated fields go through certified interval
    endpoints and may raise PrecisionInsufficientError when breakpoints
    cannot be separated at the requested precision.
    """
    try:
        return _l1_exact(d1, d2, bits)
    except PreconditionError:
        return _l1_interval(d1, d2, bits)


def _l1_exact(d1: StepDensity, d2: StepDensity, bits: int) -> tuple[float, float]:
    root1, bps1 = _rooted(d1)
    root2, bps2 = _rooted(d2)
    if root2.is_rational and not root1.is_rational:
        r = root2.rational_value
        bps2 = [linear_form(z.a + z.b * r) for z in bps2]
        root = root1
    elif root1.is_rational and not root2.is_rational:
        r = root1.rational_value
        bps1 = [linear_form(z.a + z.b * r) for z in bps1]
        root = root2
    elif root1.is_rational and root2.is_rational:
        r1, r2 = root1.rational_value, root2.rational_value
        bps1 = [linear_form(z.a + z.b * r1) for z in bps1]
        bps2 = [linear_form(z.a + z.b * r2) for z in bps2]
        root = root1
    elif root1 is root2:
        root = root1
    else:
        raise PreconditionError("unrelated rotation numbers")

    grid = exact_sorted(bps1 + bps2, root)
    total = ZERO
    for left, right in zip(grid, grid[1:]):
        if root.sign_form(right - left) == 0:
            continue
        mid = (left + right) / 2
        v1 = _value_on(bps1, d1.values, mid, root)
        v2 = _value_on(bps2, d2.values, mid, root)
        diff = v1 - v2
        if diff:
            total = total + (right - left) * abs(diff)
    return lf_to_float(total, root, bits)


def _value_on(bps, values, z, root) -> Fraction:
    if lf_cmp(z, bps[0], root) < 0 or lf_cmp(z, bps[-1], root) >= 0:
        return Fraction(0)
    lo, hi = 0, len(bps) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if lf_cmp(z, bps[mid], root) >= 0:
            lo = mid
        else:
            hi = mid
    return values[lo]


def _l1_interval(d1: StepDensity, d2: StepDensity, bits: int) -> tuple[float, float]:
    pts = []
    for which, dens in ((0, d1), (1, d2)):
        for j, z in enumerate(dens.breakpoints):
            f, e = lf_to_float(z, dens.rho, min(bits + 2, 50))
            pts.append((f, e, which, j))
    pts.sort(key=lambda t: t[0])
    for (f1, e1, w1, _), (f2, e2, w2, _) in zip(pts, pts[1:]):
        if w1 != w2 and f2 - f1 <= e1 + e2:
            raise PrecisionInsufficientError(
                f"breakpoints {f1} and {f2} are indistinguishable at {bits} bits"
            )
    total = 0.0
    err = 0.0
    idx = [-1, -1]
    for (f1, e1, w1, j1), (f2, e2, _, _) in zip(pts, pts[1:]):
        idx[w1] = j1
        v1 = d1.values[idx[0]] if 0 <= idx[0] < len(d1.values) else Fraction(0)
        v2 = d2.values[idx[1]] if 0 <= idx[1] < len(d2.values) else Fraction(0)
        diff = abs(float(v1 - v2))
        length = max(f2 - f1, 0.0)
        total += diff * length
        err += diff * (e1 + e2) + length * 2.0**-50
    return total, err


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def density_json(dens: StepDensity, bits: int = 48) -> dict:
    """The density wire format with values rendered over the common denominator n."""
    from . import SCHEMA_VERSION

    return {
        "schema_version": SCHEMA_VERSION,
        "rho": dens.rho.spec_string,
        "n": dens.n,
        "breakpoints": [lf_to_json(z, dens.rho, bits) for z in dens.breakpoints],
        "values": [f"{int(v * dens.n)}/{dens.n}" for v in dens.values],
    }
