"""Deterministic SVG reproductions of the package's reference figures.

Every emitter re-verifies the exact identity its picture illustrates and
refuses to draw when the identity fails, so the figures double as
self-tests.  Emitters return {filename: svg_text} plus a metadata dict that
is also embedded in each file's <desc>.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import SCHEMA_VERSION
from .errors import InternalInconsistencyError
from .exact import (
    RotationNumber,
    lf_to_float,
    parse_rho_spec,
    rotation_affine,
)
from .discrepancy import clumpiness_points, orbit_points
from .measure import StepDensity, densities_equal, density, tiling_check
from .sums import running_extrema, sum_prefix
from .svg import Canvas, Frame

FIGURE_IDS = ("1.1", "1.2", "2.1", "4.2", "B.1", "C.1")

BESTIARY_DEFAULT = (1, 3, 4, 7, 32, 39, 71, 465, 536, 999, 1000, 1001, 1002, 1003, 8544)


def _density_floats(dens: StepDensity, bits: int = 48):
    bps = [lf_to_float(z, dens.rho, bits)[0] for z in dens.breakpoints]
    vals = [float(v) for v in dens.values]
    return bps, vals


def _clip_steps(bps, vals, lo, hi):
    """Restrict a step function to the window [lo, hi]."""
    out_b, out_v = [], []
    for j, v in enumerate(vals):
        left, right = max(bps[j], lo), min(bps[j + 1], hi)
        if left < right:
            if not out_v:
                out_b.append(left)
            out_b.append(right)
            out_v.append(v)
    return out_b, out_v


def _density_frame(canvas, region, dens, title, bits=48):
    bps, vals = _density_floats(dens, bits)
    pad = 0.05 * (bps[-1] - bps[0]) or 0.05
    frame = Frame(canvas, region, (bps[0] - pad, bps[-1] + pad), (0.0, 1.1))
    frame.frame_box()
    frame.hline(1.0)
    frame.steps(bps, vals)
    frame.x_ticks([(bps[0], f"{bps[0]:.3f}"), (0.0, "0"), (bps[-1], f"{bps[-1]:.3f}")])
    frame.y_ticks([(0.0, "0"), (1.0, "1")])
    frame.title(title)
    return frame


def density_svg(rho: RotationNumber, n: int, bits: int = 48) -> str:
    """A standalone step plot of one density."""
    dens = density(rho, n)
    canvas = Canvas(720, 420)
    _density_frame(canvas, (60, 40, 620, 330), dens, f"rho={rho.spec_string}, n={n}", bits)
    canvas.desc(
        {
            "figure": "density",
            "rho": rho.spec_string,
            "n": n,
            "schema_version": SCHEMA_VERSION,
        }
    )
    return canvas.render()


def figure_construction(rho_spec: str = "golden", n: int = 13) -> tuple[dict, dict]:
    """Branches of S(rho, n, .) above the resulting step density.

    Embedded cross-check: the support length of the density equals the
    clumpiness of the orbit points, computed by the independent sorted-points
    route.
    """
    rho = parse_rho_spec(rho_spec)
    dens = density(rho, n)
    support_len = dens.support_length()
    clump = clumpiness_points(orbit_points(rho, n))
    if rho.sign_form(support_len - clump) != 0:
        raise InternalInconsistencyError("support length != clumpiness")

    from .measure import branch_decomposition

    dec = branch_decomposition(rho, n)
    canvas = Canvas(720, 560)
    lo_f, _ = lf_to_float(dens.breakpoints[0], rho, 48)
    hi_f, _ = lf_to_float(dens.breakpoints[-1], rho, 48)
    top = Frame(canvas, (60, 30, 620, 230), (0.0, 1.0), (lo_f - 0.05, hi_f + 0.05))
    top.frame_box()
    for br in dec.branches:
        x1, _ = lf_to_float(br.left, rho, 48)
        x2 = x1 + lf_to_float(br.length, rho, 48)[0]
        y1, _ = lf_to_float(br.v_min, rho, 48)
        y2, _ = lf_to_float(br.v_sup, rho, 48)
        top.polyline([(x1, y1), (x2, y2)], stroke="#1f4e9c", width=1.3)
    top.hline(lo_f)
    top.hline(hi_f)
    top.x_ticks([(0.0, "0"), (1.0, "1")])
    top.y_ticks([(lo_f, f"{lo_f:.3f}"), (0.0, "0"), (hi_f, f"{hi_f:.3f}")])
    top.title(f"branches of the sum over x in [0,1), rho={rho_spec}, n={n}")

    _density_frame(canvas, (60, 310, 620, 210), dens, f"pushforward density, n={n}")
    support_f, _ = lf_to_float(support_len, rho, 48)
    metadata = {
        "figure": "construction",
        "rho": rho_spec,
        "n": n,
        "support_length": support_f,
        "support_equals_clumpiness": True,
        "schema_version": SCHEMA_VERSION,
    }
    canvas.desc(metadata)
    return {f"construction-{rho_spec}-n{n}.svg": canvas.render()}, metadata


def figure_range_orbit(n_steps: int = 500) -> tuple[dict, dict]:
    """Running range of the golden-mean sums with two sample orbits.

    The x0 = 1/sqrt(5) orbit lies outside the exact field and is plotted in
    double precision, labeled approximate.
    """
    rho = parse_rho_spec("golden")
    a_arr, b_arr = sum_prefix(rho, n_steps)
    rf, _ = rho.value_float()
    svals = [(int(a_arr[i]) + int(b_arr[i]) * rf) / 2.0 for i in range(n_steps + 1)]

    ext = running_extrema(rho, n_steps)
    env_hi = []
    env_lo = []
    cur = None
    maxima = {r.index: r.value for r in ext.maxima}
    minima = {r.index: r.value for r in ext.minima}
    for i in range(1, n_steps + 1):
        if i in maxima:
            cur = lf_to_float(maxima[i], rho, 48)[0]
        env_hi.append((i, cur))
    for i in range(1, n_steps + 1):
        if i in minima:
            cur = lf_to_float(minima[i], rho, 48)[0]
        env_lo.append((i, cur))

    x0 = 1.0 / math.sqrt(5.0)
    approx = []
    pos = x0
    total = 0.0
    for i in range(1, n_steps + 1):
        pos = (pos + rf) % 1.0
        total += pos - 0.5
        approx.append((i, total))

    lo = min(min(y for _, y in env_lo), min(y for _, y in approx)) - 0.1
    hi = max(max(y for _, y in env_hi), max(y for _, y in approx)) + 0.1
    canvas = Canvas(760, 420)
    frame = Frame(canvas, (60, 30, 660, 350), (1, n_steps), (lo, hi))
    frame.frame_box()
    frame.hline(0.0)
    frame.polyline(env_hi, stroke="#777777", width=1.0)
    frame.polyline(env_lo, stroke="#777777", width=1.0)
    frame.dots([(i, svals[i]) for i in range(1, n_steps + 1)], r=1.0, fill="#1f4e9c")
    frame.polyline(approx, stroke="#b03030", width=1.0)
    frame.x_ticks([(1, "1"), (n_steps // 2, str(n_steps // 2)), (n_steps, str(n_steps))])
    frame.y_ticks([(0.0, "0")])
    frame.title("golden mean: running range, orbit at x0=0 (dots), x0=1/sqrt(5) approx (red)")
    metadata = {
        "figure": "range-orbit",
        "rho": "golden",
        "n_steps": n_steps,
        "approx_trace_x0": "1/sqrt(5)",
        "approx_trace_is_double_precision": True,
        "schema_version": SCHEMA_VERSION,
    }
    canvas.desc(metadata)
    return {f"range-orbit-golden-N{n_steps}.svg": canvas.render()}, metadata


def figure_tiling(rho_spec: str = "e-2", n: int = 2024) -> tuple[dict, dict]:
    """Integer translates of a density summing identically to 1.

    Refuses to draw unless the exact tiling check passes.
    """
    rho = parse_rho_spec(rho_spec)
    dens = density(rho, n)
    result = tiling_check(dens)
    if not result.ok:
        raise InternalInconsistencyError("tiling check failed")
    bps, vals = _density_floats(dens)
    lo, hi = bps[0], bps[-1]
    shifts = range(math.floor(lo) - 1, math.ceil(hi) + 2)
    canvas = Canvas(760, 420)
    window = (-0.05, 1.05)
    frame = Frame(canvas, (60, 30, 660, 350), window, (0.0, 1.15))
    frame.frame_box()
    count = 0
    for s in shifts:
        shifted = [b - s for b in bps]
        clipped_b, clipped_v = _clip_steps(shifted, vals, *window)
        if not clipped_v:
            continue
        frame.steps(clipped_b, clipped_v, stroke="#8fa8d0", width=0.9)
        count += 1
    frame.polyline([(0.0, 1.0), (1.0, 1.0)], stroke="#b03030", width=1.8)
    frame.x_ticks([(0.0, "0"), (1.0, "1")])
    frame.y_ticks([(0.0, "0"), (1.0, "1")])
    frame.title(f"translates of the density, rho={rho_spec}, n={n}: sum = 1")
    metadata = {
        "figure": "tiling",
        "rho": rho_spec,
        "n": n,
        "translates_drawn": count,
        "tiling_exact": True,
        "schema_version": SCHEMA_VERSION,
    }
    canvas.desc(metadata)
    return {f"tiling-{rho_spec}-n{n}.svg": canvas.render()}, metadata


def figure_reduced_residue(
    rho_spec: str = "e-2", q: int = 32, p: int = 23, p_prime: int = 1
) -> tuple[dict, dict]:
    """A density and its reduced-residue twin, verified identical exactly."""
    rho = parse_rho_spec(rho_spec)
    shift = Fraction(p - p_prime, q)
    rho2 = rotation_affine(rho, -shift, 1, spec=f"{rho_spec}-{shift}")
    d1 = density(rho, q)
    d2 = density(rho2, q)
    if not densities_equal(d1, d2):
        raise InternalInconsistencyError("reduced-residue densities differ")
    canvas = Canvas(760, 560)
    _density_frame(canvas, (60, 30, 620, 210), d1, f"rho={rho_spec}, n={q}")
    _density_frame(
        canvas, (60, 310, 620, 210), d2, f"rho={rho_spec}-{shift}, n={q}"
    )
    metadata = {
        "figure": "reduced-residue",
        "rho": rho_spec,
        "q": q,
        "p": p,
        "p_prime": p_prime,
        "densities_identical": True,
        "schema_version": SCHEMA_VERSION,
    }
    canvas.desc(metadata)
    return {f"reduced-residue-{rho_spec}-q{q}.svg": canvas.render()}, metadata


def figure_fractabolae() -> tuple[dict, dict]:
    """Birkhoff sums through q_2..q_5 for the period-(6,11,2,1) rotation.

    The previous q is shaded and the axis is ticked at its multiples; the
    digit-influence quadratic shows as parabola-like arcs when the partial
    quotient is large.  q_5 = 6*207 + 140 = 1382 per the convergent
    recursion.
    """
    rho = parse_rho_spec("cf:;6,11,2,1")
    q = [rho.convergent(k).q for k in range(7)]
    files = {}
    rf, _ = rho.value_float()
    for k in (2, 3, 4, 5):
        n = q[k]
        prev = q[k - 1]
        a_arr, b_arr = sum_prefix(rho, n)
        pts = [(i, (int(a_arr[i]) + int(b_arr[i]) * rf) / 2.0) for i in range(1, n + 1)]
        lo = min(y for _, y in pts) - 0.1
        hi = max(y for _, y in pts) + 0.1
        canvas = Canvas(720, 380)
        frame = Frame(canvas, (60, 30, 620, 310), (0, n), (lo, hi))
        canvas.rect(frame.px(0), frame.y0, frame.px(prev) - frame.px(0), frame.h, fill="#eeeeee")
        frame.frame_box()
        frame.hline(0.0)
        ticks = [(m * prev, str(m * prev)) for m in range(0, n // prev + 1)]
        frame.x_ticks(ticks)
        frame.y_ticks([(0.0, "0")])
        frame.dots(pts, r=1.1)
        frame.title(f"sums through q_{k}={n}, previous q_{k-1}={prev} shaded")
        canvas.desc(
            {
                "figure": "fractabolae",
                "rho": "cf:;6,11,2,1",
                "k": k,
                "q_k": n,
                "q_prev": prev,
                "schema_version": SCHEMA_VERSION,
            }
        )
        files[f"fractabolae-q{k}-{n}.svg"] = canvas.render()
    metadata = {
        "figure": "fractabolae",
        "rho": "cf:;6,11,2,1",
        "q_values": q[:6],
        "q5_note": "q_5 = 6*207 + 140 = 1382 by the convergent recursion",
        "schema_version": SCHEMA_VERSION,
    }
    return files, metadata


def figure_bestiary(n_list=BESTIARY_DEFAULT) -> tuple[dict, dict]:
    """A sampler of e-2 densities: convergent denominators and the
    neighborhood of q_10 = 1001."""
    rho = parse_rho_spec("e-2")
    files = {}
    for n in n_list:
        dens = density(rho, n)
        canvas = Canvas(420, 300)
        _density_frame(canvas, (50, 30, 340, 230), dens, f"rho=e-2, n={n}")
        canvas.desc(
            {
                "figure": "bestiary",
                "rho": "e-2",
                "n": n,
                "schema_version": SCHEMA_VERSION,
            }
        )
        files[f"bestiary-e-2-n{n:05d}.svg"] = canvas.render()
    metadata = {
        "figure": "bestiary",
        "rho": "e-2",
        "n_list": list(n_list),
        "schema_version": SCHEMA_VERSION,
    }
    return files, metadata


def emit_figures(which: str, n_list=None, n_steps: int = 500) -> tuple[dict, dict]:
    """Dispatch by figure id; returns ({filename: svg}, metadata)."""
    if which == "1.1":
        return figure_construction()
    if which == "1.2":
        return figure_range_orbit(n_steps)
    if which == "2.1":
        return figure_tiling()
    if which == "4.2":
        return figure_reduced_residue()
    if which == "B.1":
        return figure_fractabolae()
    if which == "C.1":
        return figure_bestiary(tuple(n_list) if n_list else BESTIARY_DEFAULT)
    raise ValueError(f"unknown figure id {which!r}; choose from {FIGURE_IDS}")
