"""The HTTP face of the package: every computation behind a GET endpoint.

Per-rotation-number digit and convergent caches persist for the lifetime of
the process, so repeated queries against the same rho get cheaper; see the
concurrency notes in the exact module.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse

from .. import SCHEMA_VERSION, __version__
from ..errors import (
    BirkhoffError,
    InternalInconsistencyError,
    PreconditionError,
    PrecisionInsufficientError,
    RefinementExhaustedError,
)
from ..exact import ZERO, lf_to_json, linear_form, parse_rho_spec
from ..figures import FIGURE_IDS, density_svg, emit_figures
from ..measure import density, density_json, trapezoid_classify
from ..discrepancy import (
    asymptotic_report,
    clumpiness_points,
    clumpiness_ramshaw,
    clumpiness_range,
    discrepancy_oracle,
    orbit_points,
)
from ..sums import orbit, sum_direct, sum_fast
from . import schemas

_RHO_CACHE: dict[str, object] = {}


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise PreconditionError(f"{text!r} is not a rational number") from None


def _rho(spec: str):
    """Parse a rho spec, reusing one object per spec so caches accumulate."""
    rho = _RHO_CACHE.get(spec)
    if rho is None:
        rho = parse_rho_spec(spec)
        _RHO_CACHE[spec] = rho
    return rho


def _lf(value, rho, bits: int) -> schemas.LinearFormOut:
    return schemas.LinearFormOut(**lf_to_json(value, rho, bits))


def create_app() -> FastAPI:
    app = FastAPI(
        title="birkhoff",
        version=__version__,
        description=(
            "Exact Birkhoff sums, Birkhoff measures, and discrepancies of "
            "circle rotations by continued-fraction rotation numbers."
        ),
    )

    @app.exception_handler(BirkhoffError)
    async def _birkhoff_error(request, exc: BirkhoffError):
        if isinstance(exc, InternalInconsistencyError):
            kind, status = "inconsistency", 500
        elif isinstance(exc, (PrecisionInsufficientError, RefinementExhaustedError)):
            kind, status = "precision", 400
        else:
            kind, status = "usage", 400
        return JSONResponse(
            status_code=status,
            content={"detail": {"kind": kind, "message": str(exc)}},
        )

    @app.get("/version", response_model=schemas.VersionResponse)
    def version():
        return schemas.VersionResponse(package=__version__, schema_version=SCHEMA_VERSION)

    @app.get("/cf", response_model=schemas.CfResponse)
    def cf(rho: str, depth: int = Query(10, ge=0), bits: int = Query(48, ge=1, le=50)):
        r = _rho(rho)
        rows = []
        for n in range(depth + 1):
            c = r.convergent(n)
            rows.append(
                schemas.ConvergentRow(
                    n=n,
                    a=r.digit(n) if n >= 1 else None,
                    p=c.p,
                    q=c.q,
                    d=_lf(c.d, r, bits),
                )
            )
        return schemas.CfResponse(schema_version=SCHEMA_VERSION, rho=rho, rows=rows)

    @app.get("/sum", response_model=schemas.SumResponse)
    def sum_endpoint(
        rho: str,
        n: int = Query(..., ge=0),
        x0: str = "0",
        fast: bool = False,
        bits: int = Query(48, ge=1, le=50),
    ):
        r = _rho(rho)
        x0_frac = _rational(x0)
        if fast:
            if x0_frac != 0:
                raise PreconditionError("the fast path requires x0 = 0")
            value = sum_fast(r, n)
            method = "fast"
        else:
            value = sum_direct(r, n, linear_form(x0_frac))
            method = "direct"
        return schemas.SumResponse(
            schema_version=SCHEMA_VERSION,
            rho=rho,
            n=n,
            x0=str(x0_frac),
            method=method,
            value=_lf(value, r, bits),
        )

    @app.get("/orbit", response_model=schemas.OrbitResponse)
    def orbit_endpoint(
        rho: str,
        n_steps: int = Query(..., ge=1),
        x0: str = "0",
        float_x0: bool = False,
        bits: int = Query(48, ge=1, le=50),
    ):
        r = _rho(rho)
        rows = []
        if float_x0:
            rf, _ = r.value_float()
            pos = float(x0)
            total = 0.0
            best_hi = best_lo = None
            for i in range(1, n_steps + 1):
                pos = (pos + rf) % 1.0
                total += pos - 0.5
                hi = best_hi is None or total > best_hi
                lo = best_lo is None or total < best_lo
                best_hi = total if hi else best_hi
                best_lo = total if lo else best_lo
                rows.append(
                    schemas.OrbitRow(
                        i=i,
                        a=None,
                        b=None,
                        float_value=total,
                        is_running_max=hi,
                        is_running_min=lo,
                    )
                )
            x0_str = x0
        else:
            x0_form = linear_form(_rational(x0))
            from ..exact import fraction_str, lf_to_float

            for rec in orbit(r, n_steps, x0_form):
                f, _ = lf_to_float(rec.value, r, bits)
                rows.append(
                    schemas.OrbitRow(
                        i=rec.i,
                        a=fraction_str(rec.value.a),
                        b=fraction_str(rec.value.b),
                        float_value=f,
                        is_running_max=rec.is_running_max,
                        is_running_min=rec.is_running_min,
                    )
                )
            x0_str = str(_rational(x0))
        return schemas.OrbitResponse(
            schema_version=SCHEMA_VERSION,
            rho=rho,
            x0=x0_str,
            approx=float_x0,
            rows=rows,
        )

    @app.get("/density")
    def density_endpoint(
        rho: str,
        n: int = Query(..., ge=1),
        format: str = Query("json", pattern="^(json|svg)$"),
        bits: int = Query(48, ge=1, le=50),
    ):
        r = _rho(rho)
        if format == "svg":
            return Response(density_svg(r, n, bits), media_type="image/svg+xml")
        return JSONResponse(density_json(density(r, n), bits))

    @app.get("/discrepancy", response_model=schemas.DiscrepancyResponse)
    def discrepancy_endpoint(
        rho: str,
        n: int = Query(..., ge=1),
        method: str = Query("all", pattern="^(points|oracle|range|ramshaw|all)$"),
        bits: int = Query(48, ge=1, le=50),
    ):
        r = _rho(rho)
        routes = {
            "points": lambda: clumpiness_points(orbit_points(r, n)),
            "oracle": lambda: discrepancy_oracle(orbit_points(r, n)),
            "range": lambda: clumpiness_range(r, n),
            "ramshaw": lambda: clumpiness_ramshaw(r, n),
        }
        selected = list(routes) if method == "all" else [method]
        results = []
        values = []
        for name in selected:
            value = routes[name]()
            values.append(value)
            results.append(
                schemas.DiscrepancyItem(method=name, value=_lf(value, r, bits))
            )
        all_equal = None
        if method == "all":
            all_equal = all(
                r.sign_form(v - values[0]) == 0 for v in values[1:]
            )
        return schemas.DiscrepancyResponse(
            schema_version=SCHEMA_VERSION,
            rho=rho,
            n=n,
            results=results,
            all_equal=all_equal,
        )

    @app.get("/trapezoid", response_model=schemas.TrapezoidResponse)
    def trapezoid_endpoint(
        rho: str, k: int = Query(..., ge=1), bits: int = Query(48, ge=1, le=50)
    ):
        r = _rho(rho)
        c = r.convergent(k)
        dens = density(r, c.q)
        report = trapezoid_classify(dens, c.q)
        abs_d = c.d if r.sign_form(c.d) >= 0 else -c.d
        width_formula = 1 - abs_d * (c.q - 1)
        support_formula = 1 + abs_d * (c.q - 1)
        ones = [(l, rr) for l, rr, v in dens.intervals() if v == 1]
        plateau_width = (ones[-1][1] - ones[0][0]) if ones else ZERO
        support_len = dens.support_length()
        widths_match = (
            r.sign_form(plateau_width - width_formula) == 0
            and r.sign_form(support_len - support_formula) == 0
        )
        return schemas.TrapezoidResponse(
            schema_version=SCHEMA_VERSION,
            rho=rho,
            k=k,
            q=c.q,
            is_step_trapezoid=report.is_step_trapezoid,
            step_count=report.step_count,
            isosceles=report.isosceles,
            plateau_width=_lf(plateau_width, r, bits),
            plateau_width_formula=_lf(width_formula, r, bits),
            support_length=_lf(support_len, r, bits),
            support_length_formula=_lf(support_formula, r, bits),
            widths_match=widths_match,
            failures=list(report.failures),
        )

    @app.get("/asymptotics", response_model=schemas.AsymptoticResponse)
    def asymptotics_endpoint(
        a: int = Query(..., ge=1),
        exponent: int = Query(6, ge=1, le=12),
        d_cap: int = Query(100_000, ge=10, le=20_000_000),
    ):
        report = asymptotic_report(a, exponent, d_index_cap=d_cap)
        return schemas.AsymptoticResponse(
            schema_version=SCHEMA_VERSION,
            a=report.a,
            c_value=report.c_value,
            four_c=4 * report.c_value,
            s_rows=[
                schemas.AsymptoticRowOut(index=r_.index, value=r_.value, ratio=r_.ratio)
                for r_ in report.s_rows
            ],
            d_rows=[
                schemas.AsymptoticRowOut(index=r_.index, value=r_.value, ratio=r_.ratio)
                for r_ in report.d_rows
            ],
        )

    @app.get("/figures/{which}", response_model=schemas.FigureResponse)
    def figures_endpoint(
        which: str,
        n_list: Optional[str] = None,
        n_steps: int = Query(500, ge=1),
    ):
        if which not in FIGURE_IDS:
            raise PreconditionError(
                f"unknown figure id {which!r}; choose from {FIGURE_IDS}"
            )
        try:
            parsed_list = (
                [int(t) for t in n_list.split(",") if t] if n_list else None
            )
        except ValueError:
            raise PreconditionError(f"bad n_list {n_list!r}") from None
        if parsed_list is not None and any(n < 1 for n in parsed_list):
            raise PreconditionError("n_list entries must be >= 1")
        files, metadata = emit_figures(which, n_list=parsed_list, n_steps=n_steps)
        return schemas.FigureResponse(
            schema_version=SCHEMA_VERSION, which=which, files=files, metadata=metadata
        )

    return app


app = create_app()
