"""Command-line client for the birkhoff service.

By default the commands talk to an in-process copy of the HTTP app, so no
server needs to be running; point --server at a live instance to go over
the network.  Exit codes: 0 ok, 2 usage, 3 I/O, 4 internal inconsistency
(a cross-checked identity failed, e.g. `discrepancy --method all` with
disagreeing routes).
"""

from __future__ import annotations

import csv
import io
import json
from typing import Optional

import click

from . import SCHEMA_VERSION, __version__

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INCONSISTENT = 4


class CliError(click.ClickException):
    def __init__(self, message: str, exit_code: int = 1):
        super().__init__(message)
        self.exit_code = exit_code


class Client:
    """Thin HTTP client; in-process ASGI transport unless --server is given."""

    def __init__(self, server: Optional[str]):
        if server:
            import httpx

            self._http = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import app

            self._http = TestClient(app)

    def get(self, path: str, **params):
        clean = {k: v for k, v in params.items() if v is not None}
        response = self._http.get(path, params=clean)
        if response.status_code >= 400:
            self._raise(response)
        return response

    @staticmethod
    def _raise(response):
        try:
            detail = response.json().get("detail")
        except Exception:
            detail = None
        if isinstance(detail, dict):
            kind = detail.get("kind", "error")
            message = detail.get("message", "service error")
        else:
            kind = "usage" if response.status_code in (400, 422) else "error"
            message = json.dumps(detail) if detail else response.text[:500]
        codes = {"usage": EXIT_USAGE, "inconsistency": EXIT_INCONSISTENT}
        raise CliError(f"{kind}: {message}", codes.get(kind, 1))


def _write_output(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        click.echo(text, nl=not text.endswith("\n"))
        return
    try:
        with open(out, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"io: {exc}", EXIT_IO)


def _lf_text(obj: dict) -> str:
    return f"a={obj['a']} b={obj['b']} float={obj['float']:.10g}"


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; in-process by default.")
@click.version_option(__version__, message=f"%(prog)s %(version)s (schema {SCHEMA_VERSION})")
@click.pass_context
def main(ctx, server):
    """Exact Birkhoff sums, measures, and discrepancies of circle rotations.

    Rotation numbers: golden | silver | metallic:<a> | e-2 |
    cf:<a1>,<a2>,...[;<period digits>] | rat:<p>/<q>
    """
    ctx.obj = Client(server)


@main.command()
@click.argument("rho")
@click.option("--depth", default=10, show_default=True, help="Largest convergent index.")
@click.option("--bits", default=48, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of a table.")
@click.pass_obj
def cf(client: Client, rho, depth, bits, as_json):
    """Continued fraction digits and convergents (p_n, q_n, d_n)."""
    data = client.get("/cf", rho=rho, depth=depth, bits=bits).json()
    if as_json:
        click.echo(json.dumps(data, indent=2))
        return
    click.echo(f"rho = {data['rho']}")
    click.echo(f"{'n':>3} {'a_n':>6} {'p_n':>12} {'q_n':>12} {'d_n':>22}")
    for row in data["rows"]:
        a = "" if row["a"] is None else row["a"]
        click.echo(
            f"{row['n']:>3} {a:>6} {row['p']:>12} {row['q']:>12} "
            f"{row['d']['float']:>22.15g}"
        )


@main.command(name="sum")
@click.argument("rho")
@click.option("-n", "n", type=int, required=True, help="Number of orbit terms.")
@click.option("--x0", default="0", show_default=True, help="Initial point (rational).")
@click.option("--fast", is_flag=True, help="O(log n) summation (x0 = 0, irrational rho).")
@click.option("--bits", default=48, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def sum_cmd(client: Client, rho, n, x0, fast, bits, as_json):
    """The Birkhoff sum over i = 1..n of ({x0 + i rho} - 1/2)."""
    data = client.get("/sum", rho=rho, n=n, x0=x0, fast=fast, bits=bits).json()
    if as_json:
        click.echo(json.dumps(data, indent=2))
    else:
        click.echo(f"S({rho}, {n}, {data['x0']}) [{data['method']}]: " + _lf_text(data["value"]))


@main.command()
@click.argument("rho")
@click.option("-N", "n_steps", type=int, required=True, help="Orbit length.")
@click.option("--x0", default="0", show_default=True)
@click.option("--float-x0", is_flag=True, help="Double-precision orbit for x0 outside the exact field.")
@click.option("--bits", default=48, show_default=True)
@click.option("-o", "--out", default=None, help="CSV output path (stdout by default).")
@click.pass_obj
def orbit(client: Client, rho, n_steps, x0, float_x0, bits, out):
    """Orbit of partial sums as CSV with running extremum flags."""
    if not float_x0:
        try:
            from fractions import Fraction

            Fraction(x0)
        except (ValueError, ZeroDivisionError):
            raise CliError(
                f"usage: x0 = {x0!r} is not rational; pass --float-x0 for an "
                "approximate orbit",
                EXIT_USAGE,
            )
    data = client.get(
        "/orbit", rho=rho, n_steps=n_steps, x0=x0, float_x0=float_x0, bits=bits
    ).json()
    buf = io.StringIO()
    fields = ["i", "a", "b", "float", "is_running_max", "is_running_min"]
    if data["approx"]:
        fields.append("approx")
    writer = csv.writer(buf)
    writer.writerow(fields)
    for row in data["rows"]:
        record = [
            row["i"],
            row["a"] if row["a"] is not None else "",
            row["b"] if row["b"] is not None else "",
            repr(row["float"]),
            row["is_running_max"],
            row["is_running_min"],
        ]
        if data["approx"]:
            record.append(True)
        writer.writerow(record)
    _write_output(buf.getvalue(), out)


@main.command()
@click.argument("rho")
@click.option("-n", "n", type=int, required=True)
@click.option("--json", "as_json", is_flag=True, help="Density as JSON.")
@click.option("--svg", "as_svg", is_flag=True, help="Density as an SVG step plot.")
@click.option("--bits", default=48, show_default=True)
@click.option("-o", "--out", default=None)
@click.pass_obj
def density(client: Client, rho, n, as_json, as_svg, bits, out):
    """The Birkhoff density as an exact step function."""
    if as_json and as_svg:
        raise CliError("usage: choose one of --json / --svg", EXIT_USAGE)
    fmt = "svg" if as_svg else "json"
    response = client.get("/density", rho=rho, n=n, format=fmt, bits=bits)
    if as_svg:
        _write_output(response.text, out)
    else:
        _write_output(json.dumps(response.json(), indent=2) + "\n", out)


@main.command()
@click.argument("rho")
@click.option("-n", "n", type=int, required=True)
@click.option(
    "--method",
    default="all",
    show_default=True,
    type=click.Choice(["points", "oracle", "range", "ramshaw", "all"]),
)
@click.option("--format", "fmt", default="text", type=click.Choice(["text", "csv", "json"]), show_default=True)
@click.option("--bits", default=48, show_default=True)
@click.pass_obj
def discrepancy(client: Client, rho, n, method, fmt, bits):
    """Clumpiness n*D_n of the orbit {i rho}; --method all cross-checks all four routes."""
    data = client.get("/discrepancy", rho=rho, n=n, method=method, bits=bits).json()
    if fmt == "json":
        click.echo(json.dumps(data, indent=2))
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["n", "a", "b", "float", "method"])
        for item in data["results"]:
            v = item["value"]
            writer.writerow([n, v["a"], v["b"], repr(v["float"]), item["method"]])
        click.echo(buf.getvalue(), nl=False)
    else:
        for item in data["results"]:
            click.echo(f"{item['method']:>8}: " + _lf_text(item["value"]))
    if data["all_equal"] is False:
        raise CliError("inconsistency: discrepancy routes disagree", EXIT_INCONSISTENT)


@main.command()
@click.argument("rho")
@click.option("-k", "k", type=int, required=True, help="Convergent index.")
@click.option("--bits", default=48, show_default=True)
@click.pass_obj
def trapezoid(client: Client, rho, k, bits):
    """Classify the density at the k-th convergent denominator as a step trapezoid."""
    data = client.get("/trapezoid", rho=rho, k=k, bits=bits).json()
    click.echo(
        f"n = q_{k} = {data['q']}: step count {data['step_count']}, "
        f"isosceles={data['isosceles']}, trapezoid={data['is_step_trapezoid']}"
    )
    click.echo(f"  plateau width  {_lf_text(data['plateau_width'])}")
    click.echo(f"  formula        {_lf_text(data['plateau_width_formula'])}")
    click.echo(f"  support length {_lf_text(data['support_length'])}")
    click.echo(f"  formula        {_lf_text(data['support_length_formula'])}")
    if not (data["is_step_trapezoid"] and data["isosceles"] and data["widths_match"]):
        raise CliError(
            "inconsistency: density at a convergent denominator is not an "
            "isosceles step trapezoid with the predicted widths",
            EXIT_INCONSISTENT,
        )


@main.command()
@click.option(
    "--which",
    default="all",
    show_default=True,
    help="Figure ids (comma separated) or 'all': 1.1, 1.2, 2.1, 4.2, B.1, C.1.",
)
@click.option("--outdir", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--n-list", default=None, help="Override the C.1 sampler's n values (csv).")
@click.option("--n-steps", default=500, show_default=True, help="Orbit length for 1.2.")
@click.pass_obj
def figures(client: Client, which, outdir, n_list, n_steps):
    """Emit the reference figures as deterministic SVG files."""
    import os

    from .figures import FIGURE_IDS

    ids = list(FIGURE_IDS) if which == "all" else [w.strip() for w in which.split(",")]
    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as exc:
        raise CliError(f"io: {exc}", EXIT_IO)
    for fig_id in ids:
        data = client.get(
            f"/figures/{fig_id}", n_list=n_list, n_steps=n_steps
        ).json()
        for name, svg_text in data["files"].items():
            _write_output(svg_text, os.path.join(outdir, name))
        meta_name = f"figure-{fig_id.replace('.', '_')}-metadata.json"
        _write_output(
            json.dumps(data["metadata"], indent=2, sort_keys=True) + "\n",
            os.path.join(outdir, meta_name),
        )
        click.echo(f"{fig_id}: wrote {len(data['files'])} file(s) to {outdir}")


@main.command()
@click.option("-a", "a", type=int, required=True, help="Metallic mean parameter.")
@click.option("--exponent", default=6, show_default=True, help="Index reach 10^e for the sum ratios.")
@click.option("--d-cap", default=100_000, show_default=True, help="Index cap for the clumpiness ratios.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def asymptotics(client: Client, a, exponent, d_cap, as_json):
    """Sum and clumpiness growth ratios against the metallic-mean constants."""
    data = client.get("/asymptotics", a=a, exponent=exponent, d_cap=d_cap).json()
    if as_json:
        click.echo(json.dumps(data, indent=2))
        return
    click.echo(f"a={a}: c(a)={data['c_value']:.6f}  4c(a)={data['four_c']:.6f}")
    click.echo(f"{'index':>12} {'S':>12} {'S/ln':>10}")
    for row in data["s_rows"]:
        click.echo(f"{row['index']:>12} {row['value']:>12.5f} {row['ratio']:>10.6f}")
    click.echo(f"{'index':>12} {'iD_i':>12} {'iD_i/ln':>10}")
    for row in data["d_rows"]:
        click.echo(f"{row['index']:>12} {row['value']:>12.5f} {row['ratio']:>10.6f}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("birkhoff.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
