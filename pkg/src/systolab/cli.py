"""Command-line front end; a thin client over the service handlers.

Each verb builds a request model, obtains a response (in-process by
default, over HTTP when --server is given), renders the records with the
fixed serializers and writes them to --out or stdout.

Exit codes: 0 success, 2 usage error, 3 when a result carries a
non-convergence flag (or, for verify, a failed criterion). Estimate
caveats such as sys1-estimate-not-certified are reported in the flags
column but are not failures; they are inherent to the method.
"""

from __future__ import annotations

import sys

import click
import pydantic

from . import reports
from .service import handlers
from .service.models import (
    CylinderRequest,
    LpRequest,
    SliceRequest,
    SweepRequest,
    Torus3Request,
    VerifyRequest,
)

_ENDPOINTS = {
    "/slice": handlers.handle_slice,
    "/cylinder": handlers.handle_cylinder,
    "/sweep": handlers.handle_sweep,
    "/torus3": handlers.handle_torus3,
    "/lp": handlers.handle_lp,
    "/verify": handlers.handle_verify,
}


def _request(model, **kwargs):
    try:
        return model(**kwargs)
    except pydantic.ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(part) for part in first["loc"]) or "request"
        raise click.UsageError(f"{loc}: {first['msg']}")


def _call(server: str | None, path: str, req) -> dict:
    if server is None:
        try:
            return _ENDPOINTS[path](req).model_dump()
        except ValueError as exc:
            raise click.UsageError(str(exc))
    import httpx

    url = server.rstrip("/") + path
    try:
        resp = httpx.post(url, json=req.model_dump(), timeout=600.0)
    except httpx.HTTPError as exc:
        raise click.ClickException(f"request to {url} failed: {exc}")
    if resp.status_code == 422:
        raise click.UsageError(f"{url}: {resp.text}")
    if resp.status_code != 200:
        raise click.ClickException(f"{url} returned {resp.status_code}: {resp.text}")
    return resp.json()


def _emit(records, kind: str, fmt: str, out: str | None) -> None:
    text = reports.render(records, kind, fmt)
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _flag_exit(records) -> None:
    flagged = [r for r in records if handlers.NONCONVERGENCE_FLAG in r.get("flags", [])]
    if flagged:
        js = ", ".join(str(r.get("j", "?")) for r in flagged)
        click.echo(f"warning: shortening did not converge for j = {js}", err=True)
        sys.exit(3)


def _opt_out(fn):
    fn = click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
                      help="output file (default: stdout)")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                      show_default=True, help="output encoding")(fn)
    fn = click.option("--server", default=None, metavar="URL",
                      help="POST to a running service instead of computing in-process")(fn)
    return fn


def _opt_quality(fn):
    fn = click.option("--tol", type=float, default=1e-9, show_default=True,
                      help="quadrature tolerance")(fn)
    fn = click.option("--restarts", type=int, default=1, show_default=True,
                      help="random restarts per homotopy class in loop shortening")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="seed for all randomized searches")(fn)
    return fn


@click.group()
def main():
    """Numerical laboratory for systolically free metric families."""


@main.command("slice")
@click.option("--start", type=float, default=0.0, show_default=True, help="first folded coordinate")
@click.option("--stop", type=float, default=5.0, show_default=True, help="last folded coordinate")
@click.option("--step", type=float, default=0.5, show_default=True)
@_opt_out
def slice_cmd(start, stop, step, out, fmt, server):
    """Tabulate per-slice torus invariants along the folded coordinate."""
    req = _request(SliceRequest, start=start, stop=stop, step=step)
    payload = _call(server, "/slice", req)
    _emit(payload["records"], "slice", fmt, out)


@main.command()
@click.option("--j", type=int, required=True, help="half-length of the cylinder")
@_opt_quality
@_opt_out
def cylinder(j, tol, restarts, seed, out, fmt, server):
    """Full invariant report for one cylinder: volume, area, mass bound, residuals."""
    req = _request(CylinderRequest, j=j, tol=tol, restarts=restarts, seed=seed)
    payload = _call(server, "/cylinder", req)
    _emit(payload["records"], "cylinder", fmt, out)
    _flag_exit(payload["records"])


@main.command()
@click.option("--j-max", type=int, required=True, help="largest j in the sweep")
@click.option("--j-min", type=int, default=1, show_default=True)
@_opt_quality
@_opt_out
def sweep(j_max, j_min, tol, restarts, seed, out, fmt, server):
    """Freedom reports for every j in a contiguous range."""
    req = _request(SweepRequest, j_min=j_min, j_max=j_max, tol=tol, restarts=restarts, seed=seed)
    payload = _call(server, "/sweep", req)
    _emit(payload["records"], "freedom", fmt, out)
    _flag_exit(payload["records"])


@main.command()
@click.option("--j", "js", type=int, multiple=True, required=True,
              help="insert half-length; repeat for several reports")
@click.option("--t4", is_flag=True, help="emit the circle-product records instead")
@_opt_quality
@_opt_out
def torus3(js, t4, tol, restarts, seed, out, fmt, server):
    """Freedom reports for assembled three-tori at the given j values."""
    req = _request(Torus3Request, j_list=list(js), include_t4=t4, tol=tol,
                   restarts=restarts, seed=seed)
    payload = _call(server, "/torus3", req)
    if t4:
        _emit(payload["t4_records"], "t4", fmt, out)
        _flag_exit(payload["t4_records"])
    else:
        _emit(payload["records"], "freedom", fmt, out)
        _flag_exit(payload["records"])


@main.command()
@click.option("--j", type=int, required=True)
@click.option("--res", default=None, metavar="NX,NY,NZ",
              help="grid resolution (default: 8j,8,8)")
@click.option("--z-plane", type=int, default=0, show_default=True,
              help="index of the reference slab")
@click.option("--tol", type=float, default=1e-9, show_default=True,
              help="relative duality-gap tolerance")
@click.option("--chain-out", type=click.Path(dir_okay=False, writable=True), default=None,
              help="also write the optimal chain in the sparse text format")
@_opt_out
def lp(j, res, z_plane, tol, chain_out, out, fmt, server):
    """Independent discrete mass oracle: minimize weighted area in the slab class."""
    nx = ny = nz = None
    if res is not None:
        parts = res.split(",")
        if len(parts) != 3:
            raise click.UsageError("--res expects three integers NX,NY,NZ")
        try:
            nx, ny, nz = (int(p) for p in parts)
        except ValueError:
            raise click.UsageError("--res expects three integers NX,NY,NZ")
    kwargs = {"j": j, "z_plane": z_plane, "tol": tol, "include_chain": chain_out is not None}
    if res is not None:
        kwargs.update(nx=nx, ny=ny, nz=nz)
    req = _request(LpRequest, **kwargs)
    payload = _call(server, "/lp", req)
    _emit(payload["records"], "lp", fmt, out)
    if chain_out is not None and payload.get("chain"):
        with open(chain_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload["chain"])
    record = payload["records"][0]
    if not (record["converged"] and record["certificate_ok"]):
        click.echo("warning: LP certificate did not verify", err=True)
        sys.exit(3)


@main.command()
@click.option("--criteria", default=None, metavar="N,N,...",
              help="subset of criteria to run (default: all thirteen)")
@_opt_out
def verify(criteria, out, fmt, server):
    """Run the acceptance suite; one PASS/FAIL line per criterion on stderr."""
    numbers = None
    if criteria is not None:
        try:
            numbers = [int(p) for p in criteria.split(",") if p.strip()]
        except ValueError:
            raise click.UsageError("--criteria expects comma-separated integers")
    req = _request(VerifyRequest, criteria=numbers)
    payload = _call(server, "/verify", req)
    for record in payload["records"]:
        word = "PASS" if record["passed"] else "FAIL"
        click.echo(f"criterion {record['number']:2d} {word} {record['name']}: {record['detail']}",
                   err=True)
    _emit(payload["records"], "verify", fmt, out)
    if not payload["all_passed"]:
        sys.exit(3)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service the other verbs can talk to via --server."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
