"""Command-line client for the service.

Runs against an in-process application by default; pass ``--server`` to
talk to a deployed instance instead.  Exit codes: 0 success, 1 invalid
state, 2 parse/config error, 3 impermissible move.
"""

from __future__ import annotations

import json
import os
import sys

import click
import httpx

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_IMPERMISSIBLE = 3

CHECK_ENV = "SUBCLIQUE_CHECK_PROFILE"


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # starlette's bundled client warns about the installed httpx pairing
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _fail(payload, default_code=EXIT_PARSE):
    detail = payload.get("detail", payload)
    if isinstance(detail, dict):
        kind = detail.get("error", "error")
        message = detail.get("message", json.dumps(detail))
    else:
        kind, message = "error", str(detail)
    click.echo(f"{kind}: {message}", err=True)
    codes = {
        "parse": EXIT_PARSE,
        "config": EXIT_PARSE,
        "impermissible": EXIT_IMPERMISSIBLE,
        "invalid-state": EXIT_INVALID,
        "unknown-node": EXIT_PARSE,
        "unknown-clique-node": EXIT_PARSE,
    }
    sys.exit(codes.get(kind, default_code))


def _post(client, path, payload):
    resp = client.post(path, json=payload)
    if resp.status_code >= 400:
        try:
            _fail(resp.json())
        except ValueError:
            click.echo(resp.text, err=True)
            sys.exit(EXIT_PARSE)
    return resp.json()


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_PARSE)


@click.group()
@click.option("--server", default=None, help="Base URL of a running service.")
@click.pass_context
def main(ctx, server):
    """Clique-dependent bipartite states: validate, explore moves, sample."""
    ctx.obj = server


@main.command()
@click.argument("state_file")
@click.pass_obj
def validate(server, state_file):
    """Validate a state document; exit 0 iff it is clique-dependent and its
    projection is decomposable."""
    data = _post(_client(server), "/validate", {"document": _read(state_file)})
    if data["valid"]:
        click.echo(
            f"valid: {data['node_count']} nodes, {data['maximal_count']} maximal "
            f"cliques, {data['sub_clique_count']} sub-cliques"
        )
        sys.exit(EXIT_OK)
    click.echo(f"invalid: {data['violation']}", err=True)
    sys.exit(EXIT_INVALID)


@main.command()
@click.argument("state_file")
@click.pass_obj
def table(server, state_file):
    """Print the disconnect/promotion table."""
    data = _post(_client(server), "/table", {"document": _read(state_file)})
    click.echo(data["text"], nl=False)


@main.command()
@click.argument("state_file")
@click.option("--node", required=True, help="Node label or id.")
@click.option("--target", required=True, help="Clique-node label or #id.")
@click.option("--connect", "action", flag_value="connect")
@click.option("--disconnect", "action", flag_value="disconnect")
@click.option("--promote", default=None, help="Promotion clique-node (disconnect only).")
@click.option("--output", "-o", default=None, help="Write the new state here.")
@click.pass_obj
def move(server, state_file, node, target, action, promote, output):
    """Apply one connect/disconnect move and print the edit journal."""
    if action is None:
        click.echo("one of --connect/--disconnect is required", err=True)
        sys.exit(EXIT_PARSE)
    data = _post(
        _client(server),
        "/move",
        {
            "document": _read(state_file),
            "node": node,
            "action": action,
            "target": target,
            "promotion": promote,
        },
    )
    for line in data["edit"]:
        click.echo(line)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(data["document"])
        click.echo(f"state written to {output}")
    else:
        click.echo(data["document"], nl=False)
    sys.exit(EXIT_OK if data["valid"] else EXIT_INVALID)


@main.command()
@click.argument("state_file")
@click.option("--node", required=True)
@click.pass_obj
def sets(server, state_file, node):
    """Show a node's boundary/neighbour sets and promotion candidates."""
    data = _post(
        _client(server), "/move-sets", {"document": _read(state_file), "node": node}
    )
    click.echo(json.dumps(data, indent=2))


@main.command()
@click.argument("state_file")
@click.option("--seed", default=0, type=int)
@click.option("--steps", default=1000, type=int)
@click.option("--f-model", default="const:0.5", help="const:<p> or size:<a>,<b>.")
@click.option("--target", default="uniform", help="uniform or pathjoint[:penalty].")
@click.option(
    "--check",
    default=None,
    type=click.Choice(["debug", "fast", "off"]),
    help=f"Validation profile (default from ${CHECK_ENV} or fast).",
)
@click.option("--batched/--no-batched", default=False)
@click.option("--trace", "trace_path", default=None, help="Write the trace TSV here.")
@click.option("--checkpoint", "checkpoint_path", default=None)
@click.option("--output", "-o", default=None, help="Write the final state here.")
@click.pass_obj
def sample(server, state_file, seed, steps, f_model, target, check, batched,
           trace_path, checkpoint_path, output):
    """Run the node-driven sampler; deterministic given the seed."""
    if steps < 0:
        click.echo("steps must be >= 0", err=True)
        sys.exit(EXIT_PARSE)
    check = check or os.environ.get(CHECK_ENV, "fast")
    if check not in ("debug", "fast", "off"):
        click.echo(f"bad check profile {check!r}", err=True)
        sys.exit(EXIT_PARSE)
    data = _post(
        _client(server),
        "/sample",
        {
            "document": _read(state_file),
            "seed": seed,
            "steps": steps,
            "f_model": f_model,
            "target": target,
            "check": check,
            "batched": batched,
        },
    )
    if trace_path:
        with open(trace_path, "w", encoding="utf-8") as fh:
            fh.write(data["trace"])
    if checkpoint_path:
        with open(checkpoint_path, "w", encoding="utf-8") as fh:
            fh.write(data["checkpoint"])
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(data["document"])
    click.echo(json.dumps(data["summary"], indent=2))


@main.command()
@click.argument("state_file")
@click.option("--dot", "fmt", flag_value="dot", default=True)
@click.option("--output", "-o", default=None)
@click.pass_obj
def export(server, state_file, fmt, output):
    """Export the junction graph (DOT)."""
    data = _post(_client(server), "/export", {"document": _read(state_file)})
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(data["dot"])
    else:
        click.echo(data["dot"], nl=False)


@main.command()
@click.argument("state_file")
@click.pass_obj
def report(server, state_file):
    """Differential report: tree-conditioned vs tree-free move sets."""
    data = _post(_client(server), "/treefree-report", {"document": _read(state_file)})
    click.echo(json.dumps(data, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8942, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("subclique.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
