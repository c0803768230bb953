"""Command-line client for the HTTP service, plus an in-process simulator.

Every networked subcommand talks to a running service; `simulate` builds
the whole stack locally and replays a scenario workload in virtual time.
"""

from __future__ import annotations

import json
import os
import sys
from typing import Any

import click
import httpx
import yaml

from .errors import OocranError
from .runner import SimulationRunner
from .scenario import build_orchestrator, load_scenario

DEFAULT_URL = "http://127.0.0.1:8000"


def make_client(url: str, token: str | None) -> httpx.Client:
    headers = {}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    return httpx.Client(base_url=url, headers=headers, timeout=30.0)


def _request(
    ctx: click.Context, method: str, path: str, **kwargs: Any
) -> dict[str, Any] | list[Any]:
    client: httpx.Client = ctx.obj["client"]
    try:
        resp = client.request(method, path, **kwargs)
    except httpx.HTTPError as exc:
        raise click.ClickException(f"service unreachable: {exc}")
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"{resp.status_code}: {detail}")
    return resp.json()


def _emit(ctx: click.Context, doc: Any, text: str) -> None:
    if ctx.obj["json"]:
        click.echo(json.dumps(doc, indent=2, sort_keys=True))
    else:
        click.echo(text)


@click.group()
@click.option("--url", default=None, help="service base URL")
@click.option("--token", default=None, help="bearer token")
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@click.pass_context
def main(ctx: click.Context, url: str | None, token: str | None, as_json: bool) -> None:
    url = url or os.environ.get("OOCRAN_URL", DEFAULT_URL)
    token = token or os.environ.get("OOCRAN_TOKEN")
    ctx.ensure_object(dict)
    ctx.obj["json"] = as_json
    ctx.obj["client"] = make_client(url, token)


@main.command()
@click.option("-f", "--file", "path", required=True, type=click.Path(exists=True))
@click.pass_context
def deploy(ctx: click.Context, path: str) -> None:
    """Create a network service from a descriptor file."""
    with open(path, encoding="utf-8") as fh:
        descriptor = yaml.safe_load(fh)
    doc = _request(ctx, "POST", "/nss", json=descriptor)
    _emit(ctx, doc, f"{doc['id']} {doc['state']}")


@main.command()
@click.argument("ns_id")
@click.pass_context
def delete(ctx: click.Context, ns_id: str) -> None:
    """Tear down a network service."""
    doc = _request(ctx, "DELETE", f"/nss/{ns_id}")
    _emit(ctx, doc, f"{doc['id']} {doc['state']}")


@main.command(name="list")
@click.pass_context
def list_cmd(ctx: click.Context) -> None:
    """List live network services."""
    docs = _request(ctx, "GET", "/nss")
    lines = [f"{d['id']}  {d['state']:<13}  {d['name']}" for d in docs]
    _emit(ctx, docs, "\n".join(lines) if lines else "(none)")


@main.command()
@click.argument("ns_id")
@click.pass_context
def show(ctx: click.Context, ns_id: str) -> None:
    """Show one service with its function instances."""
    doc = _request(ctx, "GET", f"/nss/{ns_id}")
    lines = [f"{doc['id']}  {doc['state']}  {doc['name']}"]
    for v in doc.get("vnfs", []):
        lines.append(
            f"  {v['id']}  {v['state']:<9}  {v['name']}"
            f"  mgmt={v.get('mgmt_ip')}  data={v.get('dataflow_ip')}"
        )
    _emit(ctx, doc, "\n".join(lines))


@main.command()
@click.option("--area", required=True, type=float, help="target area in m^2")
@click.option("--radius", default=30.0, type=float, help="cell radius in m")
@click.option("--bandwidth", default=1.4e6, type=float, help="channel bandwidth in Hz")
@click.option(
    "--model",
    type=click.Choice(["TABLE", "LINEAR"]),
    default=None,
    help="setup-time model override",
)
@click.pass_context
def plan(ctx: click.Context, area: float, radius: float, bandwidth: float, model: str | None) -> None:
    """Preview the cell layout and setup time for a coverage target."""
    body: dict[str, Any] = {
        "name": "plan-preview",
        "target_area_m2": area,
        "cell_radius_m": radius,
        "channel_bandwidth_hz": bandwidth,
    }
    if model:
        body["time_model"] = {"mode": model}
    doc = _request(ctx, "POST", "/vwis/plan", json=body)
    _emit(
        ctx,
        doc,
        f"cells: {doc['n_enodebs']}\n"
        f"covered_area_m2: {doc['covered_area_m2']:.2f}\n"
        f"estimated_setup_s: {doc['estimated_setup_s']:.2f}",
    )


@main.command()
@click.argument("ns_id")
@click.option(
    "--strategy",
    type=click.Choice(["HARD", "SOFT_HANDOVER", "REPOSITORY"]),
    default="SOFT_HANDOVER",
)
@click.option("-f", "--file", "path", type=click.Path(exists=True), default=None)
@click.pass_context
def swap(ctx: click.Context, ns_id: str, strategy: str, path: str | None) -> None:
    """Replace a service with a newly planned one."""
    body: dict[str, Any] = {"strategy": strategy}
    if path:
        with open(path, encoding="utf-8") as fh:
            body["vwi"] = yaml.safe_load(fh)
    doc = _request(ctx, "POST", f"/vwis/{ns_id}/swap", json=body)
    _emit(
        ctx,
        doc,
        f"swapped {doc['old_ns_id']} -> {doc['new_ns_id']}\n"
        f"downtime_s: {doc['downtime_s']:.3f}\n"
        f"peak_resource_overlap: {doc['peak_resource_overlap']}",
    )


@main.command()
@click.argument("vnf_id")
@click.argument("metric")
@click.option("--start", default=0.0, type=float)
@click.option("--end", default=1e12, type=float)
@click.pass_context
def metrics(ctx: click.Context, vnf_id: str, metric: str, start: float, end: float) -> None:
    """Query stored samples for one function and metric."""
    doc = _request(
        ctx,
        "GET",
        "/metrics/query",
        params={"vnf_id": vnf_id, "metric": metric, "start": start, "end": end},
    )
    lines = [f"{s['ts']:.3f}  {s['value']}" for s in doc]
    _emit(ctx, doc, "\n".join(lines) if lines else "(no samples)")


@main.command()
@click.option("-f", "--file", "path", required=True, type=click.Path(exists=True))
@click.option("--until", default=None, type=float, help="run virtual time out to here")
@click.pass_context
def simulate(ctx: click.Context, path: str, until: float | None) -> None:
    """Replay a scenario workload in-process and print the event log."""
    try:
        scn = load_scenario(path)
        engine = build_orchestrator(scn)
        runner = SimulationRunner(engine, scn.get("workload", []))
        log = runner.run(until=until)
    except OocranError as exc:
        raise click.ClickException(str(exc))
    if ctx.obj["json"]:
        for ev in log:
            click.echo(ev.to_json())
    else:
        for ev in log:
            click.echo(
                f"t={ev.ts:10.3f}  {ev.entity_kind:<8} {ev.entity_id:<12} {ev.event}"
            )


@main.command()
@click.option("-f", "--file", "path", type=click.Path(exists=True), default=None)
@click.option("--port", default=None, type=int)
@click.option("--host", default="127.0.0.1")
def serve(path: str | None, port: int | None, host: str) -> None:
    """Run the HTTP service (OOCRAN_PORT, OOCRAN_SECRET, OOCRAN_SCENARIO)."""
    from .api import serve as run_service

    try:
        run_service(scenario_path=path, port=port, host=host)
    except OocranError as exc:
        raise click.ClickException(str(exc))


if __name__ == "__main__":
    main()
