import json

import httpx
import pytest
import yaml
from click.testing import CliRunner
from fastapi.testclient import TestClient

from oocran import cli
from oocran.api import create_app
from oocran.monitor import MetricSample
from oocran.planner import VWIDescriptor
from oocran.scenario import build_orchestrator

from conftest import relaxed_scenario, small_descriptor


@pytest.fixture
def stack(monkeypatch):
    """CLI wired to an in-process service; returns (runner, engine)."""
    scn = relaxed_scenario()
    engine = build_orchestrator(scn)
    app = create_app(engine=engine, scenario=scn, autopilot=False)
    client = TestClient(app, base_url="http://cli")
    monkeypatch.setattr(cli, "make_client", lambda url, token: client)
    yield CliRunner(), engine
    client.close()


def descriptor_file(tmp_path, **kwargs):
    path = tmp_path / "svc.yaml"
    path.write_text(yaml.safe_dump(small_descriptor(**kwargs).to_dict()))
    return str(path)


def test_deploy_list_show_delete_round_trip(stack, tmp_path):
    runner, engine = stack
    result = runner.invoke(cli.main, ["deploy", "-f", descriptor_file(tmp_path)])
    assert result.exit_code == 0, result.output
    assert result.output.strip() == "ns-000001 DEPLOYING"
    engine.run_until_settled()

    listed = runner.invoke(cli.main, ["list"])
    assert listed.output.strip() == f"ns-000001  {'ACTIVE':<13}  svc"

    shown = runner.invoke(cli.main, ["show", "ns-000001"])
    lines = shown.output.splitlines()
    assert lines[0] == "ns-000001  ACTIVE  svc"
    assert len(lines) == 3
    assert all("mgmt=192.168.0." in line for line in lines[1:])

    deleted = runner.invoke(cli.main, ["delete", "ns-000001"])
    assert deleted.output.strip() == "ns-000001 TERMINATING"
    engine.run_until_settled()
    assert runner.invoke(cli.main, ["list"]).output.strip() == "(none)"


def test_list_supports_json_output(stack, tmp_path):
    runner, engine = stack
    runner.invoke(cli.main, ["deploy", "-f", descriptor_file(tmp_path)])
    engine.run_until_settled()
    result = runner.invoke(cli.main, ["--json", "list"])
    docs = json.loads(result.output)
    assert [d["state"] for d in docs] == ["ACTIVE"]


def test_plan_prints_layout_and_estimate(stack):
    runner, _ = stack
    result = runner.invoke(cli.main, ["plan", "--area", "58241"])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines() == [
        "cells: 21",
        "covered_area_m2: 59376.10",
        "estimated_setup_s: 62.63",
    ]
    linear = runner.invoke(cli.main, ["plan", "--area", "58241", "--model", "LINEAR"])
    assert linear.output.splitlines()[2] == "estimated_setup_s: 65.51"


def test_swap_prints_replacement_and_costs(stack, tmp_path):
    runner, engine = stack
    old, _ = engine.deploy_vwi(VWIDescriptor(name="island", target_area_m2=2826.0),
                               settle=True)
    vwi = tmp_path / "wider.yaml"
    vwi.write_text(yaml.safe_dump({"name": "wider", "target_area_m2": 14130.0}))
    result = runner.invoke(cli.main, ["swap", old.id, "-f", str(vwi)])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines() == [
        f"swapped {old.id} -> ns-000002",
        "downtime_s: 0.000",
        "peak_resource_overlap: 6",
    ]


def test_metrics_query_formats_samples(stack, tmp_path):
    runner, engine = stack
    runner.invoke(cli.main, ["deploy", "-f", descriptor_file(tmp_path)])
    engine.run_until_settled()
    vnf_id = engine.vnf_instances("ns-000001")[0].id
    for ts, value in [(1.0, 10.0), (2.5, 42.5)]:
        engine.ingest_metric(MetricSample(vnf_id=vnf_id, metric="cpu_load",
                                          value=value, ts=ts))
    result = runner.invoke(cli.main, ["metrics", vnf_id, "cpu_load"])
    assert result.output.splitlines() == ["1.000  10.0", "2.500  42.5"]
    empty = runner.invoke(cli.main, ["metrics", vnf_id, "tx_rate"])
    assert empty.output.strip() == "(no samples)"


def test_http_errors_become_clean_failures(stack):
    runner, _ = stack
    result = runner.invoke(cli.main, ["show", "ns-999999"])
    assert result.exit_code == 1
    assert result.output.startswith("Error: 404:")


def test_unreachable_service_is_reported(monkeypatch):
    def handler(request):
        raise httpx.ConnectError("refused")

    broken = httpx.Client(transport=httpx.MockTransport(handler),
                          base_url="http://down")
    monkeypatch.setattr(cli, "make_client", lambda url, token: broken)
    result = CliRunner().invoke(cli.main, ["list"])
    assert result.exit_code == 1
    assert "service unreachable" in result.output


def scenario_file(tmp_path):
    scn = relaxed_scenario(workload=[
        {"action": "deploy_vwi", "at": 0.0,
         "vwi": {"name": "island", "target_area_m2": 2826.0}},
    ])
    path = tmp_path / "run.oocran"
    path.write_text(yaml.safe_dump(scn))
    return str(path)


def test_simulate_replays_a_workload_locally(tmp_path):
    result = CliRunner().invoke(cli.main, ["simulate", "-f", scenario_file(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "t=    30.120" in result.output
    assert "ACTIVE" in result.output


def test_simulate_json_emits_one_event_per_line(tmp_path):
    result = CliRunner().invoke(
        cli.main, ["--json", "simulate", "-f", scenario_file(tmp_path)]
    )
    events = [json.loads(line) for line in result.output.splitlines()]
    assert events[-1]["event"] == "ACTIVE"
    assert events[-1]["ts"] == pytest.approx(30.12, abs=1e-9)


def test_simulate_rejects_broken_scenarios(tmp_path):
    path = tmp_path / "bad.oocran"
    path.write_text(yaml.safe_dump(relaxed_scenario(clock="REALTIME")))
    result = CliRunner().invoke(cli.main, ["simulate", "-f", str(path)])
    assert result.exit_code == 1
    assert "Error:" in result.output
