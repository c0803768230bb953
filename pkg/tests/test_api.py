import pytest
from fastapi.testclient import TestClient

from oocran.api import create_app
from oocran.model import Actuator, ActuatorAction, ActuatorBinding
from oocran.monitor import canonical_alert_body, sign_alert
from oocran.scenario import DEFAULT_SECRET, build_orchestrator

from conftest import relaxed_scenario, small_descriptor


def make_api(tokens=None, scenario=None, with_actuator=False):
    scn = scenario or relaxed_scenario()
    engine = build_orchestrator(scn)
    if with_actuator:
        engine.register_actuator(
            Actuator(name="relief", action=ActuatorAction.SCALE_OUT,
                     parameters={"role": "ENODEB_TX", "step": 1})
        )
    app = create_app(engine=engine, scenario=scn, tokens=tokens, autopilot=False)
    # plain construction (no `with`) skips startup hooks: no pump thread
    client = TestClient(app, base_url="http://api")
    return engine, app, client


@pytest.fixture
def api():
    engine, app, client = make_api()
    yield engine, app, client
    client.close()


def deploy(engine, client, descriptor=None):
    body = (descriptor or small_descriptor()).to_dict()
    resp = client.post("/nss", json=body)
    assert resp.status_code == 202
    engine.run_until_settled()
    return resp.json()["id"]


def test_service_lifecycle_over_http(api):
    engine, _, client = api
    assert client.get("/nss").json() == []
    resp = client.post("/nss", json=small_descriptor().to_dict())
    assert resp.status_code == 202
    ns_id = resp.json()["id"]
    assert resp.json()["state"] == "DEPLOYING"
    engine.run_until_settled()
    doc = client.get(f"/nss/{ns_id}").json()
    assert doc["state"] == "ACTIVE"
    assert len(doc["vnfs"]) == 2
    assert all(v["mgmt_ip"] for v in doc["vnfs"])
    resp = client.delete(f"/nss/{ns_id}")
    assert resp.status_code == 202
    engine.run_until_settled()
    assert client.get(f"/nss/{ns_id}").json()["state"] == "TERMINATED"
    assert client.get("/nss").json() == []  # listing hides terminated services


def test_invalid_descriptor_maps_to_422(api):
    _, _, client = api
    bad = small_descriptor().to_dict()
    bad["networks"] = []
    resp = client.post("/nss", json=bad)
    assert resp.status_code == 422
    assert any("MANAGEMENT" in line for line in resp.json()["errors"])


def test_unknown_service_maps_to_404(api):
    _, _, client = api
    assert client.get("/nss/ns-999999").status_code == 404
    assert client.delete("/nss/ns-999999").status_code == 404


def test_premature_delete_maps_to_409(api):
    engine, _, client = api
    resp = client.post("/nss", json=small_descriptor().to_dict())
    ns_id = resp.json()["id"]  # still DEPLOYING: no rest state yet
    assert client.delete(f"/nss/{ns_id}").status_code == 409


def test_patch_reconfigures_or_rejects(api):
    engine, _, client = api
    ns_id = deploy(engine, client)
    resp = client.patch(f"/nss/{ns_id}", json={"scale": {"role": "ENODEB_TX", "count": 2}})
    assert resp.status_code == 200
    engine.run_until_settled()
    assert len(client.get(f"/nss/{ns_id}").json()["vnfs"]) == 3
    resp = client.patch(f"/nss/{ns_id}", json={"networks": []})
    assert resp.status_code == 422


def test_idempotency_key_replays_the_first_answer(api):
    engine, _, client = api
    body = small_descriptor().to_dict()
    first = client.post("/nss", json=body, headers={"Idempotency-Key": "k-1"})
    second = client.post("/nss", json=body, headers={"Idempotency-Key": "k-1"})
    assert first.status_code == second.status_code == 202
    assert first.json() == second.json()
    engine.run_until_settled()
    assert len(client.get("/nss").json()) == 1


def test_distinct_idempotency_keys_create_distinct_services(api):
    engine, _, client = api
    body = small_descriptor().to_dict()
    a = client.post("/nss", json=body, headers={"Idempotency-Key": "k-1"})
    body2 = small_descriptor(mgmt_cidr="192.168.4.0/24", data_cidr="192.168.5.0/24").to_dict()
    b = client.post("/nss", json=body2, headers={"Idempotency-Key": "k-2"})
    assert a.json()["id"] != b.json()["id"]
    engine.run_until_settled()
    assert len(client.get("/nss").json()) == 2


def test_idempotency_cache_is_scoped_per_path(api):
    engine, _, client = api
    create = client.post("/nss", json=small_descriptor().to_dict(),
                         headers={"Idempotency-Key": "shared"})
    assert create.status_code == 202
    actuator = client.post("/actuators",
                           json={"name": "relief", "action": "NOOP"},
                           headers={"Idempotency-Key": "shared"})
    assert actuator.status_code == 201  # not a replay of the other endpoint


TOKENS = {"WIP": "tok-wip", "WSP": "tok-wsp", "WTP": "tok-wtp"}


def auth(role):
    return {"Authorization": f"Bearer {TOKENS[role]}"}


def test_bearer_roles_gate_reads_and_writes():
    engine, _, client = make_api(tokens=TOKENS)
    assert client.get("/nss").status_code == 401
    assert client.get("/nss", headers={"Authorization": "Bearer wrong"}).status_code == 401
    assert client.get("/nss", headers=auth("WTP")).status_code == 200
    body = small_descriptor().to_dict()
    assert client.post("/nss", json=body, headers=auth("WTP")).status_code == 403
    assert client.post("/nss", json=body, headers=auth("WSP")).status_code == 202
    engine.run_until_settled()
    ns_id = client.get("/nss", headers=auth("WTP")).json()[0]["id"]
    assert client.delete(f"/nss/{ns_id}", headers=auth("WIP")).status_code == 202
    client.close()


def test_metrics_ingest_query_and_stale_rejection(api):
    engine, _, client = api
    ns_id = deploy(engine, client)
    vnf_id = client.get(f"/nss/{ns_id}").json()["vnfs"][0]["id"]
    for ts, value in [(1.0, 10.0), (2.0, 20.0)]:
        resp = client.post("/metrics", json={"vnf_id": vnf_id, "metric": "cpu_load",
                                             "value": value, "ts": ts})
        assert resp.status_code == 202
    stale = client.post("/metrics", json={"vnf_id": vnf_id, "metric": "cpu_load",
                                          "value": 5.0, "ts": 0.5})
    assert stale.status_code == 422
    got = client.get("/metrics/query", params={"vnf_id": vnf_id, "metric": "cpu_load",
                                               "start": 0.0, "end": 10.0}).json()
    assert [s["value"] for s in got] == [10.0, 20.0]
    bad = client.get("/metrics/query", params={"vnf_id": vnf_id, "metric": "cpu_load",
                                               "start": 9.0, "end": 1.0})
    assert bad.status_code == 422


def signed_alert_body(vnf_id, secret=DEFAULT_SECRET, fired_at=1.0):
    from oocran.model import Alarm

    alarm = Alarm(alarm_id="overload", rule_id="rule-cpu", vnf_id=vnf_id,
                  fired_at=fired_at, payload={"metric": "cpu_load"})
    body = canonical_alert_body(alarm)
    body["signature"] = sign_alert(body, secret)
    return body


def bound_service():
    return small_descriptor(bindings=(ActuatorBinding("overload", "relief"),))


def test_alert_callback_verifies_signature():
    engine, _, client = make_api(with_actuator=True)
    ns_id = deploy(engine, client, bound_service())
    vnf_id = next(v["id"] for v in client.get(f"/nss/{ns_id}").json()["vnfs"]
                  if v["role"] == "ENODEB_TX")
    body = signed_alert_body(vnf_id)
    resp = client.post("/alerts/messages", json=body)
    assert resp.status_code == 200
    assert resp.json()["status"] == "accepted"
    replay = client.post("/alerts/messages", json=body)
    assert replay.json()["status"] == "duplicate"
    engine.run_until_settled()
    cells = [v for v in client.get(f"/nss/{ns_id}").json()["vnfs"]
             if v["role"] == "ENODEB_TX"]
    assert len(cells) == 2
    client.close()


def test_alert_callback_rejects_bad_signature():
    engine, _, client = make_api(with_actuator=True)
    ns_id = deploy(engine, client, bound_service())
    vnf_id = client.get(f"/nss/{ns_id}").json()["vnfs"][0]["id"]
    body = signed_alert_body(vnf_id)
    body["signature"] = "0" * 64
    assert client.post("/alerts/messages", json=body).status_code == 401
    tampered = signed_alert_body(vnf_id)
    tampered["fired_at"] = 999.0
    assert client.post("/alerts/messages", json=tampered).status_code == 401
    client.close()


def test_actuator_registration_listing_and_run():
    engine, _, client = make_api(with_actuator=True)
    ns_id = deploy(engine, client, bound_service())
    listed = client.get("/actuators").json()
    assert [a["name"] for a in listed] == ["relief"]
    duplicate = client.post("/actuators", json={"name": "relief", "action": "NOOP"})
    assert duplicate.status_code == 409
    run = client.post(f"/nss/{ns_id}/actuators/overload/run")
    assert run.status_code == 202
    engine.run_until_settled()
    assert len(client.get(f"/nss/{ns_id}").json()["vnfs"]) == 3
    missing = client.post(f"/nss/{ns_id}/actuators/no-such/run")
    assert missing.status_code == 404
    client.close()


def test_plan_endpoint_expands_and_previews(api):
    _, _, client = api
    doc = client.post("/vwis/plan", json={"name": "campus",
                                          "target_area_m2": 58241.0}).json()
    assert doc["n_enodebs"] == 21
    assert doc["estimated_setup_s"] == pytest.approx(62.634, abs=1e-9)
    assert len(doc["descriptor"]["vnfs"]) == 21
    linear = client.post("/vwis/plan", json={
        "name": "campus", "target_area_m2": 58241.0,
        "time_model": {"mode": "LINEAR"},
    }).json()
    assert linear["estimated_setup_s"] == pytest.approx(65.51255587599135, abs=1e-6)
    preview = client.post("/vwis/plan", json={
        "name": "campus", "target_area_m2": 58241.0, "strategy": "HARD",
    }).json()["swap_preview"]
    assert preview["downtime_s"] == pytest.approx(62.634, abs=1e-9)


def test_swap_endpoint_reports_costs(api):
    engine, _, client = api
    from oocran.planner import VWIDescriptor

    old, _ = engine.deploy_vwi(VWIDescriptor(name="island", target_area_m2=2826.0),
                               settle=True)
    resp = client.post(f"/vwis/{old.id}/swap", json={
        "strategy": "SOFT_HANDOVER",
        "vwi": {"name": "wider", "target_area_m2": 14130.0},
    })
    assert resp.status_code == 200
    report = resp.json()
    assert report["downtime_s"] == 0.0
    assert report["peak_resource_overlap"] == 6
    assert client.post("/vwis/ns-999999/swap", json={"strategy": "HARD"}).status_code == 404


def test_repository_endpoint_stores_descriptors(api):
    engine, _, client = api
    resp = client.post("/vwis/repository", json={"name": "lean",
                                                 "target_area_m2": 2826.0})
    assert resp.status_code == 201
    assert resp.json() == {"stored": "lean", "size": 1}
    assert len(engine.repository) == 1


def test_infrastructure_snapshot_over_http(api):
    engine, _, client = api
    doc = client.get("/infrastructure").json()
    assert [h["id"] for h in doc["vim"]["hosts"]] == ["host-1", "host-2"]
    assert doc["clock"] == {"mode": "VIRTUAL", "now": 0.0}
    assert doc["tasks_pending"] == 0
    assert doc["pool"]["slices"] == []


def test_tasks_endpoint_filters_by_service(api):
    engine, _, client = api
    ns_id = deploy(engine, client)
    all_tasks = client.get("/tasks").json()
    mine = client.get("/tasks", params={"ns_id": ns_id}).json()
    assert mine == all_tasks  # only one service exists
    assert {t["state"] for t in mine} == {"DONE"}
    assert client.get("/tasks", params={"ns_id": "ns-999999"}).json() == []


def test_event_stream_replays_recent_history(api):
    engine, app, client = api
    deploy(engine, client)
    app.state.stop.set()  # finite stream: replay only, no live tail
    resp = client.get("/events", params={"replay": 4})
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("text/event-stream")
    frames = [line for line in resp.text.splitlines() if line.startswith("data: ")]
    assert len(frames) == 4
    import json

    events = [json.loads(f[len("data: "):]) for f in frames]
    assert events[-1]["event"] == "ACTIVE"
