"""Scenario files: declarative wiring for a whole deployment.

A scenario names the simulated hosts and radio heads, the spectrum pool,
alert rules, actuators, the setup-time model, and an optional scripted
workload. Files use YAML with the ``.oocran`` extension.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import yaml

from .engine import EngineConfig, Orchestrator
from .errors import BadConfig
from .events import EventBus
from .model import Actuator, ActuatorAction, Alarm, NSDescriptor
from .monitor import (
    AlertRule,
    Monitor,
    Predicate,
    WebhookDeliverer,
    WebhookEndpoint,
    verify_alert,
)
from .planner import DEFAULT_SETUP_TABLE, TimeModel, TimeModelMode
from .rf import RadioPool
from .vim import Clock, ClockMode, ComputeHost, RRHDevice, VimSim

DEFAULT_SECRET = "oocran-dev-secret"
DEFAULT_ALERT_URL = "http://oocran:8000/alerts/messages"


def default_scenario() -> dict[str, Any]:
    """Two dual-socket compute hosts fronting five radio heads."""
    return {
        "name": "default",
        "clock": "VIRTUAL",
        "hosts": [
            {"id": "host-1", "vcpus": 24, "ram_mb": 65536},
            {"id": "host-2", "vcpus": 24, "ram_mb": 65536},
        ],
        "rrhs": [
            {
                "id": f"rrh-{i}",
                "location": [x, y],
                "max_bandwidth_hz": 20000000.0,
                "max_tx_power_dbm": 30.0,
            }
            for i, (x, y) in enumerate(
                [(0.0, 0.0), (52.0, 0.0), (-52.0, 0.0), (26.0, 45.0), (-26.0, -45.0)],
                start=1,
            )
        ],
        "spectrum": {
            "f_start_hz": 2600000000.0,
            "f_end_hz": 2620000000.0,
            "reuse_distance_m": 60.0,
        },
        "engine": {
            "max_ns": 32,
            "max_vnfs_per_ns": 64,
            "cell_radius_m": 30.0,
            "min_swap_interval_s": 0.0,
        },
        "time_model": {
            "mode": "TABLE",
            "table": [[n, t] for n, t in DEFAULT_SETUP_TABLE],
        },
        "rules": [],
        "actuators": [],
        "webhook": {"url": DEFAULT_ALERT_URL, "secret": DEFAULT_SECRET},
        "workload": [],
    }


def load_scenario(path: str | Path) -> dict[str, Any]:
    p = Path(path)
    if not p.exists():
        raise BadConfig(f"scenario file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise BadConfig(f"scenario file is not valid YAML: {exc}") from exc
    if not isinstance(raw, Mapping):
        raise BadConfig("scenario file must hold a mapping at top level")
    scn = default_scenario()
    scn.update(raw)
    _check_scenario(scn)
    return scn


def dump_scenario(scn: Mapping[str, Any], path: str | Path) -> None:
    Path(path).write_text(
        yaml.safe_dump(dict(scn), sort_keys=False), encoding="utf-8"
    )


def _check_scenario(scn: Mapping[str, Any]) -> None:
    if scn.get("clock") not in ("VIRTUAL", "REALTIME"):
        raise BadConfig(f"clock must be VIRTUAL or REALTIME, got {scn.get('clock')!r}")
    hosts = scn.get("hosts") or []
    if not hosts:
        raise BadConfig("scenario needs at least one compute host")
    for h in hosts:
        if int(h.get("vcpus", 0)) <= 0 or int(h.get("ram_mb", 0)) <= 0:
            raise BadConfig(f"host {h.get('id')!r} needs positive vcpus and ram_mb")
    spectrum = scn.get("spectrum") or {}
    if float(spectrum.get("f_start_hz", 0)) >= float(spectrum.get("f_end_hz", 0)):
        raise BadConfig("spectrum needs f_start_hz < f_end_hz")
    tm = scn.get("time_model") or {}
    if tm.get("mode") not in ("TABLE", "LINEAR"):
        raise BadConfig("time_model.mode must be TABLE or LINEAR")


def load_descriptor(source: str | Path | Mapping[str, Any]) -> NSDescriptor:
    """Service descriptor from a YAML file or an already-parsed mapping."""
    if isinstance(source, Mapping):
        return NSDescriptor.from_dict(source)
    p = Path(source)
    if not p.exists():
        raise BadConfig(f"descriptor file not found: {p}")
    raw = yaml.safe_load(p.read_text(encoding="utf-8"))
    if not isinstance(raw, Mapping):
        raise BadConfig("descriptor file must hold a mapping at top level")
    return NSDescriptor.from_dict(raw)


def build_time_model(spec: Mapping[str, Any]) -> TimeModel:
    mode = TimeModelMode(spec.get("mode", "TABLE"))
    table = tuple(
        (int(n), float(t)) for n, t in spec.get("table", DEFAULT_SETUP_TABLE)
    )
    if mode is TimeModelMode.TABLE:
        return TimeModel.from_table(table)
    return TimeModel.fit_linear(table)


def loopback_transport(engine: Orchestrator, secret: str):
    """In-process stand-in for the alert callback endpoint.

    Applies the same checks the HTTP endpoint would: the signature must
    verify against the shared secret before the alarm is handled.
    """

    def transport(url: str, body: dict[str, Any]) -> tuple[int, Mapping[str, Any]]:
        signature = body.get("signature", "")
        if not verify_alert(body, signature, secret):
            return 401, {"detail": "bad signature"}
        alarm = Alarm(
            alarm_id=str(body["alarm_id"]),
            rule_id=str(body.get("rule_id", "")),
            vnf_id=str(body["vnf_id"]),
            fired_at=float(body["fired_at"]),
            payload=dict(body.get("payload", {})),
        )
        try:
            result = engine.handle_alert(alarm)
        except Exception as exc:
            return 422, {"detail": str(exc)}
        return 200, dict(result)

    return transport


def build_orchestrator(
    scn: Mapping[str, Any] | None = None, bus: EventBus | None = None
) -> Orchestrator:
    """Wire a full system from a scenario mapping.

    Alert delivery is closed through an in-process signed loopback unless
    the caller swaps the deliverer afterwards (the HTTP service does).
    """
    scn = dict(scn) if scn is not None else default_scenario()
    base = default_scenario()
    for key, value in base.items():
        scn.setdefault(key, value)
    _check_scenario(scn)

    clock = Clock(ClockMode(scn["clock"]))
    hosts = [
        ComputeHost(
            id=str(h["id"]),
            vcpus_total=int(h["vcpus"]),
            ram_mb_total=int(h["ram_mb"]),
        )
        for h in scn["hosts"]
    ]
    rrhs = [
        RRHDevice(
            id=str(r["id"]),
            location=(float(r["location"][0]), float(r["location"][1])),
            max_bandwidth_hz=float(r["max_bandwidth_hz"]),
            max_tx_power_dbm=float(r["max_tx_power_dbm"]),
        )
        for r in scn.get("rrhs", [])
    ]
    vim = VimSim(hosts=hosts, rrhs=rrhs, clock=clock)
    spectrum = scn["spectrum"]
    pool = RadioPool(
        f_start_hz=float(spectrum["f_start_hz"]),
        f_end_hz=float(spectrum["f_end_hz"]),
        reuse_distance_m=float(spectrum.get("reuse_distance_m", 60.0)),
        rrh_limits=[
            (r.location[0], r.location[1], r.max_tx_power_dbm) for r in rrhs
        ],
    )
    monitor = Monitor()
    for spec in scn.get("rules", []):
        monitor.add_rule(
            AlertRule(
                rule_id=str(spec["rule_id"]),
                metric=str(spec["metric"]),
                predicate=Predicate(spec.get("predicate", "GT")),
                threshold=float(spec["threshold"]),
                consecutive=int(spec.get("consecutive", 1)),
                alarm_id=str(spec["alarm_id"]),
            )
        )
    eng_spec = scn.get("engine", {})
    config = EngineConfig(
        max_ns=int(eng_spec.get("max_ns", 32)),
        max_vnfs_per_ns=int(eng_spec.get("max_vnfs_per_ns", 64)),
        cell_radius_m=float(eng_spec.get("cell_radius_m", 30.0)),
        min_swap_interval_s=float(eng_spec.get("min_swap_interval_s", 0.0)),
    )
    engine = Orchestrator(
        vim=vim,
        pool=pool,
        monitor=monitor,
        bus=bus or EventBus(),
        config=config,
        time_model=build_time_model(scn["time_model"]),
    )
    for spec in scn.get("actuators", []):
        engine.register_actuator(
            Actuator(
                name=str(spec["name"]),
                action=ActuatorAction(spec["action"]),
                parameters=dict(spec.get("parameters", {})),
            )
        )
    webhook = scn.get("webhook") or {}
    endpoint = WebhookEndpoint(
        url=str(webhook.get("url", DEFAULT_ALERT_URL)),
        secret=str(webhook.get("secret", DEFAULT_SECRET)),
    )
    engine.deliverer = WebhookDeliverer(
        endpoint,
        transport=loopback_transport(engine, endpoint.secret),
        backoff_s=0.0,
    )
    return engine
