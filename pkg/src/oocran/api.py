"""REST gateway and event stream over the orchestration engine.

Bodies mirror the descriptor and type field names one to one, so clients
can round-trip documents without translation. Every mutating endpoint
honors an Idempotency-Key header; the alert callback authenticates by
signature instead of bearer token.
"""

from __future__ import annotations

import json
import os
import queue
import threading
from typing import Any, Mapping

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .engine import Orchestrator
from .errors import (
    BadConfig,
    CapacityExhausted,
    DuplicateActuator,
    EmptyRepository,
    IllegalTransition,
    ImmutableField,
    InsufficientCapacity,
    InvalidCidr,
    NSNotActive,
    OocranError,
    PortInUse,
    QuotaExceeded,
    SpectrumExhausted,
    StaleSample,
    SwapThrottled,
    UnknownActuator,
    UnknownAlarm,
    UnknownNS,
    UnknownTask,
    ValidationFailed,
)
from .model import Actuator, ActuatorAction, Alarm, NSDescriptor
from .monitor import MetricSample, verify_alert
from .planner import SwapStrategy, VWIDescriptor, plan_vwi, predict_swap
from .scenario import DEFAULT_SECRET, default_scenario, load_scenario, build_orchestrator
from .vim import ClockMode

READ_ROLES = frozenset({"WIP", "WSP", "WTP"})
WRITE_ROLES = frozenset({"WIP", "WSP"})

_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (ValidationFailed, 422),
    (ImmutableField, 422),
    (InvalidCidr, 422),
    (StaleSample, 422),
    (UnknownNS, 404),
    (UnknownTask, 404),
    (UnknownAlarm, 404),
    (UnknownActuator, 404),
    (EmptyRepository, 404),
    (IllegalTransition, 409),
    (NSNotActive, 409),
    (SwapThrottled, 429),
    (DuplicateActuator, 409),
    (QuotaExceeded, 409),
    (CapacityExhausted, 409),
    (InsufficientCapacity, 409),
    (SpectrumExhausted, 409),
    (BadConfig, 400),
]


def _status_for(exc: OocranError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 409


class _IdempotencyCache:
    def __init__(self) -> None:
        self._seen: dict[tuple[str, str, str], tuple[int, Any]] = {}
        self._lock = threading.Lock()

    def get(self, method: str, path: str, key: str) -> tuple[int, Any] | None:
        with self._lock:
            return self._seen.get((method, path, key))

    def put(self, method: str, path: str, key: str, status: int, body: Any) -> None:
        with self._lock:
            self._seen[(method, path, key)] = (status, body)


def create_app(
    engine: Orchestrator | None = None,
    scenario: Mapping[str, Any] | None = None,
    tokens: Mapping[str, str] | None = None,
    alert_secret: str | None = None,
    autopilot: bool = True,
) -> FastAPI:
    """Build the service. ``tokens`` maps role (WIP/WSP/WTP) to its bearer
    token; with no tokens the API is open. A VIRTUAL-clock engine is driven
    by a background autopilot so deployments finish on their own.
    """
    scn = dict(scenario) if scenario is not None else default_scenario()
    if engine is None:
        engine = build_orchestrator(scn)
    if tokens is None:
        tokens = dict(scn.get("tokens", {}))
    secret = alert_secret or str((scn.get("webhook") or {}).get("secret", DEFAULT_SECRET))

    app = FastAPI(title="oocran", docs_url=None, redoc_url=None, openapi_url=None)
    # the dashboard is served from its own origin; auth still rides in headers
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.engine = engine
    app.state.tokens = dict(tokens)
    app.state.alert_secret = secret
    app.state.idempotency = _IdempotencyCache()
    app.state.stop = threading.Event()

    def _role_of(request: Request) -> str | None:
        if not app.state.tokens:
            return "WIP"  # open mode acts as the most privileged role
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            return None
        token = header[7:].strip()
        for role, expected in app.state.tokens.items():
            if token == expected:
                return role
        return None

    def _authorize(request: Request, write: bool) -> JSONResponse | None:
        role = _role_of(request)
        if role is None:
            return JSONResponse({"detail": "missing or invalid token"}, status_code=401)
        allowed = WRITE_ROLES if write else READ_ROLES
        if role not in allowed:
            return JSONResponse({"detail": f"role {role} may not do this"}, status_code=403)
        return None

    def _fail(exc: Exception) -> JSONResponse:
        if isinstance(exc, ValidationFailed):
            return JSONResponse(
                {"detail": "descriptor invalid", "errors": exc.report},
                status_code=422,
            )
        if isinstance(exc, OocranError):
            return JSONResponse({"detail": str(exc)}, status_code=_status_for(exc))
        raise exc

    def _mutate(request: Request, runner, status: int = 200):
        """Shared mutation path: auth, idempotent replay, error mapping."""
        denied = _authorize(request, write=True)
        if denied is not None:
            return denied
        key = request.headers.get("idempotency-key")
        if key:
            hit = app.state.idempotency.get(request.method, request.url.path, key)
            if hit is not None:
                return JSONResponse(hit[1], status_code=hit[0])
        try:
            body = runner()
        except Exception as exc:
            return _fail(exc)
        if key:
            app.state.idempotency.put(request.method, request.url.path, key, status, body)
        return JSONResponse(body, status_code=status)

    # -- services ---------------------------------------------------------

    @app.get("/nss")
    def list_nss(request: Request):
        denied = _authorize(request, write=False)
        if denied is not None:
            return denied
        return [ns.to_dict() for ns in engine.list_ns(include_terminated=False)]

    @app.post("/nss")
    async def create_ns(request: Request):
        payload = await request.json()
        def run():
            descriptor = NSDescriptor.from_dict(payload)
            ns = engine.create_ns(descriptor)
            return {"id": ns.id, "state": ns.state.value}
        return _mutate(request, run, status=202)

    @app.get("/nss/{ns_id}")
    def get_ns(ns_id: str, request: Request):
        denied = _authorize(request, write=False)
        if denied is not None:
            return denied
        try:
            ns = engine.get_ns(ns_id)
        except OocranError as exc:
            return _fail(exc)
        doc = ns.to_dict()
        doc["vnfs"] = [inst.to_dict() for inst in engine.vnf_instances(ns_id)]
        return doc

    @app.delete("/nss/{ns_id}")
    def delete_ns(ns_id: str, request: Request):
        def run():
            engine.delete_ns(ns_id)
            return {"id": ns_id, "state": engine.get_ns(ns_id).state.value}
        return _mutate(request, run, status=202)

    @app.patch("/nss/{ns_id}")
    async def patch_ns(ns_id: str, request: Request):
        payload = await request.json()
        def run():
            ns = engine.reconfigure_ns(ns_id, payload)
            return ns.to_dict()
        return _mutate(request, run)

    # -- actuators ----------------------------------------------------------

    @app.post("/actuators")
    async def register_actuator(request: Request):
        payload = await request.json()
        def run():
            actuator = Actuator(
                name=str(payload["name"]),
                action=ActuatorAction(payload["action"]),
                parameters=dict(payload.get("parameters", {})),
            )
            engine.register_actuator(actuator)
            return {"name": actuator.name, "action": actuator.action.value}
        return _mutate(request, run, status=201)

    @app.get("/actuators")
    def list_actuators(request: Request):
        denied = _authorize(request, write=False)
        if denied is not None:
            return denied
        return [
            {"name": a.name, "action": a.action.value, "parameters": dict(a.parameters)}
            for a in engine.actuators()
        ]

    @app.post("/nss/{ns_id}/actuators/{alarm_id}/run")
    def run_actuator(ns_id: str, alarm_id: str, request: Request):
        def run():
            task_ids = engine.execute_actuator(alarm_id, ns_id)
            return {"tasks": task_ids}
        return _mutate(request, run, status=202)

    # -- metrics and alerts ------------------------------------------------

    @app.post("/metrics")
    async def post_metric(request: Request):
        payload = await request.json()
        def run():
            sample = MetricSample(
                vnf_id=str(payload["vnf_id"]),
                metric=str(payload["metric"]),
                value=float(payload["value"]),
                ts=float(payload.get("ts", engine.now)),
            )
            alarms = engine.ingest_metric(sample)
            return {"accepted": True, "alarms_fired": len(alarms)}
        return _mutate(request, run, status=202)

    @app.get("/metrics/query")
    def metrics_query(
        request: Request, vnf_id: str, metric: str, start: float, end: float
    ):
        denied = _authorize(request, write=False)
        if denied is not None:
            return denied
        try:
            samples = engine.monitor.query(vnf_id, metric, start, end)
        except ValueError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        return [s.to_dict() for s in samples]

    @app.post("/alerts/messages")
    async def alert_callback(request: Request):
        body = await request.json()
        signature = str(body.get("signature", ""))
        if not verify_alert(body, signature, app.state.alert_secret):
            return JSONResponse({"detail": "bad signature"}, status_code=401)
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
            return _fail(exc)
        return JSONResponse(dict(result))

    # -- planning and swaps -----------------------------------------------

    @app.post("/vwis/plan")
    async def vwi_plan(request: Request):
        payload = await request.json()
        denied = _authorize(request, write=False)
        if denied is not None:
            return denied
        try:
            tm = engine.time_model
            if "time_model" in payload:
                from .scenario import build_time_model

                spec = dict(payload["time_model"])
                spec.setdefault("table", [list(a) for a in tm.table])
                tm = build_time_model(spec)
            vwi = VWIDescriptor.from_dict(payload)
            plan = plan_vwi(vwi, tm)
            doc = plan.to_dict()
            doc["descriptor"] = engine.vwi_to_ns_descriptor(vwi, plan).to_dict()
            strategy = payload.get("strategy")
            if strategy:
                old_count = 0
                old_ns_id = payload.get("old_ns_id")
                if old_ns_id:
                    old_count = len(engine.get_ns(str(old_ns_id)).vnf_instances)
                preview = predict_swap(old_count, plan, SwapStrategy(strategy), tm)
                doc["swap_preview"] = preview.to_dict()
            return JSONResponse(doc)
        except Exception as exc:
            return _fail(exc)

    @app.post("/vwis/{ns_id}/swap")
    async def vwi_swap(ns_id: str, request: Request):
        payload = await request.json()
        def run():
            report = engine.swap_vwi(
                ns_id,
                SwapStrategy(payload.get("strategy", "SOFT_HANDOVER")),
                vwi=(
                    VWIDescriptor.from_dict(payload["vwi"])
                    if "vwi" in payload
                    else None
                ),
                profile=payload.get("profile"),
            )
            return report.to_dict()
        return _mutate(request, run)

    @app.post("/vwis/repository")
    async def repository_put(request: Request):
        payload = await request.json()
        def run():
            vwi = VWIDescriptor.from_dict(payload)
            engine.repository.put(vwi)
            return {"stored": vwi.name, "size": len(engine.repository)}
        return _mutate(request, run, status=201)

    # -- infrastructure and events -----------------------------------------

    @app.get("/infrastructure")
    def infrastructure(request: Request):
        denied = _authorize(request, write=False)
        if denied is not None:
            return denied
        doc = engine.snapshot()
        doc["clock"] = {"mode": engine.vim.clock.mode.value, "now": engine.now}
        doc["tasks_pending"] = engine.queue.pending_count()
        return doc

    @app.get("/tasks")
    def tasks(request: Request, ns_id: str | None = None):
        denied = _authorize(request, write=False)
        if denied is not None:
            return denied
        return [t.to_dict() for t in engine.queue.tasks(ns_id)]

    @app.get("/events")
    def events(request: Request, replay: int = 0):
        denied = _authorize(request, write=False)
        if denied is not None:
            return denied

        def stream():
            q = engine.bus.subscribe()
            try:
                if replay > 0:
                    for ev in engine.bus.log()[-replay:]:
                        yield f"data: {ev.to_json()}\n\n"
                while not app.state.stop.is_set():
                    try:
                        ev = q.get(timeout=5.0)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    yield f"data: {ev.to_json()}\n\n"
            finally:
                engine.bus.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    # -- autopilot ----------------------------------------------------------

    def _autopilot() -> None:
        # drives queued work; in VIRTUAL mode it also hops the clock to the
        # next boot deadline so services reach ACTIVE without an operator
        stop = app.state.stop
        while not stop.wait(0.005):
            try:
                engine.pump()
                if engine.vim.clock.mode is ClockMode.VIRTUAL:
                    if engine.queue.pending_count() == 0:
                        deadline = engine.vim.next_boot_deadline()
                        if deadline is not None:
                            engine.advance_to(deadline)
            except Exception:
                continue  # an unlucky race must not kill the pump

    if autopilot:
        thread = threading.Thread(target=_autopilot, name="oocran-pump", daemon=True)
        app.state.pump_thread = thread

        @app.on_event("startup")
        def _start_pump() -> None:
            if not thread.is_alive():
                thread.start()

        @app.on_event("shutdown")
        def _stop_pump() -> None:
            app.state.stop.set()

    return app


def serve(
    scenario_path: str | None = None,
    port: int | None = None,
    host: str = "127.0.0.1",
) -> None:
    """Run the HTTP service until interrupted.

    Environment: OOCRAN_PORT (default 8000), OOCRAN_SECRET (alert callback
    secret override), OOCRAN_SCENARIO (scenario file used when no path is
    given).
    """
    import uvicorn

    scenario_path = scenario_path or os.environ.get("OOCRAN_SCENARIO")
    scn = load_scenario(scenario_path) if scenario_path else default_scenario()
    secret_override = os.environ.get("OOCRAN_SECRET")
    if secret_override:
        scn.setdefault("webhook", {})
        scn["webhook"]["secret"] = secret_override
    if port is None:
        try:
            port = int(os.environ.get("OOCRAN_PORT", "8000"))
        except ValueError as exc:
            raise BadConfig(f"OOCRAN_PORT must be an integer: {exc}") from exc
    app = create_app(scenario=scn)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        if exc.errno in (48, 98):  # EADDRINUSE on mac/linux
            raise PortInUse(f"port {port} is already bound") from exc
        raise
