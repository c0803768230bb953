"""Scripted virtual-time execution of a scenario workload.

The runner replays timed actions against the engine, hopping the virtual
clock from deadline to deadline so every timestamp in the resulting event
log is exact rather than wall-clock noise.
"""

from __future__ import annotations

from typing import Any, Mapping

from .engine import Orchestrator
from .errors import BadConfig, UnknownNS
from .events import Event
from .monitor import MetricSample
from .planner import SwapStrategy, VWIDescriptor
from .scenario import load_descriptor
from .vim import ClockMode


class SimulationRunner:
    def __init__(self, engine: Orchestrator, workload: list[Mapping[str, Any]]):
        if engine.vim.clock.mode is not ClockMode.VIRTUAL:
            raise BadConfig("simulation requires a VIRTUAL clock")
        self.engine = engine
        self.workload = sorted(
            enumerate(workload), key=lambda item: (float(item[1].get("at", 0.0)), item[0])
        )
        self._names: dict[str, str] = {}  # service name -> ns id

    def _resolve_ns(self, ref: str) -> str:
        if ref in self._names:
            return self._names[ref]
        for ns in self.engine.list_ns():
            if ns.id == ref:
                return ref
        raise UnknownNS(ref)

    def _resolve_vnf(self, ref: str) -> str:
        """Accepts a raw instance id or '<service>/<vnf name>'."""
        if "/" not in ref:
            return ref
        ns_ref, vnf_name = ref.split("/", 1)
        ns_id = self._resolve_ns(ns_ref)
        for inst in self.engine.vnf_instances(ns_id):
            if inst.descriptor.name == vnf_name:
                return inst.id
        raise UnknownNS(f"no VNF named {vnf_name!r} in {ns_id}")

    def _execute(self, spec: Mapping[str, Any]) -> None:
        action = spec.get("action")
        if action == "deploy_vwi":
            vwi = VWIDescriptor.from_dict(spec["vwi"])
            ns, _ = self.engine.deploy_vwi(vwi)
            self._names[vwi.name] = ns.id
        elif action == "deploy_ns":
            descriptor = load_descriptor(spec.get("descriptor") or spec["file"])
            ns = self.engine.create_ns(descriptor)
            self._names[descriptor.name] = ns.id
        elif action == "delete_ns":
            self.engine.delete_ns(self._resolve_ns(str(spec["ns"])))
        elif action == "swap":
            report = self.engine.swap_vwi(
                self._resolve_ns(str(spec["ns"])),
                SwapStrategy(spec.get("strategy", "SOFT_HANDOVER")),
                vwi=(
                    VWIDescriptor.from_dict(spec["vwi"]) if "vwi" in spec else None
                ),
                profile=spec.get("profile"),
            )
            if "ns" in spec:
                # keep the name pointing at the replacement service
                name = str(spec["ns"])
                if name in self._names:
                    self._names[name] = report.new_ns_id
        elif action == "metric":
            self.engine.ingest_metric(
                MetricSample(
                    vnf_id=self._resolve_vnf(str(spec["vnf"])),
                    metric=str(spec["metric"]),
                    value=float(spec["value"]),
                    ts=self.engine.now,
                )
            )
        elif action == "reconfigure":
            self.engine.reconfigure_ns(
                self._resolve_ns(str(spec["ns"])), dict(spec.get("patch", {}))
            )
        elif action == "repository_put":
            self.engine.repository.put(VWIDescriptor.from_dict(spec["vwi"]))
        else:
            raise BadConfig(f"unknown workload action {action!r}")

    def run(self, until: float | None = None) -> list[Event]:
        """Execute all actions in time order, settle, and return the log."""
        for _, spec in self.workload:
            at = float(spec.get("at", 0.0))
            if at > self.engine.now:
                self.engine.advance_to(at)
            else:
                self.engine.pump()
            self._execute(spec)
        self.engine.run_until_settled()
        if until is not None and until > self.engine.now:
            self.engine.advance_to(until)
        return self.engine.bus.log()
