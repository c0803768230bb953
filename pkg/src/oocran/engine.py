"""Orchestration engine: the decision core tying every subsystem together.

Commands (create, reconfigure, delete, swap) validate and transition state
here, but every side effect on infrastructure flows through the task queue
so per-service ordering and retry semantics hold no matter who is calling.
The engine owns the registries of services, instances, actuators, and
parked alarms; all other state lives in the subsystem that owns it.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from typing import Any, Callable, Mapping

from .errors import (
    DuplicateActuator,
    EmptyRepository,
    ImmutableField,
    InsufficientCapacity,
    InvariantViolation,
    NSNotActive,
    QuotaExceeded,
    SwapThrottled,
    UnknownActuator,
    UnknownAlarm,
    UnknownNS,
    ValidationFailed,
)
from .events import EventBus
from .model import (
    RADIO_ROLES,
    Actuator,
    ActuatorAction,
    Alarm,
    Flavor,
    NetworkDef,
    NetworkRole,
    NetworkService,
    NSDescriptor,
    NsState,
    RadioRequirements,
    VNFDescriptor,
    VNFInstance,
    VnfRole,
    VnfState,
    transition,
    transition_vnf,
    validate_descriptor,
)
from .monitor import Monitor, WebhookDeliverer, MetricSample
from .planner import (
    DeploymentPlan,
    SwapReport,
    SwapStrategy,
    TimeModel,
    VWIDescriptor,
    VWIRepository,
    boot_schedule,
    plan_vwi,
)
from .rf import RadioPool
from .tasks import Task, TaskKind, TaskQueue, TaskState
from .vim import ClockMode, VimSim

#: flavor assigned to generated eNodeB functions
ENODEB_FLAVOR = Flavor(vcpus=2, ram_mb=2048)
DEFAULT_ENODEB_TX_POWER_DBM = 20.0


@dataclass
class EngineConfig:
    max_ns: int = 32
    max_vnfs_per_ns: int = 64
    cell_radius_m: float = 30.0
    min_swap_interval_s: float = 0.0
    pump_limit: int = 100_000


class Orchestrator:
    def __init__(
        self,
        vim: VimSim,
        pool: RadioPool,
        monitor: Monitor,
        bus: EventBus | None = None,
        config: EngineConfig | None = None,
        time_model: TimeModel | None = None,
        deliverer: WebhookDeliverer | None = None,
    ):
        self.vim = vim
        self.pool = pool
        self.monitor = monitor
        self.bus = bus or EventBus()
        self.config = config or EngineConfig()
        self.time_model = time_model or TimeModel.from_table()
        self.deliverer = deliverer
        self.queue = TaskQueue(
            max_retries=3, liveness=self._ns_live, on_failed=self._on_task_failed
        )
        self.repository = VWIRepository()
        self._nss: dict[str, NetworkService] = {}
        self._vnfs: dict[str, VNFInstance] = {}
        self._vnf_serial_of: dict[str, int] = {}  # instance id -> creation serial
        self._vm_to_vnf: dict[str, str] = {}
        self._ns_networks: dict[str, dict[NetworkRole, str]] = {}
        self._ns_vwi: dict[str, VWIDescriptor] = {}
        self._slice_of_vnf: dict[tuple[str, str], str] = {}  # (ns, vnf name) -> slice
        self._actuators: dict[str, Actuator] = {}
        self._seen_alarms: set[tuple[str, str, float]] = set()
        self._parked: dict[str, list[Alarm]] = {}
        self._last_swap_at: dict[str, float] = {}
        self._ns_serial = 0
        self._vnf_serial = 0
        self._lock = threading.RLock()
        self._drivers: dict[TaskKind, Callable[[Task], dict[str, Any]]] = {
            TaskKind.ALLOCATE_SLICE: self._drv_allocate_slice,
            TaskKind.DEPLOY_VNF: self._drv_deploy_vnf,
            TaskKind.DELETE_VNF: self._drv_delete_vnf,
            TaskKind.RELEASE_SLICE: self._drv_release_slice,
            TaskKind.RECONFIGURE_VNF: self._drv_reconfigure_vnf,
            TaskKind.RUN_ACTUATOR: self._drv_run_actuator,
        }

    # -- accessors ---------------------------------------------------------

    @property
    def now(self) -> float:
        return self.vim.clock.now

    def get_ns(self, ns_id: str) -> NetworkService:
        with self._lock:
            ns = self._nss.get(ns_id)
            if ns is None:
                raise UnknownNS(ns_id)
            return ns

    def list_ns(self, include_terminated: bool = True) -> list[NetworkService]:
        with self._lock:
            services = [self._nss[k] for k in sorted(self._nss)]
        if not include_terminated:
            services = [s for s in services if s.state is not NsState.TERMINATED]
        return services

    def get_vnf(self, vnf_id: str) -> VNFInstance:
        with self._lock:
            inst = self._vnfs.get(vnf_id)
            if inst is None:
                raise UnknownNS(f"no VNF instance {vnf_id}")
            return inst

    def vnf_instances(self, ns_id: str) -> list[VNFInstance]:
        ns = self.get_ns(ns_id)
        with self._lock:
            return [self._vnfs[i] for i in ns.vnf_instances if i in self._vnfs]

    def _ns_live(self, ns_id: str) -> bool:
        ns = self._nss.get(ns_id)
        return ns is not None and ns.state is not NsState.TERMINATED

    def _update_ns(self, ns_id: str, **changes: Any) -> NetworkService:
        with self._lock:
            ns = replace(self._nss[ns_id], **changes)
            self._nss[ns_id] = ns
            return ns

    def _transition_ns(self, ns_id: str, target: NsState, at: float) -> NetworkService:
        with self._lock:
            ns = transition(self._nss[ns_id], target, at)
            self._nss[ns_id] = ns
        self.bus.emit(at, "ns", ns_id, target.value, name=ns.descriptor.name)
        return ns

    # -- create ------------------------------------------------------------

    def create_ns(
        self,
        descriptor: NSDescriptor,
        boot_times: Mapping[str, float] | None = None,
    ) -> NetworkService:
        report = validate_descriptor(descriptor)
        if report:
            raise ValidationFailed(report)
        now = self.now
        with self._lock:
            live = sum(1 for s in self._nss.values() if s.state is not NsState.TERMINATED)
            if live >= self.config.max_ns:
                raise QuotaExceeded(f"service cap {self.config.max_ns} reached")
            if len(descriptor.vnfs) > self.config.max_vnfs_per_ns:
                raise QuotaExceeded(
                    f"descriptor has {len(descriptor.vnfs)} VNFs, cap is "
                    f"{self.config.max_vnfs_per_ns}"
                )
            self._ns_serial += 1
            ns_id = f"ns-{self._ns_serial:06d}"
            nets: dict[NetworkRole, str] = {}
            try:
                for ndef in descriptor.networks:
                    nets[ndef.role] = self.vim.create_network(ndef.role, ndef.cidr).id
            except Exception:
                for net_id in nets.values():
                    self.vim.delete_network(net_id)
                raise
            ns = NetworkService(
                id=ns_id, descriptor=descriptor, state=NsState.PENDING, created_at=now
            )
            self._nss[ns_id] = ns
            self._ns_networks[ns_id] = nets
        self.bus.emit(now, "ns", ns_id, "PENDING", name=descriptor.name)
        self._transition_ns(ns_id, NsState.DEPLOYING, now)
        self._enqueue_vnf_deploys(ns_id, list(descriptor.vnfs), boot_times or {})
        return self.get_ns(ns_id)

    def _radio_locations(
        self, vnfs: list[VNFDescriptor]
    ) -> dict[str, tuple[float, float]]:
        """Site per radio function: declared location, else a hex layout."""
        from .planner import hex_placements

        radios = [v for v in vnfs if v.role in RADIO_ROLES]
        fallback = hex_placements(len(radios), self.config.cell_radius_m)
        out: dict[str, tuple[float, float]] = {}
        for i, v in enumerate(radios):
            out[v.name] = v.location if v.location is not None else fallback[i]
        return out

    def _enqueue_vnf_deploys(
        self,
        ns_id: str,
        vnfs: list[VNFDescriptor],
        boot_times: Mapping[str, float],
        locations: Mapping[str, tuple[float, float]] | None = None,
    ) -> list[str]:
        now = self.now
        sites = dict(locations) if locations is not None else self._radio_locations(vnfs)
        task_ids: list[str] = []
        for v in vnfs:
            if v.role in RADIO_ROLES and v.radio_requirements is not None:
                t = self.queue.enqueue(
                    ns_id,
                    TaskKind.ALLOCATE_SLICE,
                    {
                        "vnf_name": v.name,
                        "bandwidth_hz": v.radio_requirements.bandwidth_hz,
                        "tx_power_dbm": v.radio_requirements.tx_power_dbm,
                        "location": list(sites[v.name]),
                    },
                    now=now,
                )
                task_ids.append(t.task_id)
            t = self.queue.enqueue(
                ns_id,
                TaskKind.DEPLOY_VNF,
                {
                    "vnf_name": v.name,
                    "boot_time_s": float(boot_times.get(v.name, v.boot_time_s)),
                },
                now=now,
            )
            task_ids.append(t.task_id)
        return task_ids

    # -- delete --------------------------------------------------------------

    def delete_ns(self, ns_id: str) -> None:
        ns = self.get_ns(ns_id)
        now = self.now
        self._transition_ns(ns_id, NsState.TERMINATING, now)
        with self._lock:
            instance_ids = list(ns.vnf_instances)[::-1]  # newest first
            slice_ids = list(ns.slices)
        for vnf_id in instance_ids:
            self.queue.enqueue(ns_id, TaskKind.DELETE_VNF, {"vnf_id": vnf_id}, now=now)
        for slice_id in slice_ids:
            self.queue.enqueue(ns_id, TaskKind.RELEASE_SLICE, {"slice_id": slice_id}, now=now)
        self._maybe_finalize(ns_id, now)

    # -- reconfigure -----------------------------------------------------------

    _MUTABLE_PATCH_KEYS = frozenset({"vnfs", "scale", "rules"})
    _MUTABLE_VNF_KEYS = frozenset({"name", "flavor", "tx_power_dbm"})

    def reconfigure_ns(self, ns_id: str, patch: Mapping[str, Any]) -> NetworkService:
        ns = self.get_ns(ns_id)
        if ns.state is not NsState.ACTIVE:
            raise NSNotActive(f"{ns_id} is {ns.state.value}")
        self._validate_patch(patch)
        now = self.now
        self._transition_ns(ns_id, NsState.RECONFIGURING, now)
        try:
            self._apply_patch(ns_id, patch)
        except Exception:
            # nothing enqueued yet for a rejected patch; restore ACTIVE
            self._transition_ns(ns_id, NsState.ACTIVE, now)
            raise
        self._maybe_activate(ns_id, now)
        return self.get_ns(ns_id)

    def _validate_patch(self, patch: Mapping[str, Any]) -> None:
        for key in patch:
            if key not in self._MUTABLE_PATCH_KEYS:
                raise ImmutableField(key)
        for entry in patch.get("vnfs", []):
            for key in entry:
                if key not in self._MUTABLE_VNF_KEYS:
                    raise ImmutableField(f"vnfs.{key}")
            if "name" not in entry:
                raise ValidationFailed(["vnfs[]: entries must name the target VNF"])
        scale = patch.get("scale")
        if scale is not None:
            if set(scale) - {"role", "count"}:
                raise ValidationFailed(["scale: only role and count are understood"])
            if int(scale.get("count", 1)) < 1:
                raise ValidationFailed(["scale.count: must be >= 1"])

    def _apply_patch(self, ns_id: str, patch: Mapping[str, Any]) -> list[str]:
        task_ids: list[str] = []
        for entry in patch.get("rules", []):
            self.monitor.update_rule_threshold(entry["rule_id"], float(entry["threshold"]))
        for entry in patch.get("vnfs", []):
            task_ids.extend(self._patch_one_vnf(ns_id, entry))
        scale = patch.get("scale")
        if scale is not None:
            task_ids.extend(
                self._scale_role(ns_id, VnfRole(scale["role"]), int(scale["count"]))
            )
        return task_ids

    def _patch_one_vnf(self, ns_id: str, entry: Mapping[str, Any]) -> list[str]:
        ns = self.get_ns(ns_id)
        name = entry["name"]
        with self._lock:
            inst = next(
                (
                    self._vnfs[i]
                    for i in ns.vnf_instances
                    if i in self._vnfs and self._vnfs[i].descriptor.name == name
                ),
                None,
            )
        if inst is None:
            raise ValidationFailed([f"vnfs[{name}]: no such VNF in service"])
        changes: dict[str, Any] = {}
        if "tx_power_dbm" in entry:
            changes["tx_power_dbm"] = float(entry["tx_power_dbm"])
        if "flavor" in entry:
            changes["flavor"] = {
                "vcpus": int(entry["flavor"]["vcpus"]),
                "ram_mb": int(entry["flavor"]["ram_mb"]),
            }
        if not changes:
            return []
        task = self.queue.enqueue(
            ns_id,
            TaskKind.RECONFIGURE_VNF,
            {"vnf_id": inst.id, **changes},
            now=self.now,
        )
        return [task.task_id]

    def _scale_role(self, ns_id: str, role: VnfRole, target: int) -> list[str]:
        ns = self.get_ns(ns_id)
        with self._lock:
            current = [
                self._vnfs[i]
                for i in ns.vnf_instances
                if i in self._vnfs and self._vnfs[i].descriptor.role is role
            ]
        if not current and target > 0:
            base = next((v for v in ns.descriptor.vnfs if v.role is role), None)
            if base is None:
                raise ValidationFailed([f"scale.role: service has no {role.value} VNF"])
        if target > len(current):
            return self._scale_out(ns_id, role, target - len(current))
        if target < len(current):
            return self._scale_in(ns_id, role, len(current) - target)
        return []

    def _clone_name(self, descriptor: NSDescriptor, base: str) -> str:
        taken = {v.name for v in descriptor.vnfs}
        k = 2
        while f"{base}-{k}" in taken:
            k += 1
        return f"{base}-{k}"

    def _scale_out(self, ns_id: str, role: VnfRole, step: int) -> list[str]:
        ns = self.get_ns(ns_id)
        base = next((v for v in ns.descriptor.vnfs if v.role is role), None)
        if base is None:
            raise ValidationFailed([f"scale.role: service has no {role.value} VNF"])
        if len(ns.descriptor.vnfs) + step > self.config.max_vnfs_per_ns:
            raise QuotaExceeded(
                f"scale-out would exceed cap {self.config.max_vnfs_per_ns}"
            )
        clones: list[VNFDescriptor] = []
        descriptor = ns.descriptor
        for _ in range(step):
            clone = replace(base, name=self._clone_name(descriptor, base.name), location=None)
            descriptor = replace(descriptor, vnfs=descriptor.vnfs + (clone,))
            clones.append(clone)
        self._update_ns(ns_id, descriptor=descriptor)
        # keep already-placed radios at their sites; lay out only the clones
        sites = self._radio_locations(list(descriptor.vnfs))
        return self._enqueue_vnf_deploys(ns_id, clones, {}, locations=sites)

    def _scale_in(self, ns_id: str, role: VnfRole, step: int) -> list[str]:
        ns = self.get_ns(ns_id)
        now = self.now
        with self._lock:
            victims = sorted(
                (
                    self._vnfs[i]
                    for i in ns.vnf_instances
                    if i in self._vnfs and self._vnfs[i].descriptor.role is role
                ),
                key=lambda inst: self._vnf_serial_of[inst.id],
                reverse=True,  # newest first
            )[:step]
        task_ids: list[str] = []
        descriptor = ns.descriptor
        for inst in victims:
            t = self.queue.enqueue(ns_id, TaskKind.DELETE_VNF, {"vnf_id": inst.id}, now=now)
            task_ids.append(t.task_id)
            if inst.slice_id is not None:
                t = self.queue.enqueue(
                    ns_id, TaskKind.RELEASE_SLICE, {"slice_id": inst.slice_id}, now=now
                )
                task_ids.append(t.task_id)
            descriptor = replace(
                descriptor,
                vnfs=tuple(v for v in descriptor.vnfs if v.name != inst.descriptor.name),
            )
        self._update_ns(ns_id, descriptor=descriptor)
        return task_ids

    # -- actuators and alarms -------------------------------------------------

    def register_actuator(self, actuator: Actuator) -> None:
        with self._lock:
            if actuator.name in self._actuators:
                raise DuplicateActuator(actuator.name)
            self._actuators[actuator.name] = actuator
        self.bus.emit(self.now, "actuator", actuator.name, "REGISTERED",
                      action=actuator.action.value)

    def actuators(self) -> list[Actuator]:
        with self._lock:
            return [self._actuators[k] for k in sorted(self._actuators)]

    def _binding_for(self, ns: NetworkService, alarm_id: str) -> Actuator:
        binding = next(
            (b for b in ns.descriptor.actuator_bindings if b.alarm_id == alarm_id), None
        )
        if binding is None:
            raise UnknownAlarm(f"{alarm_id} is not bound in {ns.id}")
        actuator = self._actuators.get(binding.actuator)
        if actuator is None:
            raise UnknownActuator(binding.actuator)
        return actuator

    def execute_actuator(self, alarm_id: str, ns_id: str) -> list[str]:
        """Translate a bound actuator into reconfiguration tasks, now."""
        ns = self.get_ns(ns_id)
        actuator = self._binding_for(ns, alarm_id)
        if ns.state is not NsState.ACTIVE:
            raise NSNotActive(f"{ns_id} is {ns.state.value}")
        now = self.now
        params = dict(actuator.parameters)
        action = actuator.action
        if action is ActuatorAction.NOOP:
            self.bus.emit(now, "ns", ns_id, "ACTUATOR_NOOP", alarm_id=alarm_id)
            return []
        if action is ActuatorAction.REDEPLOY_VWI:
            report = self.swap_vwi(
                ns_id,
                SwapStrategy(params.get("strategy", "SOFT_HANDOVER")),
                vwi=(
                    VWIDescriptor.from_dict(params["vwi"]) if "vwi" in params else None
                ),
                profile=params.get("profile"),
            )
            self.bus.emit(self.now, "swap", ns_id, "REDEPLOYED", **report.to_dict())
            return []
        if action is ActuatorAction.SCALE_IN:
            role = VnfRole(params.get("role", VnfRole.ENODEB_TX.value))
            step = int(params.get("step", 1))
            with self._lock:
                count = sum(
                    1
                    for i in ns.vnf_instances
                    if i in self._vnfs and self._vnfs[i].descriptor.role is role
                )
            if count - step < 1:
                self.bus.emit(
                    now, "ns", ns_id, "WouldViolateMinimum",
                    alarm_id=alarm_id, role=role.value,
                )
                return []
            self._transition_ns(ns_id, NsState.RECONFIGURING, now)
            task_ids = self._scale_in(ns_id, role, step)
            self._maybe_activate(ns_id, now)
            return task_ids
        if action is ActuatorAction.SCALE_OUT:
            role = VnfRole(params.get("role", VnfRole.ENODEB_TX.value))
            step = int(params.get("step", 1))
            self._transition_ns(ns_id, NsState.RECONFIGURING, now)
            try:
                task_ids = self._scale_out(ns_id, role, step)
            except Exception:
                self._transition_ns(ns_id, NsState.ACTIVE, now)
                raise
            return task_ids
        # PARTIAL_RECONFIGURE carries an ordinary patch in its parameters
        patch = params.get("patch", {})
        self._validate_patch(patch)
        self._transition_ns(ns_id, NsState.RECONFIGURING, now)
        try:
            task_ids = self._apply_patch(ns_id, patch)
        except Exception:
            self._transition_ns(ns_id, NsState.ACTIVE, now)
            raise
        self._maybe_activate(ns_id, now)
        return task_ids

    def ns_of_vnf(self, vnf_id: str) -> NetworkService:
        with self._lock:
            for ns in self._nss.values():
                if vnf_id in ns.vnf_instances:
                    return ns
        raise UnknownAlarm(f"no service owns VNF {vnf_id}")

    def handle_alert(self, alarm: Alarm) -> dict[str, Any]:
        """Process one delivered alarm callback; replays are absorbed."""
        key = alarm.instance_key()
        with self._lock:
            if key in self._seen_alarms:
                return {"status": "duplicate"}
            self._seen_alarms.add(key)
        ns = self.ns_of_vnf(alarm.vnf_id)
        actuator = self._binding_for(ns, alarm.alarm_id)  # UnknownAlarm if unbound
        self.bus.emit(
            self.now, "alarm", alarm.alarm_id, "RECEIVED",
            vnf_id=alarm.vnf_id, rule_id=alarm.rule_id, fired_at=alarm.fired_at,
        )
        if actuator.action is ActuatorAction.REDEPLOY_VWI:
            # swap is a serialized engine command; it must not nest inside
            # a queued task, so it runs on the delivery path
            self.execute_actuator(alarm.alarm_id, ns.id)
            return {"status": "executed", "ns_id": ns.id}
        if ns.state is not NsState.ACTIVE:
            self._park(ns.id, alarm)
            return {"status": "parked", "ns_id": ns.id}
        task = self.queue.enqueue(
            ns.id,
            TaskKind.RUN_ACTUATOR,
            {"alarm": dict(zip(("alarm_id", "vnf_id", "fired_at"), key)), "retried": False},
            now=self.now,
        )
        return {"status": "accepted", "ns_id": ns.id, "task_id": task.task_id}

    def _park(self, ns_id: str, alarm: Alarm) -> None:
        with self._lock:
            self._parked.setdefault(ns_id, []).append(alarm)
        self.bus.emit(self.now, "alarm", alarm.alarm_id, "PARKED", ns_id=ns_id)

    # -- metric ingestion -------------------------------------------------

    def ingest_metric(self, sample: MetricSample) -> list[Alarm]:
        """Feed one sample through the monitor, delivering any fired alarms.

        Delivery happens after the monitor releases its lock, through the
        configured webhook deliverer; without one, alarms are handled
        directly (still as one callback per firing).
        """
        alarms = self.monitor.ingest(sample)
        for alarm in alarms:
            self.bus.emit(
                sample.ts, "alarm", alarm.alarm_id, "FIRED",
                vnf_id=alarm.vnf_id, rule_id=alarm.rule_id,
            )
            if self.deliverer is not None:
                receipt = self.deliverer.deliver(alarm)
                self.bus.emit(
                    sample.ts, "alarm", alarm.alarm_id, "DELIVERED",
                    vnf_id=alarm.vnf_id,
                    accepted=receipt.accepted,
                    attempts=receipt.attempts,
                )
            else:
                self.handle_alert(alarm)
        return alarms

    # -- drivers ------------------------------------------------------------

    def _drv_allocate_slice(self, task: Task) -> dict[str, Any]:
        ns_id, name = task.ns_id, task.payload["vnf_name"]
        with self._lock:
            existing = self._slice_of_vnf.get((ns_id, name))
        if existing is not None:
            return {"slice_id": existing, "noop": True}
        loc = task.payload["location"]
        s = self.pool.allocate(
            bandwidth_hz=float(task.payload["bandwidth_hz"]),
            location=(float(loc[0]), float(loc[1])),
            tx_power_dbm=float(task.payload["tx_power_dbm"]),
            owner_vnf=f"{ns_id}/{name}",
        )
        with self._lock:
            self._slice_of_vnf[(ns_id, name)] = s.id
            ns = self._nss[ns_id]
            self._nss[ns_id] = replace(ns, slices=ns.slices + (s.id,))
        self.bus.emit(
            self.now, "slice", s.id, "ALLOCATED",
            ns_id=ns_id, vnf_name=name, f_low_hz=s.f_low_hz, f_high_hz=s.f_high_hz,
        )
        return {"slice_id": s.id}

    def _drv_deploy_vnf(self, task: Task) -> dict[str, Any]:
        ns_id, name = task.ns_id, task.payload["vnf_name"]
        with self._lock:
            ns = self._nss[ns_id]
            for i in ns.vnf_instances:
                inst = self._vnfs.get(i)
                if inst is not None and inst.descriptor.name == name and inst.vm_id:
                    return {"vnf_id": inst.id, "noop": True}
            vdesc = next(v for v in ns.descriptor.vnfs if v.name == name)
            nets = self._ns_networks[ns_id]
            net_ids = [nets[r] for r in vdesc.networks]
        vm = self.vim.create_vm(
            vdesc.flavor, net_ids, float(task.payload.get("boot_time_s", 0.0))
        )
        ips = {net_id: ip for net_id, ip in vm.nics}
        with self._lock:
            self._vnf_serial += 1
            inst = VNFInstance(
                id=f"vnf-{self._vnf_serial:06d}",
                descriptor=vdesc,
                vm_id=vm.id,
                state=VnfState.BOOTING,
                mgmt_ip=ips.get(nets.get(NetworkRole.MANAGEMENT, "")),
                dataflow_ip=ips.get(nets.get(NetworkRole.DATAFLOW, "")),
                slice_id=self._slice_of_vnf.get((ns_id, name)),
            )
            self._vnfs[inst.id] = inst
            self._vnf_serial_of[inst.id] = self._vnf_serial
            self._vm_to_vnf[vm.id] = inst.id
            ns = self._nss[ns_id]
            self._nss[ns_id] = replace(ns, vnf_instances=ns.vnf_instances + (inst.id,))
        self.bus.emit(
            self.now, "vnf", inst.id, "BOOTING",
            ns_id=ns_id, name=name, vm_id=vm.id, boot_deadline=vm.boot_deadline,
        )
        return {"vnf_id": inst.id, "vm_id": vm.id}

    def _stoppable(self, inst: VNFInstance) -> VNFInstance:
        # walk legal edges down to STOPPED
        if inst.state in (VnfState.BOOTING, VnfState.RECONFIGURING):
            inst = transition_vnf(inst, VnfState.ERROR)
        if inst.state in (VnfState.RUNNING, VnfState.ERROR):
            inst = transition_vnf(inst, VnfState.STOPPED)
        return inst

    def _drv_delete_vnf(self, task: Task) -> dict[str, Any]:
        vnf_id = task.payload["vnf_id"]
        with self._lock:
            inst = self._vnfs.get(vnf_id)
            if inst is None:
                return {"vnf_id": vnf_id, "noop": True}
        if inst.vm_id is not None:
            self.vim.delete_vm(inst.vm_id)
        with self._lock:
            inst = self._stoppable(inst)
            del self._vnfs[vnf_id]
            self._vnf_serial_of.pop(vnf_id, None)
            if inst.vm_id is not None:
                self._vm_to_vnf.pop(inst.vm_id, None)
            self._slice_of_vnf.pop((task.ns_id, inst.descriptor.name), None)
            ns = self._nss[task.ns_id]
            self._nss[task.ns_id] = replace(
                ns, vnf_instances=tuple(i for i in ns.vnf_instances if i != vnf_id)
            )
        self.bus.emit(self.now, "vnf", vnf_id, "DELETED", ns_id=task.ns_id)
        return {"vnf_id": vnf_id, "state": inst.state.value}

    def _drv_release_slice(self, task: Task) -> dict[str, Any]:
        slice_id = task.payload["slice_id"]
        with self._lock:
            ns = self._nss[task.ns_id]
            if slice_id not in ns.slices:
                return {"slice_id": slice_id, "noop": True}
        self.pool.release(slice_id)
        with self._lock:
            ns = self._nss[task.ns_id]
            self._nss[task.ns_id] = replace(
                ns, slices=tuple(s for s in ns.slices if s != slice_id)
            )
        self.bus.emit(self.now, "slice", slice_id, "RELEASED", ns_id=task.ns_id)
        return {"slice_id": slice_id}

    def _drv_reconfigure_vnf(self, task: Task) -> dict[str, Any]:
        vnf_id = task.payload["vnf_id"]
        with self._lock:
            inst = self._vnfs.get(vnf_id)
        if inst is None:
            return {"vnf_id": vnf_id, "noop": True}
        applied: dict[str, Any] = {}
        if "tx_power_dbm" in task.payload and inst.slice_id is not None:
            power = float(task.payload["tx_power_dbm"])
            self.pool.update_power(inst.slice_id, power)
            with self._lock:
                inst = self._vnfs[vnf_id]
                if inst.descriptor.radio_requirements is not None:
                    vdesc = replace(
                        inst.descriptor,
                        radio_requirements=replace(
                            inst.descriptor.radio_requirements, tx_power_dbm=power
                        ),
                    )
                    inst = replace(inst, descriptor=vdesc)
                    self._vnfs[vnf_id] = inst
                    self._replace_vnf_descriptor(task.ns_id, vdesc)
            applied["tx_power_dbm"] = power
        if "flavor" in task.payload:
            spec = task.payload["flavor"]
            new_flavor = Flavor(vcpus=int(spec["vcpus"]), ram_mb=int(spec["ram_mb"]))
            with self._lock:
                inst = self._vnfs[vnf_id]
                if inst.descriptor.flavor == new_flavor and inst.vm_id:
                    applied["flavor"] = "noop"
                else:
                    old_vm = inst.vm_id
                    nets = self._ns_networks[task.ns_id]
                    net_ids = [nets[r] for r in inst.descriptor.networks]
            if applied.get("flavor") != "noop":
                if old_vm is not None:
                    self.vim.delete_vm(old_vm)
                vm = self.vim.create_vm(new_flavor, net_ids, 0.0)
                ips = {net_id: ip for net_id, ip in vm.nics}
                with self._lock:
                    inst = self._vnfs[vnf_id]
                    if old_vm is not None:
                        self._vm_to_vnf.pop(old_vm, None)
                    vdesc = replace(inst.descriptor, flavor=new_flavor)
                    nets = self._ns_networks[task.ns_id]
                    inst = replace(
                        inst,
                        descriptor=vdesc,
                        vm_id=vm.id,
                        state=(
                            VnfState.RECONFIGURING
                            if inst.state is VnfState.RUNNING
                            else inst.state
                        ),
                        mgmt_ip=ips.get(nets.get(NetworkRole.MANAGEMENT, "")),
                        dataflow_ip=ips.get(nets.get(NetworkRole.DATAFLOW, "")),
                    )
                    self._vnfs[vnf_id] = inst
                    self._vm_to_vnf[vm.id] = vnf_id
                    self._replace_vnf_descriptor(task.ns_id, vdesc)
                applied["flavor"] = {"vcpus": new_flavor.vcpus, "ram_mb": new_flavor.ram_mb}
        self.bus.emit(self.now, "vnf", vnf_id, "RECONFIGURED", **applied)
        return {"vnf_id": vnf_id, "applied": applied}

    def _replace_vnf_descriptor(self, ns_id: str, vdesc: VNFDescriptor) -> None:
        # caller holds the lock
        ns = self._nss[ns_id]
        vnfs = tuple(vdesc if v.name == vdesc.name else v for v in ns.descriptor.vnfs)
        self._nss[ns_id] = replace(
            ns, descriptor=replace(ns.descriptor, vnfs=vnfs)
        )

    def _drv_run_actuator(self, task: Task) -> dict[str, Any]:
        info = task.payload["alarm"]
        try:
            task_ids = self.execute_actuator(info["alarm_id"], task.ns_id)
        except NSNotActive:
            alarm = Alarm(
                alarm_id=info["alarm_id"],
                rule_id=info.get("rule_id", ""),
                vnf_id=info["vnf_id"],
                fired_at=info["fired_at"],
            )
            if task.payload.get("retried"):
                self.bus.emit(
                    self.now, "alarm", alarm.alarm_id, "DROPPED", ns_id=task.ns_id
                )
                return {"dropped": True}
            self._park(task.ns_id, alarm)
            return {"parked": True}
        return {"tasks": task_ids}

    # -- task and boot-event post-processing --------------------------------

    def _on_task_failed(self, task: Task) -> None:
        """Retry budget exhausted: fail the service and undo its footprint."""
        now = self.now
        self.bus.emit(
            now, "task", task.task_id, "FAILED",
            ns_id=task.ns_id, kind=task.kind.value, error=task.error or "",
        )
        with self._lock:
            ns = self._nss.get(task.ns_id)
        if ns is None:
            return
        if ns.state in (NsState.DEPLOYING, NsState.RECONFIGURING):
            self.queue.cancel_pending(task.ns_id, "service failed", now=now)
            was_deploying = ns.state is NsState.DEPLOYING
            self._transition_ns(task.ns_id, NsState.FAILED, now)
            if was_deploying:
                # a service that never went ACTIVE keeps nothing
                self._rollback_ns(task.ns_id)

    def _rollback_ns(self, ns_id: str) -> None:
        with self._lock:
            ns = self._nss[ns_id]
            instance_ids = list(ns.vnf_instances)[::-1]
            slice_ids = list(ns.slices)[::-1]
            nets = dict(self._ns_networks.get(ns_id, {}))
        for vnf_id in instance_ids:
            with self._lock:
                inst = self._vnfs.pop(vnf_id, None)
                self._vnf_serial_of.pop(vnf_id, None)
            if inst is not None and inst.vm_id is not None:
                self.vim.delete_vm(inst.vm_id)
                with self._lock:
                    self._vm_to_vnf.pop(inst.vm_id, None)
        for slice_id in slice_ids:
            self.pool.release(slice_id)
        for net_id in nets.values():
            self.vim.delete_network(net_id)
        with self._lock:
            self._ns_networks[ns_id] = {}
            ns = self._nss[ns_id]
            keys = [k for k in self._slice_of_vnf if k[0] == ns_id]
            for k in keys:
                del self._slice_of_vnf[k]
            self._nss[ns_id] = replace(ns, vnf_instances=(), slices=())
        self.bus.emit(self.now, "ns", ns_id, "ROLLED_BACK")

    def _after_task(self, task: Task) -> None:
        if task.state is TaskState.DONE:
            self._maybe_activate(task.ns_id, self.now)
            self._maybe_finalize(task.ns_id, self.now)

    def _maybe_activate(self, ns_id: str, at: float) -> None:
        retry: list[Alarm] = []
        with self._lock:
            ns = self._nss.get(ns_id)
            if ns is None or ns.state not in (NsState.DEPLOYING, NsState.RECONFIGURING):
                return
            if any(
                t.state in (TaskState.QUEUED, TaskState.RUNNING)
                for t in self.queue.tasks(ns_id)
            ):
                return
            instances = [self._vnfs[i] for i in ns.vnf_instances if i in self._vnfs]
            if not instances or any(i.state is not VnfState.RUNNING for i in instances):
                return
        self._transition_ns(ns_id, NsState.ACTIVE, at)
        with self._lock:
            retry = self._parked.pop(ns_id, [])
        for alarm in retry:
            self.queue.enqueue(
                ns_id,
                TaskKind.RUN_ACTUATOR,
                {
                    "alarm": {
                        "alarm_id": alarm.alarm_id,
                        "vnf_id": alarm.vnf_id,
                        "fired_at": alarm.fired_at,
                    },
                    "retried": True,
                },
                now=at,
            )

    def _maybe_finalize(self, ns_id: str, at: float) -> None:
        with self._lock:
            ns = self._nss.get(ns_id)
            if ns is None or ns.state is not NsState.TERMINATING:
                return
            if any(
                t.state in (TaskState.QUEUED, TaskState.RUNNING)
                for t in self.queue.tasks(ns_id)
            ):
                return
            if ns.vnf_instances or ns.slices:
                return
            nets = self._ns_networks.pop(ns_id, {})
        for net_id in nets.values():
            self.vim.delete_network(net_id)
        self._transition_ns(ns_id, NsState.TERMINATED, at)

    # -- pumping -----------------------------------------------------------

    def step(self) -> bool:
        """One worker attempt plus its bookkeeping; True if work happened."""
        task = self.queue.run_worker_step(self._drivers, now=self.now)
        if task is None:
            return False
        self._after_task(task)
        return True

    def _on_boot_events(self, events: list) -> None:
        for ev in events:
            with self._lock:
                vnf_id = self._vm_to_vnf.get(ev.vm_id)
                if vnf_id is None:
                    continue
                inst = self._vnfs.get(vnf_id)
                if inst is None or inst.state is VnfState.RUNNING:
                    continue
                inst = transition_vnf(inst, VnfState.RUNNING)
                self._vnfs[vnf_id] = inst
                ns_id = next(
                    (n.id for n in self._nss.values() if vnf_id in n.vnf_instances), None
                )
            self.bus.emit(ev.at, "vnf", vnf_id, "RUNNING", vm_id=ev.vm_id)
            if ns_id is not None:
                self._maybe_activate(ns_id, ev.at)

    def pump(self) -> int:
        """Drain ready tasks and due boot events without moving the clock.

        Returns how many worker attempts ran. REALTIME callers invoke this
        periodically; VIRTUAL callers interleave it with clock advances.
        """
        steps = 0
        while steps < self.config.pump_limit and self.step():
            steps += 1
        self._on_boot_events(self.vim.poll_boot_events())
        # deployed VMs may have finished booting mid-drain
        while steps < self.config.pump_limit and self.step():
            steps += 1
        return steps

    def advance_to(self, target_s: float) -> None:
        """VIRTUAL mode: move time forward, waking VMs at their exact
        deadlines so state timestamps land on them precisely.
        """
        if self.vim.clock.mode is not ClockMode.VIRTUAL:
            raise InvariantViolation("advance_to requires a VIRTUAL clock")
        self.pump()
        while True:
            deadline = self.vim.next_boot_deadline()
            if deadline is None or deadline > target_s:
                break
            self._on_boot_events(self.vim.advance_to(deadline))
            self.pump()
        if self.vim.clock.now < target_s:
            self._on_boot_events(self.vim.advance_to(target_s))
            self.pump()

    def run_until_settled(self, limit_s: float = 3_600.0) -> None:
        """VIRTUAL mode: pump and hop deadline-to-deadline until no queued
        work or pending boots remain.
        """
        if self.vim.clock.mode is not ClockMode.VIRTUAL:
            raise InvariantViolation("run_until_settled requires a VIRTUAL clock")
        self.pump()
        while True:
            deadline = self.vim.next_boot_deadline()
            if deadline is None:
                if self.queue.pending_count() == 0:
                    return
                if self.pump() == 0 and self.queue.pending_count() > 0:
                    raise InvariantViolation("task queue stalled with no boots pending")
                continue
            if deadline > limit_s:
                raise InvariantViolation(f"next boot at {deadline}s exceeds limit {limit_s}s")
            self._on_boot_events(self.vim.advance_to(deadline))
            self.pump()

    # -- swaps ----------------------------------------------------------------

    def deploy_vwi(
        self, vwi: VWIDescriptor, settle: bool = False
    ) -> tuple[NetworkService, DeploymentPlan]:
        plan = plan_vwi(vwi, self.time_model)
        nsd = self.vwi_to_ns_descriptor(vwi, plan)
        ns = self.create_ns(nsd)
        with self._lock:
            self._ns_vwi[ns.id] = vwi
        if settle:
            self._settle_ns(ns.id)
            ns = self.get_ns(ns.id)
        return ns, plan

    def vwi_to_ns_descriptor(
        self, vwi: VWIDescriptor, plan: DeploymentPlan
    ) -> NSDescriptor:
        """Expand a wireless-infrastructure request into a deployable
        service: one transmitting cell per planned site, booted on a
        staggered schedule that completes at the plan's estimate.
        """
        with self._lock:
            octet = (self._ns_serial + 1) % 200
        schedule = boot_schedule(plan.n_enodebs, self.time_model)
        vnfs = tuple(
            VNFDescriptor(
                name=f"enb-{k:03d}",
                image="enodeb",
                flavor=ENODEB_FLAVOR,
                role=VnfRole.ENODEB_TX,
                networks=(NetworkRole.MANAGEMENT, NetworkRole.DATAFLOW),
                radio_requirements=RadioRequirements(
                    bandwidth_hz=vwi.channel_bandwidth_hz,
                    tx_power_dbm=DEFAULT_ENODEB_TX_POWER_DBM,
                ),
                boot_time_s=schedule[k - 1],
                location=plan.placements[k - 1],
            )
            for k in range(1, plan.n_enodebs + 1)
        )
        return NSDescriptor(
            name=vwi.name,
            vnfs=vnfs,
            networks=(
                NetworkDef(NetworkRole.MANAGEMENT, f"10.{octet}.0.0/24"),
                NetworkDef(NetworkRole.DATAFLOW, f"10.{octet}.1.0/24"),
            ),
        )

    def _settle_ns(self, ns_id: str, limit_s: float = 3_600.0) -> None:
        """Drive one service to a rest state (VIRTUAL clock only)."""
        self.pump()
        while True:
            ns = self.get_ns(ns_id)
            if ns.state in (NsState.ACTIVE, NsState.FAILED, NsState.TERMINATED):
                return
            deadline = self.vim.next_boot_deadline()
            if deadline is None:
                if self.pump() == 0:
                    ns = self.get_ns(ns_id)
                    if ns.state in (NsState.ACTIVE, NsState.FAILED, NsState.TERMINATED):
                        return
                    raise InvariantViolation(f"{ns_id} stalled in {ns.state.value}")
                continue
            if deadline > limit_s:
                raise InvariantViolation(f"boot deadline {deadline}s exceeds {limit_s}s")
            self._on_boot_events(self.vim.advance_to(deadline))
            self.pump()

    def swap_vwi(
        self,
        old_ns_id: str,
        strategy: SwapStrategy,
        vwi: VWIDescriptor | None = None,
        profile: Mapping[str, float] | None = None,
    ) -> SwapReport:
        old = self.get_ns(old_ns_id)
        if old.state is not NsState.ACTIVE:
            raise NSNotActive(f"{old_ns_id} is {old.state.value}")
        now = self.now
        last = self._last_swap_at.get(old_ns_id)
        if (
            last is not None
            and self.config.min_swap_interval_s > 0
            and now - last < self.config.min_swap_interval_s
        ):
            raise SwapThrottled(
                f"swap of {old_ns_id} ran {now - last:.3f}s ago; minimum interval "
                f"is {self.config.min_swap_interval_s}s"
            )
        selected_name: str | None = None
        if strategy is SwapStrategy.REPOSITORY:
            wanted = profile
            if wanted is None:
                stored = self._ns_vwi.get(old_ns_id)
                wanted = stored.traffic_profile if stored is not None else {}
            vwi = self.repository.select(wanted)
            selected_name = vwi.name
        if vwi is None:
            raise ValidationFailed(["swap: a target descriptor is required"])
        plan = plan_vwi(vwi, self.time_model)

        if strategy is SwapStrategy.HARD:
            old_count = len(old.vnf_instances)
            self.delete_ns(old_ns_id)
            left_active_at = self.get_ns(old_ns_id).state_changed_at
            self.pump()
            new_ns, _ = self.deploy_vwi(vwi)
            self._settle_ns(new_ns.id)
            new_ns = self.get_ns(new_ns.id)
            if new_ns.state is not NsState.ACTIVE:
                self._discard_failed(new_ns.id)
                raise InsufficientCapacity(
                    f"replacement service ended {new_ns.state.value}"
                )
            downtime = max(0.0, new_ns.state_changed_at - left_active_at)
            peak = max(old_count, len(new_ns.vnf_instances))
        else:
            flavors = [ENODEB_FLAVOR] * plan.n_enodebs
            if not self.vim.can_fit(flavors):
                raise InsufficientCapacity(
                    f"cluster cannot hold both footprints ({plan.n_enodebs} new VMs)"
                )
            old_count = len(old.vnf_instances)
            new_ns, _ = self.deploy_vwi(vwi)
            self._settle_ns(new_ns.id)
            new_ns = self.get_ns(new_ns.id)
            if new_ns.state is not NsState.ACTIVE:
                # old service is untouched; surface the capacity failure
                self._discard_failed(new_ns.id)
                raise InsufficientCapacity(
                    f"replacement service ended {new_ns.state.value}"
                )
            peak = old_count + len(new_ns.vnf_instances)
            new_active_at = new_ns.state_changed_at
            self.delete_ns(old_ns_id)
            left_active_at = self.get_ns(old_ns_id).state_changed_at
            self.pump()
            downtime = max(0.0, new_active_at - left_active_at)

        with self._lock:
            self._last_swap_at[new_ns.id] = self.now
        report = SwapReport(
            strategy=strategy,
            downtime_s=downtime,
            peak_resource_overlap=peak,
            old_ns_id=old_ns_id,
            new_ns_id=new_ns.id,
            selected_descriptor=selected_name,
        )
        self.bus.emit(self.now, "swap", old_ns_id, "SWAPPED", **report.to_dict())
        return report

    def _discard_failed(self, ns_id: str) -> None:
        """Retire a failed replacement service; its footprint was already
        rolled back, so this only walks the record to TERMINATED.
        """
        ns = self.get_ns(ns_id)
        if ns.state is NsState.FAILED:
            self.delete_ns(ns_id)
            self.pump()
            self._maybe_finalize(ns_id, self.now)

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            services = {
                k: self._nss[k].state.value for k in sorted(self._nss)
            }
        return {
            "services": services,
            "vim": self.vim.snapshot(),
            "pool": self.pool.snapshot(),
        }
