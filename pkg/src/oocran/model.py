"""Shared domain types: descriptors, live instances, and their state machines.

Every type here is an immutable value; state changes produce new versions via
``dataclasses.replace``. The mutable registries live in the orchestration
engine, which serializes writers per network service.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping

from .errors import IllegalTransition, InvariantViolation


class VnfRole(str, Enum):
    ENODEB_TX = "ENODEB_TX"
    ENODEB_RX = "ENODEB_RX"
    UE = "UE"
    CHANNEL_SIM = "CHANNEL_SIM"
    DATA_SOURCE = "DATA_SOURCE"
    SPECTRUM_ANALYZER = "SPECTRUM_ANALYZER"
    CONTROLLER = "CONTROLLER"
    CORE_FN = "CORE_FN"


#: Roles that transmit or receive RF and therefore need a spectrum slice.
RADIO_ROLES = frozenset(
    {VnfRole.ENODEB_TX, VnfRole.ENODEB_RX, VnfRole.UE, VnfRole.SPECTRUM_ANALYZER}
)


class NetworkRole(str, Enum):
    DATAFLOW = "DATAFLOW"
    MANAGEMENT = "MANAGEMENT"


@dataclass(frozen=True)
class Flavor:
    vcpus: int
    ram_mb: int


@dataclass(frozen=True)
class RadioRequirements:
    bandwidth_hz: float
    tx_power_dbm: float


@dataclass(frozen=True)
class VNFDescriptor:
    """Declarative template for one virtualized network function."""

    name: str
    image: str
    flavor: Flavor
    role: VnfRole
    networks: tuple[NetworkRole, ...]
    radio_requirements: RadioRequirements | None = None
    boot_time_s: float = 0.0  # simulated image boot duration
    location: tuple[float, float] | None = None  # radio site (x, y) metres

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "name": self.name,
            "image": self.image,
            "flavor": {"vcpus": self.flavor.vcpus, "ram_mb": self.flavor.ram_mb},
            "role": self.role.value,
            "networks": [n.value for n in self.networks],
        }
        if self.radio_requirements is not None:
            doc["radio_requirements"] = {
                "bandwidth_hz": self.radio_requirements.bandwidth_hz,
                "tx_power_dbm": self.radio_requirements.tx_power_dbm,
            }
        if self.boot_time_s:
            doc["boot_time_s"] = self.boot_time_s
        if self.location is not None:
            doc["location"] = [self.location[0], self.location[1]]
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "VNFDescriptor":
        radio = doc.get("radio_requirements")
        loc = doc.get("location")
        return cls(
            name=str(doc["name"]),
            image=str(doc.get("image", doc["name"])),
            flavor=Flavor(
                vcpus=int(doc["flavor"]["vcpus"]),
                ram_mb=int(doc["flavor"]["ram_mb"]),
            ),
            role=VnfRole(doc["role"]),
            networks=tuple(NetworkRole(n) for n in doc.get("networks", [])),
            radio_requirements=(
                RadioRequirements(
                    bandwidth_hz=float(radio["bandwidth_hz"]),
                    tx_power_dbm=float(radio["tx_power_dbm"]),
                )
                if radio
                else None
            ),
            boot_time_s=float(doc.get("boot_time_s", 0.0)),
            location=(float(loc[0]), float(loc[1])) if loc is not None else None,
        )


@dataclass(frozen=True)
class NetworkDef:
    role: NetworkRole
    cidr: str


@dataclass(frozen=True)
class ActuatorBinding:
    alarm_id: str
    actuator: str


@dataclass(frozen=True)
class NSDescriptor:
    """Declarative template for a network service and its functions."""

    name: str
    vnfs: tuple[VNFDescriptor, ...]
    networks: tuple[NetworkDef, ...]
    actuator_bindings: tuple[ActuatorBinding, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "networks": [{"role": n.role.value, "cidr": n.cidr} for n in self.networks],
            "vnfs": [v.to_dict() for v in self.vnfs],
            "actuator_bindings": [
                {"alarm_id": b.alarm_id, "actuator": b.actuator}
                for b in self.actuator_bindings
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "NSDescriptor":
        return cls(
            name=str(doc["name"]),
            vnfs=tuple(VNFDescriptor.from_dict(v) for v in doc.get("vnfs", [])),
            networks=tuple(
                NetworkDef(role=NetworkRole(n["role"]), cidr=str(n["cidr"]))
                for n in doc.get("networks", [])
            ),
            actuator_bindings=tuple(
                ActuatorBinding(alarm_id=str(b["alarm_id"]), actuator=str(b["actuator"]))
                for b in doc.get("actuator_bindings", [])
            ),
        )


class NsState(str, Enum):
    PENDING = "PENDING"
    DEPLOYING = "DEPLOYING"
    ACTIVE = "ACTIVE"
    RECONFIGURING = "RECONFIGURING"
    TERMINATING = "TERMINATING"
    TERMINATED = "TERMINATED"
    FAILED = "FAILED"


NS_TRANSITIONS: dict[NsState, frozenset[NsState]] = {
    NsState.PENDING: frozenset({NsState.DEPLOYING}),
    NsState.DEPLOYING: frozenset({NsState.ACTIVE, NsState.FAILED}),
    NsState.ACTIVE: frozenset({NsState.RECONFIGURING, NsState.TERMINATING}),
    NsState.RECONFIGURING: frozenset({NsState.ACTIVE, NsState.FAILED}),
    NsState.TERMINATING: frozenset({NsState.TERMINATED}),
    NsState.TERMINATED: frozenset(),
    NsState.FAILED: frozenset({NsState.TERMINATING}),
}


class VnfState(str, Enum):
    BOOTING = "BOOTING"
    RUNNING = "RUNNING"
    RECONFIGURING = "RECONFIGURING"
    STOPPED = "STOPPED"
    ERROR = "ERROR"


VNF_TRANSITIONS: dict[VnfState, frozenset[VnfState]] = {
    VnfState.BOOTING: frozenset({VnfState.RUNNING, VnfState.ERROR}),
    VnfState.RUNNING: frozenset(
        {VnfState.RECONFIGURING, VnfState.STOPPED, VnfState.ERROR}
    ),
    VnfState.RECONFIGURING: frozenset({VnfState.RUNNING, VnfState.ERROR}),
    VnfState.STOPPED: frozenset(),
    VnfState.ERROR: frozenset({VnfState.STOPPED}),
}


@dataclass(frozen=True)
class StateChange:
    """One recorded lifecycle transition, kept in the service history."""

    source: str
    target: str
    at: float


@dataclass(frozen=True)
class NetworkService:
    id: str
    descriptor: NSDescriptor
    state: NsState
    vnf_instances: tuple[str, ...] = ()
    slices: tuple[str, ...] = ()
    created_at: float = 0.0
    state_changed_at: float = 0.0
    history: tuple[StateChange, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.descriptor.name,
            "state": self.state.value,
            "vnf_instances": list(self.vnf_instances),
            "slices": list(self.slices),
            "created_at": self.created_at,
            "state_changed_at": self.state_changed_at,
            "history": [
                {"source": h.source, "target": h.target, "at": h.at}
                for h in self.history
            ],
            "descriptor": self.descriptor.to_dict(),
        }


@dataclass(frozen=True)
class VNFInstance:
    id: str
    descriptor: VNFDescriptor
    vm_id: str | None
    state: VnfState
    mgmt_ip: str | None = None
    dataflow_ip: str | None = None
    slice_id: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.descriptor.name,
            "role": self.descriptor.role.value,
            "vm_id": self.vm_id,
            "state": self.state.value,
            "mgmt_ip": self.mgmt_ip,
            "dataflow_ip": self.dataflow_ip,
            "slice_id": self.slice_id,
        }


class ActuatorAction(str, Enum):
    SCALE_OUT = "SCALE_OUT"
    SCALE_IN = "SCALE_IN"
    PARTIAL_RECONFIGURE = "PARTIAL_RECONFIGURE"
    REDEPLOY_VWI = "REDEPLOY_VWI"
    NOOP = "NOOP"


@dataclass(frozen=True)
class Actuator:
    name: str
    action: ActuatorAction
    parameters: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Alarm:
    alarm_id: str
    rule_id: str
    vnf_id: str
    fired_at: float
    payload: Mapping[str, Any] = field(default_factory=dict)

    def instance_key(self) -> tuple[str, str, float]:
        # Identifies one firing on the wire; used for replay dedup.
        return (self.alarm_id, self.vnf_id, self.fired_at)


def _valid_cidr(cidr: str) -> bool:
    try:
        net = ipaddress.ip_network(cidr, strict=True)
    except ValueError:
        return False
    return net.version == 4 and net.num_addresses >= 4


def validate_descriptor(d: NSDescriptor) -> list[str]:
    """Check every descriptor invariant and report the violations.

    Validation never raises; an empty report means the descriptor is
    deployable. Each entry names the violated invariant and the offending
    field so callers can surface it verbatim.
    """
    report: list[str] = []

    mgmt = [n for n in d.networks if n.role is NetworkRole.MANAGEMENT]
    dataflow = [n for n in d.networks if n.role is NetworkRole.DATAFLOW]
    if len(mgmt) != 1:
        report.append(
            f"networks: exactly one MANAGEMENT network required, found {len(mgmt)}"
        )
    if len(dataflow) > 1:
        report.append(
            f"networks: at most one DATAFLOW network allowed, found {len(dataflow)}"
        )
    for n in d.networks:
        if not _valid_cidr(n.cidr):
            report.append(
                f"networks[{n.role.value}].cidr: not an IPv4 prefix with at least "
                f"4 addresses: {n.cidr!r}"
            )

    if not d.vnfs:
        report.append("vnfs: at least one VNF is required")

    declared_roles = {n.role for n in d.networks}
    seen_names: set[str] = set()
    for v in d.vnfs:
        if v.name in seen_names:
            report.append(f"vnfs[{v.name}].name: duplicate VNF name")
        seen_names.add(v.name)
        if v.flavor.vcpus <= 0 or v.flavor.ram_mb <= 0:
            report.append(f"vnfs[{v.name}].flavor: vcpus and ram_mb must be positive")
        if NetworkRole.MANAGEMENT not in v.networks:
            report.append(
                f"vnfs[{v.name}].networks: every VNF must reference the "
                "MANAGEMENT network"
            )
        for ref in v.networks:
            if ref not in declared_roles:
                report.append(
                    f"vnfs[{v.name}].networks: references undeclared "
                    f"{ref.value} network"
                )
        if v.role in RADIO_ROLES and v.radio_requirements is None:
            report.append(
                f"vnfs[{v.name}].radio_requirements: required for role {v.role.value}"
            )
        if v.radio_requirements is not None and v.radio_requirements.bandwidth_hz <= 0:
            report.append(
                f"vnfs[{v.name}].radio_requirements.bandwidth_hz: must be positive"
            )

    seen_alarms: set[str] = set()
    for b in d.actuator_bindings:
        if b.alarm_id in seen_alarms:
            report.append(
                f"actuator_bindings[{b.alarm_id}]: alarm_ids must be unique "
                "within the descriptor"
            )
        seen_alarms.add(b.alarm_id)

    return report


def transition(ns: NetworkService, target: NsState, at: float) -> NetworkService:
    """Move a service along the lifecycle graph, appending to its history.

    Raises IllegalTransition for any non-edge. A transition to TERMINATED
    additionally requires that all attached resources were released first.
    """
    if target not in NS_TRANSITIONS[ns.state]:
        raise IllegalTransition(ns.state.value, target.value)
    if target is NsState.TERMINATED and (ns.vnf_instances or ns.slices):
        raise InvariantViolation(
            f"{ns.id}: TERMINATED requires zero attached instances and slices"
        )
    change = StateChange(source=ns.state.value, target=target.value, at=at)
    return replace(
        ns,
        state=target,
        state_changed_at=at,
        history=ns.history + (change,),
    )


def transition_vnf(instance: VNFInstance, target: VnfState) -> VNFInstance:
    if target not in VNF_TRANSITIONS[instance.state]:
        raise IllegalTransition(instance.state.value, target.value)
    return replace(instance, state=target)
