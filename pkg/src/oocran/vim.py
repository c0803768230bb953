"""Simulated infrastructure manager: hosts, VMs, networks, radio heads, clock.

The simulator is one logical state machine. All mutating calls are applied
under a single lock, so identical operation sequences yield identical states
and event orders in VIRTUAL mode.
"""

from __future__ import annotations

import heapq
import ipaddress
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from .errors import (
    AddressExhausted,
    CapacityExhausted,
    InvalidCidr,
    NetworkInUse,
    RRHBusy,
    UnknownNetwork,
    UnknownRRH,
    UnknownVm,
    WrongClockMode,
)
from .model import Flavor, NetworkRole


class ClockMode(str, Enum):
    VIRTUAL = "VIRTUAL"
    REALTIME = "REALTIME"


class Clock:
    """Monotonic clock, either stepped explicitly (VIRTUAL) or wall-backed."""

    def __init__(self, mode: ClockMode = ClockMode.VIRTUAL, start: float = 0.0):
        self.mode = mode
        self._virtual_now = start
        self._wall_floor = start  # keeps REALTIME monotonic across reads

    @property
    def now(self) -> float:
        if self.mode is ClockMode.VIRTUAL:
            return self._virtual_now
        wall = time.time()
        if wall > self._wall_floor:
            self._wall_floor = wall
        return self._wall_floor

    def advance_to(self, target: float) -> float:
        if self.mode is not ClockMode.VIRTUAL:
            raise WrongClockMode("clock can only be advanced in VIRTUAL mode")
        if target > self._virtual_now:
            self._virtual_now = target
        return self._virtual_now


@dataclass
class ComputeHost:
    id: str
    vcpus_total: int
    ram_mb_total: int
    vcpus_free: int = field(default=0)
    ram_mb_free: int = field(default=0)

    def __post_init__(self) -> None:
        if not self.vcpus_free:
            self.vcpus_free = self.vcpus_total
        if not self.ram_mb_free:
            self.ram_mb_free = self.ram_mb_total

    def fits(self, flavor: Flavor) -> bool:
        return self.vcpus_free >= flavor.vcpus and self.ram_mb_free >= flavor.ram_mb


class VmState(str, Enum):
    BOOTING = "BOOTING"
    RUNNING = "RUNNING"


@dataclass
class VirtualMachine:
    id: str
    serial: int
    host_id: str
    flavor: Flavor
    nics: list[tuple[str, str]]  # (network_id, ip)
    boot_deadline: float
    state: VmState = VmState.BOOTING


class VirtualNetwork:
    """One L2 segment with deterministic DHCP-style address assignment.

    The gateway takes the first host address. Assignment hands out the
    lowest free host address: released addresses are reused before the
    cursor moves on.
    """

    def __init__(self, net_id: str, role: NetworkRole, cidr: str):
        try:
            net = ipaddress.ip_network(cidr, strict=True)
        except ValueError as exc:
            raise InvalidCidr(f"{cidr!r}: {exc}") from exc
        if net.version != 4:
            raise InvalidCidr(f"{cidr!r}: only IPv4 prefixes are supported")
        if net.num_addresses < 4:
            raise InvalidCidr(f"{cidr!r}: fewer than 4 host addresses")
        self.id = net_id
        self.role = role
        self.cidr = str(net)
        self._net = net
        self.gateway = str(net.network_address + 1)
        self._first_assignable = int(net.network_address) + 2
        self._last_assignable = int(net.broadcast_address) - 1
        self._cursor = self._first_assignable
        self._released: list[int] = []  # heap of returned addresses
        self.assigned: set[str] = set()

    @property
    def assignable_count(self) -> int:
        return self._last_assignable - self._first_assignable + 1

    def allocate(self) -> str:
        if self._released:
            addr = heapq.heappop(self._released)
        elif self._cursor <= self._last_assignable:
            addr = self._cursor
            self._cursor += 1
        else:
            raise AddressExhausted(f"network {self.id} ({self.cidr}) has no free address")
        ip = str(ipaddress.ip_address(addr))
        self.assigned.add(ip)
        return ip

    def release(self, ip: str) -> None:
        if ip in self.assigned:
            self.assigned.remove(ip)
            heapq.heappush(self._released, int(ipaddress.ip_address(ip)))


@dataclass
class RRHDevice:
    id: str
    location: tuple[float, float]
    max_bandwidth_hz: float
    max_tx_power_dbm: float
    attached_vnf: str | None = None


@dataclass(frozen=True)
class BootEvent:
    vm_id: str
    at: float


class VimSim:
    """In-memory VIM with first-fit placement and a virtual/real-time clock."""

    def __init__(
        self,
        hosts: Iterable[ComputeHost],
        rrhs: Iterable[RRHDevice] = (),
        clock: Clock | None = None,
    ):
        self.clock = clock or Clock(ClockMode.VIRTUAL)
        self.hosts: dict[str, ComputeHost] = {h.id: h for h in hosts}
        self.rrhs: dict[str, RRHDevice] = {r.id: r for r in rrhs}
        self.networks: dict[str, VirtualNetwork] = {}
        self.vms: dict[str, VirtualMachine] = {}
        self._net_serial = 0
        self._vm_serial = 0
        self._lock = threading.RLock()

    # -- networks --------------------------------------------------------

    def create_network(self, role: NetworkRole, cidr: str) -> VirtualNetwork:
        with self._lock:
            self._net_serial += 1
            net = VirtualNetwork(f"net-{self._net_serial:06d}", role, cidr)
            self.networks[net.id] = net
            return net

    def delete_network(self, net_id: str) -> None:
        with self._lock:
            net = self.networks.get(net_id)
            if net is None:
                raise UnknownNetwork(net_id)
            if net.assigned:
                raise NetworkInUse(f"{net_id} still has {len(net.assigned)} addresses assigned")
            del self.networks[net_id]

    # -- virtual machines ------------------------------------------------

    def create_vm(
        self, flavor: Flavor, networks: list[str], boot_time_s: float
    ) -> VirtualMachine:
        if boot_time_s < 0:
            raise ValueError("boot_time_s must be non-negative")
        with self._lock:
            for net_id in networks:
                if net_id not in self.networks:
                    raise UnknownNetwork(net_id)
            host = next(
                (h for h in sorted(self.hosts.values(), key=lambda h: h.id) if h.fits(flavor)),
                None,
            )
            if host is None:
                raise CapacityExhausted(
                    f"no host fits flavor (vcpus={flavor.vcpus}, ram_mb={flavor.ram_mb})"
                )
            nics: list[tuple[str, str]] = []
            try:
                for net_id in networks:
                    nics.append((net_id, self.networks[net_id].allocate()))
            except AddressExhausted:
                for net_id, ip in nics:
                    self.networks[net_id].release(ip)
                raise
            host.vcpus_free -= flavor.vcpus
            host.ram_mb_free -= flavor.ram_mb
            self._vm_serial += 1
            vm = VirtualMachine(
                id=f"vm-{self._vm_serial:06d}",
                serial=self._vm_serial,
                host_id=host.id,
                flavor=flavor,
                nics=nics,
                boot_deadline=self.clock.now + boot_time_s,
            )
            self.vms[vm.id] = vm
            return vm

    def delete_vm(self, vm_id: str) -> dict[str, Any]:
        with self._lock:
            vm = self.vms.pop(vm_id, None)
            if vm is None:
                raise UnknownVm(vm_id)
            host = self.hosts[vm.host_id]
            host.vcpus_free += vm.flavor.vcpus
            host.ram_mb_free += vm.flavor.ram_mb
            for net_id, ip in vm.nics:
                net = self.networks.get(net_id)
                if net is not None:
                    net.release(ip)
            return {
                "vm_id": vm_id,
                "host_id": vm.host_id,
                "vcpus": vm.flavor.vcpus,
                "ram_mb": vm.flavor.ram_mb,
                "ips": [ip for _, ip in vm.nics],
            }

    # -- time ------------------------------------------------------------

    def advance_clock(self, dt_s: float) -> list[BootEvent]:
        """Advance virtual time and flip due VMs to RUNNING.

        Events come back in deadline order, ties broken by VM id.
        """
        if self.clock.mode is not ClockMode.VIRTUAL:
            raise WrongClockMode("advance_clock requires VIRTUAL mode")
        if dt_s < 0:
            raise ValueError("dt_s must be non-negative")
        with self._lock:
            self.clock.advance_to(self.clock.now + dt_s)
            return self._collect_boot_events()

    def advance_to(self, target_s: float) -> list[BootEvent]:
        # Exact-target variant used by the simulation runner; avoids the
        # cumulative float drift of repeated += steps.
        if self.clock.mode is not ClockMode.VIRTUAL:
            raise WrongClockMode("advance_to requires VIRTUAL mode")
        with self._lock:
            self.clock.advance_to(target_s)
            return self._collect_boot_events()

    def poll_boot_events(self) -> list[BootEvent]:
        """Collect due boot completions against the current clock (any mode)."""
        with self._lock:
            return self._collect_boot_events()

    def _collect_boot_events(self) -> list[BootEvent]:
        now = self.clock.now
        due = [
            vm
            for vm in self.vms.values()
            if vm.state is VmState.BOOTING and vm.boot_deadline <= now
        ]
        due.sort(key=lambda vm: (vm.boot_deadline, vm.id))
        events = []
        for vm in due:
            vm.state = VmState.RUNNING
            events.append(BootEvent(vm_id=vm.id, at=vm.boot_deadline))
        return events

    def next_boot_deadline(self) -> float | None:
        with self._lock:
            pending = [vm.boot_deadline for vm in self.vms.values() if vm.state is VmState.BOOTING]
            return min(pending) if pending else None

    # -- radio heads -----------------------------------------------------

    def attach_rrh(self, rrh_id: str, vnf_id: str) -> None:
        with self._lock:
            rrh = self.rrhs.get(rrh_id)
            if rrh is None:
                raise UnknownRRH(rrh_id)
            if rrh.attached_vnf is not None and rrh.attached_vnf != vnf_id:
                raise RRHBusy(f"{rrh_id} already attached to {rrh.attached_vnf}")
            rrh.attached_vnf = vnf_id

    def detach_rrh(self, rrh_id: str) -> None:
        with self._lock:
            rrh = self.rrhs.get(rrh_id)
            if rrh is None:
                raise UnknownRRH(rrh_id)
            rrh.attached_vnf = None

    # -- introspection ---------------------------------------------------

    def free_capacity(self) -> list[tuple[int, int]]:
        """(vcpus_free, ram_mb_free) per host, ascending host id."""
        with self._lock:
            return [
                (h.vcpus_free, h.ram_mb_free)
                for h in sorted(self.hosts.values(), key=lambda h: h.id)
            ]

    def can_fit(self, flavors: list[Flavor]) -> bool:
        """First-fit dry run: would these VMs all place on current free space?"""
        with self._lock:
            free = {
                h.id: [h.vcpus_free, h.ram_mb_free]
                for h in sorted(self.hosts.values(), key=lambda h: h.id)
            }
        for flavor in flavors:
            placed = False
            for host_id in sorted(free):
                cap = free[host_id]
                if cap[0] >= flavor.vcpus and cap[1] >= flavor.ram_mb:
                    cap[0] -= flavor.vcpus
                    cap[1] -= flavor.ram_mb
                    placed = True
                    break
            if not placed:
                return False
        return True

    def snapshot(self) -> dict[str, Any]:
        """Resource-state snapshot for leak checks; id counters excluded."""
        with self._lock:
            return {
                "hosts": [
                    {
                        "id": h.id,
                        "vcpus_total": h.vcpus_total,
                        "vcpus_free": h.vcpus_free,
                        "ram_mb_total": h.ram_mb_total,
                        "ram_mb_free": h.ram_mb_free,
                    }
                    for h in sorted(self.hosts.values(), key=lambda h: h.id)
                ],
                "networks": [
                    {
                        "cidr": n.cidr,
                        "role": n.role.value,
                        "assigned": sorted(n.assigned),
                    }
                    for n in sorted(self.networks.values(), key=lambda n: n.id)
                ],
                "rrhs": [
                    {"id": r.id, "attached_vnf": r.attached_vnf}
                    for r in sorted(self.rrhs.values(), key=lambda r: r.id)
                ],
                "vm_count": len(self.vms),
            }
