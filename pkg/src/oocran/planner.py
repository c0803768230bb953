"""Deployment planning for virtual wireless infrastructures.

Turns a coverage target into a cell count, a hexagonal eNodeB layout, and a
setup-time estimate, and provides swap strategies plus a descriptor
repository for demand-matched reuse. All functions here are pure; executing
a plan against live infrastructure is the orchestration engine's job.
"""

from __future__ import annotations

import math
import statistics
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

from .errors import DomainError, EmptyRepository
from .rf import coverage_area_m2

#: measured seconds to bring up a service of N cells, used as the default
#: anchor set for setup-time estimation
DEFAULT_SETUP_TABLE: tuple[tuple[int, float], ...] = (
    (1, 30.12),
    (5, 33.49),
    (10, 45.87),
    (20, 60.19),
    (30, 84.63),
)

DEFAULT_CELL_RADIUS_M = 30.0
DEFAULT_CHANNEL_BANDWIDTH_HZ = 1.4e6


@dataclass(frozen=True)
class VWIDescriptor:
    name: str
    target_area_m2: float
    cell_radius_m: float = DEFAULT_CELL_RADIUS_M
    channel_bandwidth_hz: float = DEFAULT_CHANNEL_BANDWIDTH_HZ
    traffic_profile: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.target_area_m2 <= 0:
            raise DomainError("target_area_m2 must be positive")
        if self.cell_radius_m <= 0:
            raise DomainError("cell_radius_m must be positive")
        if self.channel_bandwidth_hz <= 0:
            raise DomainError("channel_bandwidth_hz must be positive")
        object.__setattr__(self, "traffic_profile", dict(self.traffic_profile))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "target_area_m2": self.target_area_m2,
            "cell_radius_m": self.cell_radius_m,
            "channel_bandwidth_hz": self.channel_bandwidth_hz,
            "traffic_profile": dict(self.traffic_profile),
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "VWIDescriptor":
        return cls(
            name=raw["name"],
            target_area_m2=float(raw["target_area_m2"]),
            cell_radius_m=float(raw.get("cell_radius_m", DEFAULT_CELL_RADIUS_M)),
            channel_bandwidth_hz=float(
                raw.get("channel_bandwidth_hz", DEFAULT_CHANNEL_BANDWIDTH_HZ)
            ),
            traffic_profile=dict(raw.get("traffic_profile", {})),
        )


class TimeModelMode(str, Enum):
    TABLE = "TABLE"
    LINEAR = "LINEAR"


@dataclass(frozen=True)
class TimeModel:
    """Setup-time estimator: anchored table or fitted line.

    TABLE mode is exact at the anchors and piecewise linear elsewhere;
    LINEAR mode is a + b*n, reading b as per-cell work on top of a fixed
    orchestration overhead a.
    """

    mode: TimeModelMode
    table: tuple[tuple[int, float], ...] = DEFAULT_SETUP_TABLE
    a_s: float = 0.0
    b_s_per_enodeb: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", tuple((int(n), float(t)) for n, t in self.table))
        if self.mode is TimeModelMode.TABLE:
            if len(self.table) < 2:
                raise DomainError("table mode needs at least two anchors")
            for (n0, t0), (n1, t1) in zip(self.table, self.table[1:]):
                if not (n0 < n1 and t0 < t1):
                    raise DomainError("table anchors must be strictly increasing")
        else:
            if self.b_s_per_enodeb <= 0:
                raise DomainError("per-cell coefficient must be positive")

    @classmethod
    def from_table(cls, table: Sequence[tuple[int, float]] = DEFAULT_SETUP_TABLE) -> "TimeModel":
        return cls(mode=TimeModelMode.TABLE, table=tuple(table))

    @classmethod
    def fit_linear(cls, table: Sequence[tuple[int, float]] = DEFAULT_SETUP_TABLE) -> "TimeModel":
        """Ordinary least squares over the anchor points."""
        xs = [float(n) for n, _ in table]
        ys = [t for _, t in table]
        fit = statistics.linear_regression(xs, ys)
        return cls(
            mode=TimeModelMode.LINEAR,
            table=tuple(table),
            a_s=fit.intercept,
            b_s_per_enodeb=fit.slope,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "table": [[n, t] for n, t in self.table],
            "a_s": self.a_s,
            "b_s_per_enodeb": self.b_s_per_enodeb,
        }


def estimate_setup_time(n: int, tm: TimeModel) -> float:
    """Seconds to bring a service of n cells from request to fully up.

    n=0 costs nothing in either mode. TABLE mode interpolates between
    anchors and extends the nearest edge segment beyond them.
    """
    if n < 0:
        raise DomainError("cell count must be >= 0")
    if n == 0:
        return 0.0
    if tm.mode is TimeModelMode.LINEAR:
        return tm.a_s + tm.b_s_per_enodeb * n
    anchors = tm.table
    if n <= anchors[0][0]:
        (n0, t0), (n1, t1) = anchors[0], anchors[1]
    elif n >= anchors[-1][0]:
        (n0, t0), (n1, t1) = anchors[-2], anchors[-1]
    else:
        for (n0, t0), (n1, t1) in zip(anchors, anchors[1:]):
            if n0 <= n <= n1:
                break
    if n == n0:
        return t0
    if n == n1:
        return t1
    slope = (t1 - t0) / (n1 - n0)
    return t0 + slope * (n - n0)


def boot_schedule(n: int, tm: TimeModel) -> list[float]:
    """Per-cell boot deadlines: the k-th cell comes up when a k-cell
    service would be complete, so the full service lands at the model's
    total exactly.
    """
    return [estimate_setup_time(k, tm) for k in range(1, n + 1)]


@dataclass(frozen=True)
class DeploymentPlan:
    n_enodebs: int
    placements: tuple[tuple[float, float], ...]
    covered_area_m2: float
    estimated_setup_s: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_enodebs": self.n_enodebs,
            "placements": [[x, y] for x, y in self.placements],
            "covered_area_m2": self.covered_area_m2,
            "estimated_setup_s": self.estimated_setup_s,
        }


def cell_count(target_area_m2: float, cell_radius_m: float) -> int:
    if target_area_m2 <= 0 or cell_radius_m <= 0:
        raise DomainError("area and radius must be positive")
    return max(1, math.ceil(target_area_m2 / coverage_area_m2(cell_radius_m)))


def hex_placements(n: int, cell_radius_m: float) -> tuple[tuple[float, float], ...]:
    """First n sites of a hexagonal lattice with pitch sqrt(3)*r, nearest
    the origin first. Pitch > r keeps every pair at least one radius apart.
    """
    if n <= 0:
        return ()
    pitch = math.sqrt(3.0) * cell_radius_m
    row_step = pitch * math.sqrt(3.0) / 2.0
    points: list[tuple[float, float]] = []
    reach = 2
    while len(points) < n:
        points.clear()
        for j in range(-reach, reach + 1):
            y = j * row_step
            x_off = (pitch / 2.0) if (j % 2) else 0.0
            for i in range(-reach, reach + 1):
                points.append((i * pitch + x_off, y))
        reach += 1
    points.sort(key=lambda p: (math.hypot(p[0], p[1]), p[0], p[1]))
    return tuple(points[:n])


def plan_vwi(desc: VWIDescriptor, tm: TimeModel) -> DeploymentPlan:
    n = cell_count(desc.target_area_m2, desc.cell_radius_m)
    return DeploymentPlan(
        n_enodebs=n,
        placements=hex_placements(n, desc.cell_radius_m),
        covered_area_m2=n * coverage_area_m2(desc.cell_radius_m),
        estimated_setup_s=estimate_setup_time(n, tm),
    )


def export_plan_text(plan: DeploymentPlan) -> str:
    lines = [
        f"cells: {plan.n_enodebs}",
        f"covered_area_m2: {plan.covered_area_m2:.2f}",
        f"estimated_setup_s: {plan.estimated_setup_s:.2f}",
        "placements:",
    ]
    lines.extend(f"  - [{x:.2f}, {y:.2f}]" for x, y in plan.placements)
    return "\n".join(lines)


class SwapStrategy(str, Enum):
    HARD = "HARD"
    SOFT_HANDOVER = "SOFT_HANDOVER"
    REPOSITORY = "REPOSITORY"


@dataclass(frozen=True)
class SwapReport:
    strategy: SwapStrategy
    downtime_s: float
    peak_resource_overlap: int
    old_ns_id: str = ""
    new_ns_id: str = ""
    selected_descriptor: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "strategy": self.strategy.value,
            "downtime_s": self.downtime_s,
            "peak_resource_overlap": self.peak_resource_overlap,
            "old_ns_id": self.old_ns_id,
            "new_ns_id": self.new_ns_id,
            "selected_descriptor": self.selected_descriptor,
        }


def predict_swap(
    old_vm_count: int, new_plan: DeploymentPlan, strategy: SwapStrategy, tm: TimeModel
) -> SwapReport:
    """Pre-commit preview of a swap's cost; live numbers come from the
    orchestration engine's event log after execution.
    """
    new_count = new_plan.n_enodebs
    if strategy is SwapStrategy.HARD:
        return SwapReport(
            strategy=strategy,
            downtime_s=estimate_setup_time(new_count, tm),
            peak_resource_overlap=max(old_vm_count, new_count),
        )
    return SwapReport(
        strategy=strategy,
        downtime_s=0.0,
        peak_resource_overlap=old_vm_count + new_count,
    )


class VWIRepository:
    """Named descriptor store selectable by nearest traffic profile.

    Distance is Euclidean over per-field normalized numeric values; a field
    absent from a profile counts as zero. First-inserted wins ties.
    """

    def __init__(self) -> None:
        self._entries: list[VWIDescriptor] = []
        self._lock = threading.RLock()

    def put(self, desc: VWIDescriptor) -> None:
        with self._lock:
            self._entries = [e for e in self._entries if e.name != desc.name]
            self._entries.append(desc)

    def entries(self) -> list[VWIDescriptor]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def select(self, profile: Mapping[str, float]) -> VWIDescriptor:
        with self._lock:
            if not self._entries:
                raise EmptyRepository("no descriptors stored")
            fields: set[str] = set(profile)
            for entry in self._entries:
                fields.update(entry.traffic_profile)
            scales = {
                f: max(
                    [abs(float(profile.get(f, 0.0)))]
                    + [abs(float(e.traffic_profile.get(f, 0.0))) for e in self._entries]
                )
                or 1.0
                for f in fields
            }
            best: VWIDescriptor | None = None
            best_d = math.inf
            for entry in self._entries:
                d = math.sqrt(
                    sum(
                        (
                            (float(entry.traffic_profile.get(f, 0.0)) - float(profile.get(f, 0.0)))
                            / scales[f]
                        )
                        ** 2
                        for f in fields
                    )
                )
                if d < best_d:
                    best, best_d = entry, d
            assert best is not None
            return best
