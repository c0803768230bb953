"""Orchestration service for virtualized wireless networks.

Deploys network services of chained virtual functions onto simulated
compute and spectrum, watches their metrics, reacts to alarms through
actuators, and plans, times, and swaps whole wireless infrastructures.
"""

from .engine import EngineConfig, Orchestrator
from .errors import OocranError
from .events import Event, EventBus
from .model import (
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
    validate_descriptor,
)
from .monitor import AlertRule, MetricSample, Monitor, Predicate
from .planner import (
    DeploymentPlan,
    SwapReport,
    SwapStrategy,
    TimeModel,
    TimeModelMode,
    VWIDescriptor,
    VWIRepository,
    estimate_setup_time,
    plan_vwi,
)
from .rf import LinkBudget, RadioPool, SpectrumSlice, fspl_db, link_budget
from .runner import SimulationRunner
from .scenario import build_orchestrator, default_scenario, load_descriptor, load_scenario
from .tasks import Task, TaskKind, TaskQueue, TaskState
from .vim import Clock, ClockMode, ComputeHost, RRHDevice, VimSim

__version__ = "0.1.0"

__all__ = [
    "Actuator",
    "ActuatorAction",
    "Alarm",
    "AlertRule",
    "Clock",
    "ClockMode",
    "ComputeHost",
    "DeploymentPlan",
    "EngineConfig",
    "Event",
    "EventBus",
    "Flavor",
    "LinkBudget",
    "MetricSample",
    "Monitor",
    "NSDescriptor",
    "NetworkDef",
    "NetworkRole",
    "NetworkService",
    "NsState",
    "OocranError",
    "Orchestrator",
    "Predicate",
    "RRHDevice",
    "RadioPool",
    "RadioRequirements",
    "SimulationRunner",
    "SpectrumSlice",
    "SwapReport",
    "SwapStrategy",
    "Task",
    "TaskKind",
    "TaskQueue",
    "TaskState",
    "TimeModel",
    "TimeModelMode",
    "VNFDescriptor",
    "VNFInstance",
    "VWIDescriptor",
    "VWIRepository",
    "VimSim",
    "VnfRole",
    "VnfState",
    "build_orchestrator",
    "default_scenario",
    "estimate_setup_time",
    "fspl_db",
    "link_budget",
    "load_descriptor",
    "load_scenario",
    "plan_vwi",
    "validate_descriptor",
]
