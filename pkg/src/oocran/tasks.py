"""Serialized work queue decoupling decisions from driver execution.

Tasks targeting the same network service run strictly in submission order;
tasks for different services may interleave. A failed attempt retries in
place, so a task never loses its position in its service's line.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping

from .errors import UnknownNS, UnknownTask


class TaskKind(str, Enum):
    DEPLOY_VNF = "DEPLOY_VNF"
    DELETE_VNF = "DELETE_VNF"
    RECONFIGURE_VNF = "RECONFIGURE_VNF"
    ALLOCATE_SLICE = "ALLOCATE_SLICE"
    RELEASE_SLICE = "RELEASE_SLICE"
    RUN_ACTUATOR = "RUN_ACTUATOR"


class TaskState(str, Enum):
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    DONE = "DONE"
    FAILED = "FAILED"


@dataclass
class Task:
    task_id: str
    ns_id: str
    kind: TaskKind
    payload: dict[str, Any] = field(default_factory=dict)
    attempts: int = 0
    state: TaskState = TaskState.QUEUED
    error: str | None = None
    result: dict[str, Any] | None = None
    submitted_at: float = 0.0
    finished_at: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "ns_id": self.ns_id,
            "kind": self.kind.value,
            "payload": dict(self.payload),
            "attempts": self.attempts,
            "state": self.state.value,
            "error": self.error,
            "result": dict(self.result) if self.result is not None else None,
            "submitted_at": self.submitted_at,
            "finished_at": self.finished_at,
        }


#: driver(task) -> result dict; raises to signal a failed attempt
Driver = Callable[[Task], dict[str, Any]]


class TaskQueue:
    """FIFO-per-service task scheduler with bounded in-place retry.

    ``liveness`` guards enqueue: when set, submitting work for a service it
    rejects raises UnknownNS. ``on_failed`` fires once per task that
    exhausts its retries.
    """

    def __init__(
        self,
        max_retries: int = 3,
        liveness: Callable[[str], bool] | None = None,
        on_failed: Callable[[Task], None] | None = None,
    ):
        self.max_retries = max_retries
        self.liveness = liveness
        self.on_failed = on_failed
        self._tasks: dict[str, Task] = {}
        self._order: list[str] = []  # global submission order
        self._serial = 0
        self._lock = threading.RLock()

    def enqueue(
        self,
        ns_id: str,
        kind: TaskKind,
        payload: Mapping[str, Any] | None = None,
        now: float = 0.0,
    ) -> Task:
        with self._lock:
            if self.liveness is not None and not self.liveness(ns_id):
                raise UnknownNS(ns_id)
            self._serial += 1
            task = Task(
                task_id=f"task-{self._serial:06d}",
                ns_id=ns_id,
                kind=kind,
                payload=dict(payload or {}),
                submitted_at=now,
            )
            self._tasks[task.task_id] = task
            self._order.append(task.task_id)
            return task

    def get(self, task_id: str) -> Task:
        with self._lock:
            try:
                return self._tasks[task_id]
            except KeyError:
                raise UnknownTask(task_id) from None

    def tasks(self, ns_id: str | None = None) -> list[Task]:
        with self._lock:
            ordered = [self._tasks[tid] for tid in self._order]
            if ns_id is not None:
                ordered = [t for t in ordered if t.ns_id == ns_id]
            return ordered

    def pending_count(self) -> int:
        with self._lock:
            return sum(
                1
                for t in self._tasks.values()
                if t.state in (TaskState.QUEUED, TaskState.RUNNING)
            )

    def _next_eligible(self) -> Task | None:
        """Oldest QUEUED task with no earlier unfinished task of its NS."""
        busy: set[str] = set()
        for tid in self._order:
            task = self._tasks[tid]
            if task.state in (TaskState.DONE, TaskState.FAILED):
                continue
            if task.ns_id in busy:
                continue
            if task.state is TaskState.RUNNING:
                # head of this service's line is mid-attempt elsewhere
                busy.add(task.ns_id)
                continue
            return task
        return None

    def run_worker_step(
        self, drivers: Mapping[TaskKind, Driver], now: float = 0.0
    ) -> Task | None:
        """Execute one attempt of the next eligible task.

        Returns the task touched, or None when nothing is eligible. The
        driver runs outside the queue lock; task selection marks the task
        RUNNING first so concurrent workers never pick the same one.
        """
        with self._lock:
            task = self._next_eligible()
            if task is None:
                return None
            task.state = TaskState.RUNNING
            task.attempts += 1
        driver = drivers.get(task.kind)
        try:
            if driver is None:
                raise UnknownTask(f"no driver for {task.kind.value}")
            result = driver(task)
        except Exception as exc:
            failed = None
            with self._lock:
                if task.attempts > self.max_retries:
                    task.state = TaskState.FAILED
                    task.error = str(exc)
                    task.finished_at = now
                    failed = task
                else:
                    task.state = TaskState.QUEUED  # retry in place
                    task.error = str(exc)
            if failed is not None and self.on_failed is not None:
                self.on_failed(failed)
            return task
        with self._lock:
            task.state = TaskState.DONE
            task.result = result
            task.error = None
            task.finished_at = now
            return task

    def drain(
        self, drivers: Mapping[TaskKind, Driver], now: float = 0.0, limit: int = 10_000
    ) -> int:
        """Run worker steps until idle; returns the number of attempts made."""
        steps = 0
        while steps < limit:
            if self.run_worker_step(drivers, now=now) is None:
                return steps
            steps += 1
        return steps

    def cancel_pending(self, ns_id: str, reason: str, now: float = 0.0) -> list[Task]:
        """Fail every QUEUED task of one service without running it.

        Used when the service itself has failed; the on_failed callback is
        deliberately not invoked for cancellations.
        """
        cancelled: list[Task] = []
        with self._lock:
            for tid in self._order:
                task = self._tasks[tid]
                if task.ns_id == ns_id and task.state is TaskState.QUEUED:
                    task.state = TaskState.FAILED
                    task.error = f"cancelled: {reason}"
                    task.finished_at = now
                    cancelled.append(task)
        return cancelled

    def export_log(self) -> str:
        """All tasks ever submitted, in order, one JSON object per line."""
        with self._lock:
            return "\n".join(
                json.dumps(self._tasks[tid].to_dict(), sort_keys=True)
                for tid in self._order
            )
