"""In-process event log and fan-out bus.

Every state change of interest is appended to a bounded log and pushed to
live subscribers. The log is the system's measurement surface: downtime and
ordering assertions read it rather than instrumenting the engines.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator


@dataclass(frozen=True)
class Event:
    ts: float
    entity_kind: str  # "ns" | "vnf" | "vm" | "alarm" | "task" | "slice" | "swap"
    entity_id: str
    event: str
    data: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ts": self.ts,
            "entity_kind": self.entity_kind,
            "entity_id": self.entity_id,
            "event": self.event,
            "data": dict(self.data),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class EventBus:
    def __init__(self, log_limit: int = 100_000):
        self.log_limit = log_limit
        self._log: list[Event] = []
        self._subscribers: list[queue.Queue[Event]] = []
        self._hooks: list[Callable[[Event], None]] = []
        self._lock = threading.RLock()

    def publish(self, event: Event) -> None:
        with self._lock:
            if len(self._log) < self.log_limit:
                self._log.append(event)
            subscribers = list(self._subscribers)
            hooks = list(self._hooks)
        for q in subscribers:
            q.put(event)
        for hook in hooks:
            hook(event)

    def emit(
        self,
        ts: float,
        entity_kind: str,
        entity_id: str,
        event: str,
        **data: Any,
    ) -> Event:
        ev = Event(ts=ts, entity_kind=entity_kind, entity_id=entity_id, event=event, data=data)
        self.publish(ev)
        return ev

    def subscribe(self) -> "queue.Queue[Event]":
        q: queue.Queue[Event] = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: "queue.Queue[Event]") -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def add_hook(self, hook: Callable[[Event], None]) -> None:
        with self._lock:
            self._hooks.append(hook)

    def log(
        self, entity_kind: str | None = None, entity_id: str | None = None
    ) -> list[Event]:
        with self._lock:
            out: Iterator[Event] = iter(self._log)
            if entity_kind is not None:
                out = (e for e in out if e.entity_kind == entity_kind)
            if entity_id is not None:
                out = (e for e in out if e.entity_id == entity_id)
            return list(out)

    def export_log(self) -> str:
        with self._lock:
            return "\n".join(e.to_json() for e in self._log)
