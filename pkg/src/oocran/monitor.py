"""Metric ingestion, threshold rules, alarm generation, and webhook delivery.

Rules are edge-triggered: a rule fires once when its predicate has held for
the configured number of consecutive samples, then stays silent until the
predicate fails at least once. Each fired alarm carries the rule's actuator
binding identifier.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import threading
import time
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Mapping

from .errors import DeliveryFailed, StaleSample
from .model import Alarm


@dataclass(frozen=True)
class MetricSample:
    vnf_id: str
    metric: str
    value: float
    ts: float

    def to_dict(self) -> dict[str, Any]:
        return {"vnf_id": self.vnf_id, "metric": self.metric, "value": self.value, "ts": self.ts}


class Predicate(str, Enum):
    GT = "GT"
    LT = "LT"
    GTE = "GTE"
    LTE = "LTE"

    def holds(self, value: float, threshold: float) -> bool:
        if self is Predicate.GT:
            return value > threshold
        if self is Predicate.LT:
            return value < threshold
        if self is Predicate.GTE:
            return value >= threshold
        return value <= threshold


@dataclass(frozen=True)
class AlertRule:
    rule_id: str
    metric: str
    predicate: Predicate
    threshold: float
    consecutive: int
    alarm_id: str

    def __post_init__(self) -> None:
        if self.consecutive < 1:
            raise ValueError("consecutive must be >= 1")


@dataclass
class WebhookEndpoint:
    url: str
    secret: str

    def __post_init__(self) -> None:
        if not self.secret:
            raise ValueError("webhook endpoint requires a non-empty secret")


@dataclass
class _RuleState:
    run_length: int = 0
    firing: bool = False


class Monitor:
    """Per-stream sample store with windowed rule evaluation.

    Streams are keyed (vnf_id, metric) and retained in a bounded ring
    buffer. Ingestion for distinct streams may interleave freely; samples
    within one stream must have non-decreasing timestamps.
    """

    def __init__(self, retention: int = 10_000, journal_path: str | Path | None = None):
        self.retention = retention
        self._streams: dict[tuple[str, str], deque[MetricSample]] = {}
        self._rules: dict[str, AlertRule] = {}
        # rule evaluation state per (rule_id, vnf_id)
        self._rule_state: dict[tuple[str, str], _RuleState] = {}
        self._journal_path = Path(journal_path) if journal_path else None
        self._lock = threading.RLock()

    # -- rules -------------------------------------------------------------

    def add_rule(self, rule: AlertRule) -> None:
        with self._lock:
            for existing in self._rules.values():
                if existing.alarm_id == rule.alarm_id and existing.rule_id != rule.rule_id:
                    raise ValueError(
                        f"alarm_id {rule.alarm_id!r} already bound by rule {existing.rule_id!r}"
                    )
            self._rules[rule.rule_id] = rule

    def remove_rule(self, rule_id: str) -> None:
        with self._lock:
            self._rules.pop(rule_id, None)
            for key in [k for k in self._rule_state if k[0] == rule_id]:
                del self._rule_state[key]

    def update_rule_threshold(self, rule_id: str, threshold: float) -> AlertRule:
        with self._lock:
            rule = self._rules.get(rule_id)
            if rule is None:
                raise KeyError(rule_id)
            updated = replace(rule, threshold=threshold)
            self._rules[rule_id] = updated
            return updated

    def rules(self) -> list[AlertRule]:
        with self._lock:
            return list(self._rules.values())

    # -- ingestion -----------------------------------------------------------

    def ingest(self, sample: MetricSample) -> list[Alarm]:
        """Append a sample to its stream and re-evaluate the rules on it.

        Returns the alarms fired by this sample. Delivery is the caller's
        job, so a slow webhook can never block ingestion.
        """
        with self._lock:
            key = (sample.vnf_id, sample.metric)
            stream = self._streams.get(key)
            if stream is None:
                stream = deque(maxlen=self.retention)
                self._streams[key] = stream
            if stream and sample.ts < stream[-1].ts:
                raise StaleSample(
                    f"ts {sample.ts} < last ts {stream[-1].ts} for stream {key}"
                )
            stream.append(sample)
            if self._journal_path is not None:
                with self._journal_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(sample.to_dict(), sort_keys=True) + "\n")

            fired: list[Alarm] = []
            for rule in self._rules.values():
                if rule.metric != sample.metric:
                    continue
                state = self._rule_state.setdefault(
                    (rule.rule_id, sample.vnf_id), _RuleState()
                )
                if rule.predicate.holds(sample.value, rule.threshold):
                    state.run_length += 1
                    if state.run_length >= rule.consecutive and not state.firing:
                        state.firing = True
                        fired.append(
                            Alarm(
                                alarm_id=rule.alarm_id,
                                rule_id=rule.rule_id,
                                vnf_id=sample.vnf_id,
                                fired_at=sample.ts,
                                payload={
                                    "metric": sample.metric,
                                    "value": sample.value,
                                    "threshold": rule.threshold,
                                },
                            )
                        )
                else:
                    state.run_length = 0
                    state.firing = False
            return fired

    # -- queries ---------------------------------------------------------

    def query(self, vnf_id: str, metric: str, start: float, end: float) -> list[MetricSample]:
        """Samples in [start, end], both ends inclusive, ascending ts."""
        if start > end:
            raise ValueError("window start must be <= end")
        with self._lock:
            stream = self._streams.get((vnf_id, metric), ())
            return [s for s in stream if start <= s.ts <= end]

    def latest(self, vnf_id: str, metric: str) -> MetricSample | None:
        with self._lock:
            stream = self._streams.get((vnf_id, metric))
            return stream[-1] if stream else None

    def known_streams(self) -> list[tuple[str, str]]:
        with self._lock:
            return sorted(self._streams)


# -- webhook signing and delivery ------------------------------------------

def canonical_alert_body(alarm: Alarm) -> dict[str, Any]:
    """Wire body of an alarm callback, before signing."""
    return {
        "alarm_id": alarm.alarm_id,
        "rule_id": alarm.rule_id,
        "vnf_id": alarm.vnf_id,
        "fired_at": alarm.fired_at,
        "payload": dict(alarm.payload),
    }


def _canonical_bytes(body: Mapping[str, Any]) -> bytes:
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


def sign_alert(body: Mapping[str, Any], secret: str) -> str:
    """Hex HMAC-SHA256 of the canonical JSON body under the shared secret."""
    unsigned = {k: v for k, v in body.items() if k != "signature"}
    return hmac.new(secret.encode("utf-8"), _canonical_bytes(unsigned), hashlib.sha256).hexdigest()


def verify_alert(body: Mapping[str, Any], signature: str, secret: str) -> bool:
    return hmac.compare_digest(sign_alert(body, secret), signature)


@dataclass(frozen=True)
class DeliveryReceipt:
    alarm: Alarm
    accepted: bool
    attempts: int
    response: Mapping[str, Any] = field(default_factory=dict)


#: transport(url, signed_body) -> (status_code, response_body)
Transport = Callable[[str, dict[str, Any]], tuple[int, Mapping[str, Any]]]


def http_transport(url: str, body: dict[str, Any]) -> tuple[int, Mapping[str, Any]]:
    import httpx

    resp = httpx.post(url, json=body, timeout=10.0)
    try:
        payload = resp.json()
    except ValueError:
        payload = {"text": resp.text}
    return resp.status_code, payload


class WebhookDeliverer:
    """Signed callback delivery with bounded retries and a dead-letter list.

    A definitive rejection (bad credentials, unknown alarm) is a final
    answer and is not retried; only transport failures and 5xx responses
    are, up to ``max_retries`` extra attempts with a fixed backoff.
    """

    def __init__(
        self,
        endpoint: WebhookEndpoint,
        transport: Transport = http_transport,
        max_retries: int = 3,
        backoff_s: float = 0.0,
    ):
        self.endpoint = endpoint
        self.transport = transport
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.dead_letters: list[Alarm] = []

    def deliver(self, alarm: Alarm) -> DeliveryReceipt:
        body = canonical_alert_body(alarm)
        body["signature"] = sign_alert(body, self.endpoint.secret)
        attempts = 0
        last_error: Exception | None = None
        while attempts < self.max_retries + 1:
            attempts += 1
            try:
                status, payload = self.transport(self.endpoint.url, body)
            except Exception as exc:  # transport failure: retry
                last_error = exc
            else:
                if status < 500:
                    return DeliveryReceipt(
                        alarm=alarm,
                        accepted=200 <= status < 300,
                        attempts=attempts,
                        response=payload,
                    )
                last_error = DeliveryFailed(f"server error {status}")
            if self.backoff_s > 0 and attempts <= self.max_retries:
                time.sleep(self.backoff_s)
        self.dead_letters.append(alarm)
        raise DeliveryFailed(
            f"alarm {alarm.alarm_id} undelivered after {attempts} attempts: {last_error}"
        )
