"""Radio resource pool: spectrum slicing, free-space propagation, link budgets.

Propagation is Friis free-space loss between isotropic antennas; the noise
floor is thermal (-174 dBm/Hz) with an ideal 0 dB receiver noise figure. A
link is operational when its SNR clears a configurable threshold standing in
for the block-error-rate check of a real receiver.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace
from typing import Any

from .errors import DomainError, PowerExceedsLimit, SpectrumExhausted, UnknownSlice

SPEED_OF_LIGHT_M_S = 299_792_458.0

#: 20*log10(4*pi/c), the frequency/distance-independent term of Friis loss.
_FSPL_CONST_DB = 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT_M_S)

THERMAL_NOISE_DBM_PER_HZ = -174.0

DEFAULT_SNR_THRESHOLD_DB = 10.0


def fspl_db(distance_m: float, frequency_hz: float) -> float:
    """Free-space path loss in dB between isotropic antennas."""
    if distance_m <= 0:
        raise DomainError(f"distance_m must be positive, got {distance_m}")
    if frequency_hz <= 0:
        raise DomainError(f"frequency_hz must be positive, got {frequency_hz}")
    return 20.0 * math.log10(distance_m) + 20.0 * math.log10(frequency_hz) + _FSPL_CONST_DB


def thermal_noise_dbm(bandwidth_hz: float) -> float:
    """Noise floor of an ideal receiver over the given bandwidth."""
    if bandwidth_hz <= 0:
        raise DomainError(f"bandwidth_hz must be positive, got {bandwidth_hz}")
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth_hz)


def coverage_area_m2(cell_radius_m: float) -> float:
    """Disc coverage of one omnidirectional cell."""
    if cell_radius_m < 0:
        raise DomainError(f"cell_radius_m must be non-negative, got {cell_radius_m}")
    return math.pi * cell_radius_m * cell_radius_m


@dataclass(frozen=True)
class LinkBudget:
    tx_power_dbm: float
    frequency_hz: float
    distance_m: float
    bandwidth_hz: float
    rx_power_dbm: float
    noise_dbm: float
    snr_db: float
    operational: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "tx_power_dbm": self.tx_power_dbm,
            "frequency_hz": self.frequency_hz,
            "distance_m": self.distance_m,
            "bandwidth_hz": self.bandwidth_hz,
            "rx_power_dbm": self.rx_power_dbm,
            "noise_dbm": self.noise_dbm,
            "snr_db": self.snr_db,
            "operational": self.operational,
        }


def link_budget(
    tx_power_dbm: float,
    frequency_hz: float,
    distance_m: float,
    bandwidth_hz: float,
    snr_threshold_db: float = DEFAULT_SNR_THRESHOLD_DB,
) -> LinkBudget:
    """Evaluate one line-of-sight link; power may be any real dBm."""
    loss = fspl_db(distance_m, frequency_hz)
    rx = tx_power_dbm - loss
    noise = thermal_noise_dbm(bandwidth_hz)
    snr = rx - noise
    return LinkBudget(
        tx_power_dbm=tx_power_dbm,
        frequency_hz=frequency_hz,
        distance_m=distance_m,
        bandwidth_hz=bandwidth_hz,
        rx_power_dbm=rx,
        noise_dbm=noise,
        snr_db=snr,
        operational=snr >= snr_threshold_db,
    )


@dataclass(frozen=True)
class SpectrumSlice:
    id: str
    f_low_hz: float
    f_high_hz: float
    tx_power_dbm: float
    location: tuple[float, float]
    owner_vnf: str

    @property
    def bandwidth_hz(self) -> float:
        return self.f_high_hz - self.f_low_hz

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "f_low_hz": self.f_low_hz,
            "f_high_hz": self.f_high_hz,
            "tx_power_dbm": self.tx_power_dbm,
            "location": list(self.location),
            "owner_vnf": self.owner_vnf,
        }


def _distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


class RadioPool:
    """Frequency-domain resource pool with distance-gated reuse.

    Two slices may share spectrum only if their locations are farther apart
    than ``reuse_distance_m``; within that distance they must not overlap in
    frequency. Allocation is first-fit at the lowest free frequency, which
    keeps the pool deterministic under identical call sequences.
    """

    def __init__(
        self,
        f_start_hz: float,
        f_end_hz: float,
        reuse_distance_m: float = 60.0,
        rrh_limits: list[tuple[float, float, float]] | None = None,
        max_tx_power_dbm: float | None = None,
    ):
        if not f_start_hz < f_end_hz:
            raise DomainError("pool requires f_start_hz < f_end_hz")
        if reuse_distance_m <= 0:
            raise DomainError("reuse_distance_m must be positive")
        self.f_start_hz = f_start_hz
        self.f_end_hz = f_end_hz
        self.reuse_distance_m = reuse_distance_m
        #: (x, y, max_tx_power_dbm) per serving radio head; the nearest one
        #: caps a slice's transmit power. Empty list falls back to the pool cap.
        self.rrh_limits = list(rrh_limits or [])
        self.max_tx_power_dbm = max_tx_power_dbm
        self.slices: dict[str, SpectrumSlice] = {}
        self._serial = 0
        self._lock = threading.RLock()

    def _power_limit_at(self, location: tuple[float, float]) -> float | None:
        if self.rrh_limits:
            _, _, limit = min(
                self.rrh_limits, key=lambda r: (_distance((r[0], r[1]), location), r[2])
            )
            return limit
        return self.max_tx_power_dbm

    def allocate(
        self,
        bandwidth_hz: float,
        location: tuple[float, float],
        tx_power_dbm: float,
        owner_vnf: str,
    ) -> SpectrumSlice:
        if bandwidth_hz <= 0:
            raise DomainError(f"bandwidth_hz must be positive, got {bandwidth_hz}")
        with self._lock:
            limit = self._power_limit_at(location)
            if limit is not None and tx_power_dbm > limit:
                raise PowerExceedsLimit(
                    f"tx power {tx_power_dbm} dBm exceeds serving limit {limit} dBm"
                )
            # Only slices close enough to interfere constrain the search.
            blockers = sorted(
                (
                    s
                    for s in self.slices.values()
                    if _distance(s.location, location) <= self.reuse_distance_m
                ),
                key=lambda s: s.f_low_hz,
            )
            candidate = self.f_start_hz
            for s in blockers:
                if candidate + bandwidth_hz <= s.f_low_hz:
                    break
                candidate = max(candidate, s.f_high_hz)
            if candidate + bandwidth_hz > self.f_end_hz:
                raise SpectrumExhausted(
                    f"no {bandwidth_hz:.0f} Hz gap free at {location} within "
                    f"[{self.f_start_hz:.0f}, {self.f_end_hz:.0f}] Hz"
                )
            self._serial += 1
            s = SpectrumSlice(
                id=f"slice-{self._serial:06d}",
                f_low_hz=candidate,
                f_high_hz=candidate + bandwidth_hz,
                tx_power_dbm=tx_power_dbm,
                location=(float(location[0]), float(location[1])),
                owner_vnf=owner_vnf,
            )
            self.slices[s.id] = s
            return s

    def release(self, slice_id: str) -> None:
        with self._lock:
            if slice_id not in self.slices:
                raise UnknownSlice(slice_id)
            del self.slices[slice_id]

    def update_power(self, slice_id: str, tx_power_dbm: float) -> SpectrumSlice:
        with self._lock:
            s = self.slices.get(slice_id)
            if s is None:
                raise UnknownSlice(slice_id)
            limit = self._power_limit_at(s.location)
            if limit is not None and tx_power_dbm > limit:
                raise PowerExceedsLimit(
                    f"tx power {tx_power_dbm} dBm exceeds serving limit {limit} dBm"
                )
            updated = replace(s, tx_power_dbm=tx_power_dbm)
            self.slices[slice_id] = updated
            return updated

    def get(self, slice_id: str) -> SpectrumSlice:
        with self._lock:
            s = self.slices.get(slice_id)
            if s is None:
                raise UnknownSlice(slice_id)
            return s

    def snapshot(self) -> dict[str, Any]:
        """Resource-state snapshot for leak checks; the id counter is excluded."""
        with self._lock:
            return {
                "f_start_hz": self.f_start_hz,
                "f_end_hz": self.f_end_hz,
                "reuse_distance_m": self.reuse_distance_m,
                "slices": sorted(
                    (
                        {
                            "f_low_hz": s.f_low_hz,
                            "f_high_hz": s.f_high_hz,
                            "tx_power_dbm": s.tx_power_dbm,
                            "location": list(s.location),
                        }
                        for s in self.slices.values()
                    ),
                    key=lambda d: (d["f_low_hz"], d["location"]),
                ),
            }
