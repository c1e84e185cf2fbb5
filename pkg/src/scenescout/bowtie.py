"""Bow-tie hazard model and dynamic risk scoring.

The hazard chain is threats -> preventive barriers -> top event -> mitigation
barriers -> consequence.  Event probabilities are conditioned on the runtime
detector state (health-monitor signal, per-camera fault flags, radar health,
weather, road segment), so the hazard rate and the risk score built from it
track the scene instead of being design-time constants.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Mapping, Sequence


class LutDomainError(ValueError):
    """Lookup outside a table's declared domain."""


@dataclass(frozen=True)
class Lut1D:
    """Total lookup table over a closed interval, stored as contiguous bins.

    Bin ``i`` covers ``[edges[i], edges[i+1])``; the final bin is closed on
    the right so the whole domain ``[edges[0], edges[-1]]`` is mapped.
    """

    edges: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0 or len(self.edges) != len(self.values) + 1:
            raise ValueError("lut needs n+1 edges for n values")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("lut edges must be strictly increasing")

    @property
    def domain(self) -> tuple[float, float]:
        return self.edges[0], self.edges[-1]

    def lookup(self, x: float) -> float:
        if x < self.edges[0] or x > self.edges[-1]:
            raise LutDomainError(
                f"value {x} outside lut domain [{self.edges[0]}, {self.edges[-1]}]"
            )
        index = bisect_right(self.edges, x) - 1
        if index == len(self.values):  # right edge of the final bin
            index -= 1
        return self.values[index]


@dataclass(frozen=True)
class Threat:
    """A hazard source whose occurrence rate depends on the road segment."""

    id: str
    description: str
    frequency: Lut1D  # rate per time unit, keyed on the road-segment coordinate

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.frequency.values):
            raise ValueError(f"threat {self.id}: negative frequency")


@dataclass(frozen=True)
class SigmoidBarrier:
    """Barrier whose success tracks the learning component's health monitor.

    Success is ``1 - sigmoid(martingale)`` multiplied, for each active
    detector flag the barrier conditions on, by
    ``P(x|d) / normalizer * sensor_failure_rate``, then clipped into [0, 1].
    Inactive flags contribute nothing (factor 1).
    """

    id: str
    slope: float = 0.049
    midpoint: float = 5.754
    normalizer: float = 0.4
    sensor_failure_rate: float = 1.0
    detector_probs: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.normalizer <= 0:
            raise ValueError(f"barrier {self.id}: normalizer must be positive")
        if not 0.0 <= self.sensor_failure_rate <= 1.0:
            raise ValueError(f"barrier {self.id}: sensor failure rate outside [0, 1]")
        for flag, prob in self.detector_probs.items():
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"barrier {self.id}: P(x|{flag}) outside [0, 1]")


@dataclass(frozen=True)
class EnvLutBarrier:
    """Barrier whose success depends on precipitation bins and radar health."""

    id: str
    radar_ok: Lut1D
    radar_failed: Lut1D

    def __post_init__(self) -> None:
        for lut in (self.radar_ok, self.radar_failed):
            if any(not 0.0 <= v <= 1.0 for v in lut.values):
                raise ValueError(f"barrier {self.id}: success probability outside [0, 1]")
        if self.radar_ok.domain != self.radar_failed.domain:
            raise ValueError(f"barrier {self.id}: radar rows cover different domains")


Barrier = SigmoidBarrier | EnvLutBarrier


@dataclass(frozen=True)
class BowTieModel:
    threats: tuple[Threat, ...]
    preventive: tuple[Barrier, ...]
    mitigation: tuple[Barrier, ...]
    top_event: str = "top_event"
    consequence: str = "consequence"

    def __post_init__(self) -> None:
        if not self.threats:
            raise ValueError("bow-tie model needs at least one threat")
        if not self.preventive or not self.mitigation:
            raise ValueError("bow-tie model needs a barrier on each side")


FLAG_NAMES = (
    "blur_left",
    "blur_center",
    "blur_right",
    "occlusion_left",
    "occlusion_center",
    "occlusion_right",
)


@dataclass(frozen=True)
class DetectorState:
    """Runtime conditioning state for one timestep."""

    martingale: float
    blur: tuple[bool, bool, bool] = (False, False, False)
    occlusion: tuple[bool, bool, bool] = (False, False, False)
    radar_ok: bool = True
    precipitation: float = 0.0
    road_segment: float = 0.0

    def __post_init__(self) -> None:
        if self.martingale < 0:
            raise ValueError("martingale must be non-negative")
        if not 0.0 <= self.precipitation <= 100.0:
            raise ValueError("precipitation must lie in [0, 100]")

    def active_flags(self) -> tuple[str, ...]:
        flags = []
        for name, on in zip(FLAG_NAMES, (*self.blur, *self.occlusion)):
            if on:
                flags.append(name)
        return tuple(flags)


@dataclass(frozen=True)
class InfractionRecord:
    stop_sign: int = 0
    red_light: int = 0
    route_deviation: float = 0.0

    def __post_init__(self) -> None:
        if self.stop_sign < 0 or self.red_light < 0:
            raise ValueError("infraction counts must be non-negative")
        if not 0.0 <= self.route_deviation <= 1.0:
            raise ValueError("route deviation must lie in [0, 1]")


@dataclass(frozen=True)
class RiskBreakdown:
    """Scoring result for one scene: hazard-rate trace and its aggregates."""

    lambda_trace: tuple[tuple[float, float], ...]
    rs: float
    iscore: float
    s_risk: float
    high_risk: bool


def sigmoid_lec(martingale: float, slope: float = 0.049, midpoint: float = 5.754) -> float:
    """Monitor-signal sigmoid; 0.5 exactly at the midpoint, rising with the signal."""
    if martingale < 0:
        raise ValueError("martingale must be non-negative")
    return 1.0 / (1.0 + math.exp(-slope * (martingale - midpoint)))


def barrier_success_prob(barrier: Barrier, state: DetectorState) -> float:
    """Probability the barrier interrupts the hazard chain in ``state``."""
    if isinstance(barrier, SigmoidBarrier):
        success = 1.0 - sigmoid_lec(state.martingale, barrier.slope, barrier.midpoint)
        for flag in state.active_flags():
            prob = barrier.detector_probs.get(flag)
            if prob is None:
                continue  # barrier does not condition on this flag
            success *= (prob / barrier.normalizer) * barrier.sensor_failure_rate
        return min(1.0, max(0.0, success))
    lut = barrier.radar_ok if state.radar_ok else barrier.radar_failed
    return lut.lookup(state.precipitation)


def threat_frequency(threat: Threat, state: DetectorState) -> float:
    return threat.frequency.lookup(state.road_segment)


def hazard_rate(model: BowTieModel, state: DetectorState) -> float:
    """Instantaneous consequence rate under the product-sum combination rule:
    the summed threat frequencies, attenuated by the failure probability of
    every preventive and mitigation barrier."""
    prevent_fail = 1.0
    for barrier in model.preventive:
        prevent_fail *= 1.0 - barrier_success_prob(barrier, state)
    mitigate_fail = 1.0
    for barrier in model.mitigation:
        mitigate_fail *= 1.0 - barrier_success_prob(barrier, state)
    total = sum(threat_frequency(threat, state) for threat in model.threats)
    return total * prevent_fail * mitigate_fail


def hazard_likelihood(rate: float, duration: float) -> float:
    """Probability of the hazard occurring within ``duration`` at constant rate."""
    if rate < 0 or duration < 0:
        raise ValueError("rate and duration must be non-negative")
    return -math.expm1(-rate * duration)


def resonate_score(
    lambda_trace: Sequence[tuple[float, float]],
    t_start: float = 0.0,
    t_end: float = 1.0,
) -> float:
    """Time-average of the hazard rate over ``[t_start, t_end]``.

    Uses the trapezoidal rule over the sampled trace; if the trace does not
    reach the window edges the boundary rates are held constant out to them,
    so a constant trace always averages to the constant.
    """
    if t_end <= t_start:
        raise ValueError("scene end time must exceed start time")
    if not lambda_trace:
        raise ValueError("empty hazard-rate trace")
    times = [t for t, _ in lambda_trace]
    rates = [lam for _, lam in lambda_trace]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("trace timestamps must be non-decreasing")
    if times[0] < t_start or times[-1] > t_end:
        raise ValueError("trace timestamps must lie within the scene window")
    integral = rates[0] * (times[0] - t_start) + rates[-1] * (t_end - times[-1])
    for i in range(len(times) - 1):
        integral += 0.5 * (rates[i] + rates[i + 1]) * (times[i + 1] - times[i])
    return integral / (t_end - t_start)


def infraction_score(
    record: InfractionRecord, weights: tuple[float, float, float] = (0.7, 0.8, 1.0)
) -> float:
    """Severity-weighted sum of rule violations."""
    w_stop, w_red, w_dev = weights
    return w_stop * record.stop_sign + w_red * record.red_light + w_dev * record.route_deviation


def risk_score(rs: float, iscore: float, w1: float = 1.0, w2: float = 1.0) -> float:
    if min(rs, iscore, w1, w2) < 0:
        raise ValueError("risk score inputs must be non-negative")
    return w1 * rs + w2 * iscore


def calibrate_threshold(calibration_risks: Sequence[float]) -> float:
    """95th percentile of the calibration risks by the nearest-rank method."""
    values = sorted(float(r) for r in calibration_risks)
    n = len(values)
    if n < 20:
        raise ValueError(f"need at least 20 calibration risks, got {n}")
    rank = (19 * n + 19) // 20  # ceil(0.95 * n) in exact integer arithmetic
    return values[rank - 1]


def assess_trace(
    model: BowTieModel,
    states: Sequence[DetectorState],
    infractions: InfractionRecord,
    *,
    delta: float,
    w1: float = 1.0,
    w2: float = 1.0,
    t_start: float = 0.0,
    t_end: float = 1.0,
) -> RiskBreakdown:
    """Score one scene from its detector trace and infractions.

    Trace states are taken as uniformly spaced over ``[t_start, t_end]``.
    A scene is high-risk only when its score strictly exceeds ``delta``.
    """
    if not states:
        raise ValueError("empty detector trace")
    n = len(states)
    if n == 1:
        timestamps = [t_start]
    else:
        step = (t_end - t_start) / (n - 1)
        timestamps = [t_start + i * step for i in range(n - 1)] + [t_end]
    trace = tuple(
        (t, hazard_rate(model, state)) for t, state in zip(timestamps, states)
    )
    rs = resonate_score(trace, t_start, t_end)
    iscore = infraction_score(infractions)
    s_risk = risk_score(rs, iscore, w1, w2)
    return RiskBreakdown(trace, rs, iscore, s_risk, s_risk - delta > 0)
