"""Deterministic synthetic scene evaluator.

Stands in for a driving simulator: a configurable intensity field over the
normalized scene space drives the health-monitor signal, sensor flags, and
rule infractions that the risk model consumes.  Evaluation is a pure function
of (landscape, scene, seed), so whole campaigns replay bit for bit.

The intensity field is a sum of Gaussian bumps over the non-fault dimensions
(declaration order) plus an additive boost per active fault, so high-risk
scenes form contiguous regions that reward local exploitation.  Any component
mapping a scene to an :class:`EvaluationOutcome` can replace this one; the
samplers never see the landscape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bowtie import DetectorState, InfractionRecord
from .space import Scene, Space, VariableKind, normalize, require_valid

FAULT_FLAG_KINDS = ("none", "blur", "occlusion")


@dataclass(frozen=True)
class Bump:
    """Gaussian intensity peak over the normalized non-fault coordinates."""

    center: tuple[float, ...]
    width: float
    amplitude: float

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ValueError("bump width must be positive")
        if not 0.0 < self.amplitude <= 1.0:
            raise ValueError("bump amplitude must lie in (0, 1]")
        if any(not 0.0 <= c <= 1.0 for c in self.center):
            raise ValueError("bump center must lie in the unit cube")


@dataclass(frozen=True)
class FaultEffect:
    """What an active fault does: extra intensity and/or camera flags."""

    boost: float = 0.0
    flags: str = "none"

    def __post_init__(self) -> None:
        if self.boost < 0:
            raise ValueError("fault boost must be non-negative")
        if self.flags not in FAULT_FLAG_KINDS:
            raise ValueError(f"fault flags must be one of {FAULT_FLAG_KINDS}")


@dataclass(frozen=True)
class Landscape:
    bumps: tuple[Bump, ...]
    faults: Mapping[str, FaultEffect] = field(default_factory=dict)
    base_martingale: float = 0.0
    martingale_gain: float = 1.0
    noise_sigma: float = 0.0
    radar_cutoff: float = math.inf
    stop_threshold: float = math.inf
    red_light_threshold: float = math.inf
    deviation_threshold: float = math.inf
    trace_length: int = 60
    precipitation_variable: str | None = None
    road_segment_variable: str | None = None

    def __post_init__(self) -> None:
        if self.base_martingale < 0:
            raise ValueError("base martingale must be non-negative")
        if self.martingale_gain <= 0:
            raise ValueError("martingale gain must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be non-negative")
        if self.trace_length < 2:
            raise ValueError("trace length must be at least 2")
        dims = {len(b.center) for b in self.bumps}
        if len(dims) > 1:
            raise ValueError("all bump centers must share one dimension")


@dataclass(frozen=True)
class EvaluationOutcome:
    detector_trace: tuple[DetectorState, ...]
    infractions: InfractionRecord


def non_fault_point(space: Space, unit_point: Sequence[float]) -> np.ndarray:
    """Project a normalized scene vector onto the non-fault dimensions."""
    return np.array(
        [unit_point[j] for j, v in enumerate(space) if v.kind is not VariableKind.FAULT]
    )


def landscape_intensity(
    landscape: Landscape,
    point: Sequence[float],
    active_faults: Iterable[str] = (),
) -> float:
    """Ground-truth intensity at a normalized non-fault point.

    Sum of the Gaussian bumps evaluated at ``point`` plus the boost of every
    active fault.  Deterministic.
    """
    coords = np.asarray(point, dtype=float)
    total = 0.0
    for bump in landscape.bumps:
        center = np.asarray(bump.center, dtype=float)
        if center.shape != coords.shape:
            raise ValueError(
                f"bump dimension {center.shape[0]} does not match point"
                f" dimension {coords.shape[0]}"
            )
        sq_dist = float(np.sum((coords - center) ** 2))
        total += bump.amplitude * math.exp(-sq_dist / (2.0 * bump.width**2))
    for name in active_faults:
        effect = landscape.faults.get(name)
        if effect is not None:
            total += effect.boost
    return total


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


def evaluate_scene(
    landscape: Landscape,
    space: Space,
    scene: Scene,
    seed_key: Sequence[int] | int,
) -> EvaluationOutcome:
    """Produce the per-timestep detector trace and infractions for a scene.

    ``seed_key`` should be derived from (campaign seed, iteration); identical
    inputs yield identical outcomes.  Draw order is fixed: per-timestep noise
    (only when ``noise_sigma > 0``), then the stop-sign and red-light
    Bernoulli uniforms.
    """
    require_valid(scene, space)
    unit = normalize(scene, space)
    point = non_fault_point(space, unit)
    active = tuple(
        v.name
        for v in space
        if v.kind is VariableKind.FAULT and scene.values[v.name] == 1.0
    )
    intensity = landscape_intensity(landscape, point, active)

    rng = np.random.default_rng(seed_key)
    steps = landscape.trace_length
    martingales = np.full(
        steps, landscape.base_martingale + landscape.martingale_gain * intensity
    )
    if landscape.noise_sigma > 0:
        martingales = martingales + landscape.noise_sigma * rng.standard_normal(steps)
    martingales = np.maximum(martingales, 0.0)

    active_kinds = {
        landscape.faults[name].flags for name in active if name in landscape.faults
    }
    blur = (True, True, True) if "blur" in active_kinds else (False, False, False)
    occlusion = (
        (True, True, True) if "occlusion" in active_kinds else (False, False, False)
    )
    radar_ok = intensity <= landscape.radar_cutoff

    def passthrough(var_name: str | None) -> float:
        if var_name is None:
            return 0.0
        if var_name not in scene.values:
            raise ValueError(f"landscape references unknown variable {var_name!r}")
        return float(scene.values[var_name])

    precipitation = passthrough(landscape.precipitation_variable)
    road_segment = passthrough(landscape.road_segment_variable)
    trace = tuple(
        DetectorState(
            martingale=float(m),
            blur=blur,
            occlusion=occlusion,
            radar_ok=radar_ok,
            precipitation=precipitation,
            road_segment=road_segment,
        )
        for m in martingales
    )

    stop = int(rng.random() < _clip01(intensity - landscape.stop_threshold))
    red = int(rng.random() < _clip01(intensity - landscape.red_light_threshold))
    deviation = _clip01(intensity - landscape.deviation_threshold)
    return EvaluationOutcome(trace, InfractionRecord(stop, red, deviation))
