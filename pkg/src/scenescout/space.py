"""Scene-variable search space: declarations, constraints, and regions.

A search space is an ordered sequence of :class:`VariableSpec` declarations.
Declaration order is the canonical dimension order for every vector view of a
scene (normalization, distances, spatial indexing, surrogate inputs,
clustering), so all of those stay consistent for free.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np


class VariableKind(Enum):
    STRUCTURAL = "structural"
    ENVIRONMENTAL = "environmental"
    FAULT = "fault"


@dataclass(frozen=True)
class DependencyCase:
    """One admissibility rule: a governing value inside ``given`` restricts
    the dependent variable to ``restricted``."""

    given: tuple[float, float]
    restricted: tuple[float, float]


@dataclass(frozen=True)
class Dependency:
    """Cross-variable constraint keyed on another variable's value.

    Cases are kept sorted by governing interval; when intervals touch at an
    endpoint the first (lower) case wins.  Governing values covered by no
    case leave the dependent variable unrestricted.
    """

    on: str
    cases: tuple[DependencyCase, ...]

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.cases, key=lambda c: c.given))
        object.__setattr__(self, "cases", ordered)

    def restriction(self, governing_value: float) -> tuple[float, float] | None:
        for case in self.cases:
            lo, hi = case.given
            if lo <= governing_value <= hi:
                return case.restricted
        return None


@dataclass(frozen=True)
class VariableSpec:
    name: str
    kind: VariableKind
    lower: float
    upper: float
    grid_step: float | None = None
    delta: float | None = None
    dependency: Dependency | None = None

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"{self.name}: range lower exceeds upper")
        if self.kind is VariableKind.FAULT and (self.lower, self.upper) != (0.0, 1.0):
            raise ValueError(f"{self.name}: fault variables use range [0, 1]")
        if self.grid_step is not None:
            if self.grid_step <= 0:
                raise ValueError(f"{self.name}: grid step must be positive")
            if self.lower < self.upper and self.grid_step > self.upper - self.lower:
                raise ValueError(f"{self.name}: grid step exceeds range width")
        if self.delta is not None and self.delta < 0:
            raise ValueError(f"{self.name}: delta must be non-negative")

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper


Space = Sequence[VariableSpec]


def space_problems(space: Space) -> list[str]:
    """Cross-variable validity checks; an empty list means the space is sound."""
    problems: list[str] = []
    seen: dict[str, int] = {}
    for i, var in enumerate(space):
        if var.name in seen:
            problems.append(f"duplicate variable name {var.name!r}")
            continue
        seen[var.name] = i
        dep = var.dependency
        if dep is None:
            continue
        if dep.on not in seen or seen[dep.on] >= i:
            problems.append(
                f"{var.name}: depends on {dep.on!r}, which is not declared earlier"
            )
            continue
        governing = space[seen[dep.on]]
        for case in dep.cases:
            glo, ghi = case.given
            rlo, rhi = case.restricted
            if glo > ghi:
                problems.append(f"{var.name}: dependency interval [{glo}, {ghi}] is reversed")
            elif glo < governing.lower or ghi > governing.upper:
                problems.append(
                    f"{var.name}: dependency interval [{glo}, {ghi}] lies outside"
                    f" {dep.on}'s range [{governing.lower}, {governing.upper}]"
                )
            if rlo > rhi:
                problems.append(f"{var.name}: restricted range [{rlo}, {rhi}] is reversed")
            elif rlo < var.lower or rhi > var.upper:
                problems.append(
                    f"{var.name}: restricted range [{rlo}, {rhi}] lies outside"
                    f" [{var.lower}, {var.upper}]"
                )
        for a, b in zip(dep.cases, dep.cases[1:]):
            if b.given[0] < a.given[1]:
                problems.append(
                    f"{var.name}: dependency intervals {a.given} and {b.given} overlap"
                )
    return problems


@dataclass(frozen=True)
class Scene:
    """One assignment of values to every variable of the space."""

    iteration: int
    values: Mapping[str, float]


class SceneValidationError(ValueError):
    def __init__(self, problems: Sequence[str]) -> None:
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class ConstraintConflictError(ValueError):
    """A dependency restriction and a region interval have empty intersection."""


def validate_scene(scene: Scene, space: Space) -> list[str]:
    """Return the list of violated rules (empty means the scene is valid)."""
    problems: list[str] = []
    names = {v.name for v in space}
    for name in scene.values:
        if name not in names:
            problems.append(f"unknown variable {name!r}")
    for var in space:
        if var.name not in scene.values:
            problems.append(f"missing variable {var.name!r}")
            continue
        value = scene.values[var.name]
        if not var.lower <= value <= var.upper:
            problems.append(
                f"{var.name}={value} outside range [{var.lower}, {var.upper}]"
            )
            continue
        if var.kind is VariableKind.FAULT and value not in (0.0, 1.0):
            problems.append(f"{var.name}={value} invalid: fault values must be 0 or 1")
        dep = var.dependency
        if dep is not None and dep.on in scene.values:
            restricted = dep.restriction(scene.values[dep.on])
            if restricted is not None and not restricted[0] <= value <= restricted[1]:
                problems.append(
                    f"{var.name}={value} outside [{restricted[0]}, {restricted[1]}]"
                    f" required when {dep.on}={scene.values[dep.on]}"
                )
    return problems


def require_valid(scene: Scene, space: Space) -> None:
    problems = validate_scene(scene, space)
    if problems:
        raise SceneValidationError(problems)


@dataclass(frozen=True)
class BoundedRegion:
    """Per-variable intervals, in declaration order."""

    intervals: tuple[tuple[float, float], ...]


def full_region(space: Space) -> BoundedRegion:
    return BoundedRegion(tuple((v.lower, v.upper) for v in space))


def bounded_region(anchor: Scene, space: Space) -> BoundedRegion:
    """Box around ``anchor`` induced by the per-variable change limits.

    Variables with a delta get ``[anchor - delta, anchor + delta]`` clipped to
    their range; fault variables keep the full {0, 1} domain; everything else
    keeps its full range.
    """
    require_valid(anchor, space)
    intervals: list[tuple[float, float]] = []
    for var in space:
        if var.kind is VariableKind.FAULT or var.delta is None:
            intervals.append((var.lower, var.upper))
        else:
            center = anchor.values[var.name]
            intervals.append(
                (max(var.lower, center - var.delta), min(var.upper, center + var.delta))
            )
    return BoundedRegion(tuple(intervals))


def normalize(scene: Scene, space: Space) -> np.ndarray:
    """Map a scene to the unit cube, component per variable in declaration
    order; degenerate variables (lower == upper) map to 0."""
    out = np.empty(len(space))
    for j, var in enumerate(space):
        if var.degenerate:
            out[j] = 0.0
        else:
            out[j] = (scene.values[var.name] - var.lower) / (var.upper - var.lower)
    return out


def denormalize(point: Sequence[float], space: Space, iteration: int = 0) -> Scene:
    values: dict[str, float] = {}
    for j, var in enumerate(space):
        if var.degenerate:
            values[var.name] = var.lower
        else:
            values[var.name] = var.lower + float(point[j]) * (var.upper - var.lower)
    return Scene(iteration, values)


def sample_scene_in_region(
    rng: np.random.Generator, space: Space, region: BoundedRegion, iteration: int
) -> Scene:
    """Draw one scene uniformly inside ``region``.

    Dependency restrictions are enforced by drawing the dependent variable
    from the intersection of its region interval and the restriction selected
    by the already-drawn governing value, so every returned scene is valid.
    Fault variables are drawn from their admissible {0, 1} values.
    """
    values: dict[str, float] = {}
    for var, (lo, hi) in zip(space, region.intervals):
        if var.dependency is not None:
            restricted = var.dependency.restriction(values[var.dependency.on])
            if restricted is not None:
                lo, hi = max(lo, restricted[0]), min(hi, restricted[1])
                if lo > hi:
                    raise ConstraintConflictError(
                        f"{var.name}: region interval and dependency restriction"
                        f" are incompatible (empty intersection)"
                    )
        if var.kind is VariableKind.FAULT:
            choices = [v for v in (0.0, 1.0) if lo <= v <= hi]
            if not choices:
                raise ConstraintConflictError(f"{var.name}: no admissible fault value")
            if len(choices) == 1:
                values[var.name] = choices[0]
            else:
                values[var.name] = choices[int(rng.integers(len(choices)))]
        elif lo == hi:
            values[var.name] = lo
        else:
            values[var.name] = float(rng.uniform(lo, hi))
    return Scene(iteration, values)
