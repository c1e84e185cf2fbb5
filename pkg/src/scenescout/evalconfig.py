"""Evaluator configuration files: bow-tie model and landscape blocks.

An evaluator file (referenced from a campaign's ``evaluator`` setting) holds
a ``bowtie { ... }`` block describing the hazard model and a
``landscape { ... }`` block describing the synthetic ground truth::

    bowtie {
      top_event = "roadway_obstruction";
      consequence = "collision";
      threat T1 {
        description = "vehicle in the travel path";
        frequency over [0, 9] { [0, 3) -> 2.0; [3, 7) -> 1.0; [7, 9] -> 0.3; }
      }
      barrier B1 {
        side = preventive; form = sigmoid;
        slope = 0.049; midpoint = 5.754; normalizer = 0.4;
        flag blur_center -> 0.32;
      }
      barrier B3 {
        side = mitigation; form = envlut; over [0, 100];
        radar_ok { [0, 50) -> 0.9; [50, 100] -> 0.6; }
        radar_failed { [0, 50) -> 0.5; [50, 100] -> 0.2; }
      }
    }
    landscape {
      trace_length = 60;
      martingale_gain = 200;
      bump { center = [0.2, 0.8]; width = 0.2; amplitude = 0.9; }
      fault cam_blur { boost = 0.15; flags = blur; }
    }

Lookup tables are written as contiguous bins covering a declared domain; the
loader fails fast on gaps or overlaps rather than defaulting.  Bins behave as
half-open intervals with the final one closed, whichever closing bracket is
written.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .bowtie import (
    Barrier,
    BowTieModel,
    EnvLutBarrier,
    FLAG_NAMES,
    Lut1D,
    SigmoidBarrier,
    Threat,
)
from .synth import FAULT_FLAG_KINDS, Bump, FaultEffect, Landscape
from .textcfg import Cursor, SpecError, Token, tokenize


@dataclass(frozen=True)
class EvaluatorConfig:
    bowtie: BowTieModel | None
    landscape: Landscape | None


def load_evaluator_config(path: str | Path) -> EvaluatorConfig:
    return parse_evaluator_config(Path(path).read_text(encoding="utf-8"))


def parse_evaluator_config(text: str) -> EvaluatorConfig:
    cur = Cursor(tokenize(text))
    bowtie: BowTieModel | None = None
    landscape: Landscape | None = None
    while not cur.at_end():
        token = cur.peek()
        if cur.at_ident("bowtie"):
            if bowtie is not None:
                cur.fail("duplicate bowtie block", token)
            bowtie = _parse_bowtie(cur)
        elif cur.at_ident("landscape"):
            if landscape is not None:
                cur.fail("duplicate landscape block", token)
            landscape = _parse_landscape(cur)
        else:
            cur.fail("expected 'bowtie' or 'landscape' block")
    if bowtie is None and landscape is None:
        raise SpecError("evaluator file declares no blocks")
    return EvaluatorConfig(bowtie=bowtie, landscape=landscape)


def _parse_domain(cur: Cursor) -> tuple[float, float]:
    cur.take_keyword("over")
    cur.take_punct("[")
    lo, _ = cur.take_real("domain lower bound")
    cur.take_punct(",")
    hi, token = cur.take_real("domain upper bound")
    cur.take_punct("]")
    if hi <= lo:
        cur.fail("domain upper bound must exceed lower bound", token)
    return lo, hi


def _parse_lut(cur: Cursor, domain: tuple[float, float]) -> Lut1D:
    """Bin list ``{ [a, b) -> v; ... }`` forming a total map over ``domain``."""
    opening = cur.take_punct("{")
    bins: list[tuple[float, float, float, Token]] = []
    while not cur.at_punct("}"):
        start = cur.take_punct("[")
        lo, _ = cur.take_real("bin lower edge")
        cur.take_punct(",")
        hi, _ = cur.take_real("bin upper edge")
        if cur.at_punct(")") or cur.at_punct("]"):
            cur.advance()
        else:
            cur.fail("expected ')' or ']' closing the bin")
        cur.take_punct("->")
        value, _ = cur.take_real("bin value")
        cur.take_punct(";")
        bins.append((lo, hi, value, start))
    cur.advance()
    if not bins:
        cur.fail("lookup table declares no bins", opening)
    bins.sort(key=lambda b: (b[0], b[1]))
    lo0, _, _, first = bins[0]
    if lo0 != domain[0]:
        cur.fail(f"first bin starts at {lo0}, domain starts at {domain[0]}", first)
    edges = [lo0]
    values = []
    for lo, hi, value, token in bins:
        if lo != edges[-1]:
            cur.fail(f"bins leave a gap or overlap at {lo}", token)
        if hi <= lo:
            cur.fail("bin upper edge must exceed lower edge", token)
        edges.append(hi)
        values.append(value)
    if edges[-1] != domain[1]:
        cur.fail(f"last bin ends at {edges[-1]}, domain ends at {domain[1]}", first)
    return Lut1D(tuple(edges), tuple(values))


def _parse_bowtie(cur: Cursor) -> BowTieModel:
    cur.take_keyword("bowtie")
    cur.take_punct("{")
    top_event = "top_event"
    consequence = "consequence"
    threats: list[Threat] = []
    preventive: list[Barrier] = []
    mitigation: list[Barrier] = []
    closing = None
    while True:
        if cur.at_punct("}"):
            closing = cur.advance()
            break
        if cur.at_ident("top_event"):
            cur.advance()
            cur.take_punct("=")
            top_event = str(cur.take_string().value)
            cur.take_punct(";")
        elif cur.at_ident("consequence"):
            cur.advance()
            cur.take_punct("=")
            consequence = str(cur.take_string().value)
            cur.take_punct(";")
        elif cur.at_ident("threat"):
            threats.append(_parse_threat(cur))
        elif cur.at_ident("barrier"):
            side, barrier = _parse_barrier(cur)
            (preventive if side == "preventive" else mitigation).append(barrier)
        else:
            cur.fail("expected 'threat', 'barrier', 'top_event' or 'consequence'")
    if not threats:
        raise SpecError("bowtie block declares no threats", closing.line, closing.column)
    if not preventive or not mitigation:
        raise SpecError(
            "bowtie block needs at least one preventive and one mitigation barrier",
            closing.line,
            closing.column,
        )
    return BowTieModel(
        threats=tuple(threats),
        preventive=tuple(preventive),
        mitigation=tuple(mitigation),
        top_event=top_event,
        consequence=consequence,
    )


def _parse_threat(cur: Cursor) -> Threat:
    cur.take_keyword("threat")
    threat_id = str(cur.take_ident("threat id").value)
    cur.take_punct("{")
    description = ""
    frequency: Lut1D | None = None
    while not cur.at_punct("}"):
        if cur.at_ident("description"):
            cur.advance()
            cur.take_punct("=")
            description = str(cur.take_string().value)
            cur.take_punct(";")
        elif cur.at_ident("frequency"):
            token = cur.advance()
            if frequency is not None:
                cur.fail("duplicate frequency table", token)
            domain = _parse_domain(cur)
            frequency = _parse_lut(cur, domain)
        else:
            cur.fail("expected 'description' or 'frequency'")
    closing = cur.advance()
    if frequency is None:
        raise SpecError(
            f"threat {threat_id} declares no frequency table",
            closing.line,
            closing.column,
        )
    if any(v < 0 for v in frequency.values):
        raise SpecError(
            f"threat {threat_id} has a negative frequency", closing.line, closing.column
        )
    return Threat(id=threat_id, description=description, frequency=frequency)


def _parse_barrier(cur: Cursor) -> tuple[str, Barrier]:
    cur.take_keyword("barrier")
    barrier_id = str(cur.take_ident("barrier id").value)
    cur.take_punct("{")
    settings: dict[str, float] = {}
    side: str | None = None
    form: str | None = None
    flags: dict[str, float] = {}
    luts: dict[str, Lut1D] = {}
    domain: tuple[float, float] | None = None
    while not cur.at_punct("}"):
        if cur.at_ident("side"):
            cur.advance()
            cur.take_punct("=")
            side = str(cur.take_keyword("preventive", "mitigation").value)
            cur.take_punct(";")
        elif cur.at_ident("form"):
            cur.advance()
            cur.take_punct("=")
            form = str(cur.take_keyword("sigmoid", "envlut").value)
            cur.take_punct(";")
        elif cur.at_ident("slope", "midpoint", "normalizer", "sensor_failure_rate"):
            key = str(cur.advance().value)
            cur.take_punct("=")
            settings[key], _ = cur.take_real()
            cur.take_punct(";")
        elif cur.at_ident("flag"):
            cur.advance()
            flag_token = cur.take_ident("detector flag name")
            flag = str(flag_token.value)
            if flag not in FLAG_NAMES:
                cur.fail(f"unknown detector flag {flag!r}", flag_token)
            cur.take_punct("->")
            prob, prob_token = cur.take_real("flag probability")
            if not 0.0 <= prob <= 1.0:
                cur.fail("flag probability must lie in [0, 1]", prob_token)
            cur.take_punct(";")
            flags[flag] = prob
        elif cur.at_ident("over"):
            domain = _parse_domain(cur)
        elif cur.at_ident("radar_ok", "radar_failed"):
            key_token = cur.advance()
            if domain is None:
                cur.fail("declare the 'over [lo, hi]' domain before lut rows", key_token)
            luts[str(key_token.value)] = _parse_lut(cur, domain)
        else:
            cur.fail("unexpected entry in barrier block")
    closing = cur.advance()

    def block_error(message: str):
        raise SpecError(f"barrier {barrier_id}: {message}", closing.line, closing.column)

    if side is None:
        block_error("missing 'side = preventive|mitigation'")
    if form is None:
        block_error("missing 'form = sigmoid|envlut'")
    if form == "sigmoid":
        if luts or domain is not None:
            block_error("sigmoid barriers take no lut rows")
        try:
            barrier: Barrier = SigmoidBarrier(
                id=barrier_id,
                slope=settings.get("slope", 0.049),
                midpoint=settings.get("midpoint", 5.754),
                normalizer=settings.get("normalizer", 0.4),
                sensor_failure_rate=settings.get("sensor_failure_rate", 1.0),
                detector_probs=dict(flags),
            )
        except ValueError as err:
            block_error(str(err))
    else:
        if flags or settings:
            block_error("envlut barriers take only 'over' and radar lut rows")
        if "radar_ok" not in luts or "radar_failed" not in luts:
            block_error("missing 'radar_ok' or 'radar_failed' lut row")
        try:
            barrier = EnvLutBarrier(
                id=barrier_id, radar_ok=luts["radar_ok"], radar_failed=luts["radar_failed"]
            )
        except ValueError as err:
            block_error(str(err))
    return side, barrier


_LANDSCAPE_SCALARS = {
    "trace_length",
    "base_martingale",
    "martingale_gain",
    "noise_sigma",
    "radar_cutoff",
    "stop_threshold",
    "red_light_threshold",
    "deviation_threshold",
}
_LANDSCAPE_VARS = {"precipitation_variable", "road_segment_variable"}


def _parse_landscape(cur: Cursor) -> Landscape:
    opening = cur.take_keyword("landscape")
    cur.take_punct("{")
    scalars: dict[str, float] = {}
    variables: dict[str, str] = {}
    bumps: list[Bump] = []
    faults: dict[str, FaultEffect] = {}
    while not cur.at_punct("}"):
        token = cur.peek()
        if token.kind == "ident" and token.value in _LANDSCAPE_SCALARS:
            key = str(cur.advance().value)
            if key in scalars:
                cur.fail(f"duplicate landscape setting {key!r}", token)
            cur.take_punct("=")
            scalars[key], _ = cur.take_real()
            cur.take_punct(";")
        elif token.kind == "ident" and token.value in _LANDSCAPE_VARS:
            key = str(cur.advance().value)
            cur.take_punct("=")
            variables[key] = str(cur.take_ident("variable name").value)
            cur.take_punct(";")
        elif cur.at_ident("bump"):
            bumps.append(_parse_bump(cur))
        elif cur.at_ident("fault"):
            name, effect = _parse_fault(cur)
            if name in faults:
                cur.fail(f"duplicate fault entry {name!r}", token)
            faults[name] = effect
        else:
            cur.fail("unexpected entry in landscape block")
    closing = cur.advance()
    if not bumps:
        raise SpecError(
            "landscape block declares no bumps", closing.line, closing.column
        )
    trace_length = int(scalars.pop("trace_length", 60))
    try:
        return Landscape(
            bumps=tuple(bumps),
            faults=faults,
            base_martingale=scalars.pop("base_martingale", 0.0),
            martingale_gain=scalars.pop("martingale_gain", 1.0),
            noise_sigma=scalars.pop("noise_sigma", 0.0),
            radar_cutoff=scalars.pop("radar_cutoff", float("inf")),
            stop_threshold=scalars.pop("stop_threshold", float("inf")),
            red_light_threshold=scalars.pop("red_light_threshold", float("inf")),
            deviation_threshold=scalars.pop("deviation_threshold", float("inf")),
            trace_length=trace_length,
            precipitation_variable=variables.get("precipitation_variable"),
            road_segment_variable=variables.get("road_segment_variable"),
        )
    except ValueError as err:
        raise SpecError(str(err), opening.line, opening.column) from None


def _parse_bump(cur: Cursor) -> Bump:
    opening = cur.take_keyword("bump")
    cur.take_punct("{")
    center: tuple[float, ...] | None = None
    width: float | None = None
    amplitude: float | None = None
    while not cur.at_punct("}"):
        key_token = cur.take_keyword("center", "width", "amplitude")
        key = str(key_token.value)
        cur.take_punct("=")
        if key == "center":
            cur.take_punct("[")
            coords = [cur.take_real("center coordinate")[0]]
            while cur.at_punct(","):
                cur.advance()
                coords.append(cur.take_real("center coordinate")[0])
            cur.take_punct("]")
            center = tuple(coords)
        elif key == "width":
            width, _ = cur.take_real()
        else:
            amplitude, _ = cur.take_real()
        cur.take_punct(";")
    cur.advance()
    if center is None or width is None or amplitude is None:
        cur.fail("bump needs center, width and amplitude", opening)
    try:
        return Bump(center=center, width=width, amplitude=amplitude)
    except ValueError as err:
        raise SpecError(str(err), opening.line, opening.column) from None


def _parse_fault(cur: Cursor) -> tuple[str, FaultEffect]:
    opening = cur.take_keyword("fault")
    name = str(cur.take_ident("fault variable name").value)
    cur.take_punct("{")
    boost = 0.0
    flags = "none"
    while not cur.at_punct("}"):
        key_token = cur.take_keyword("boost", "flags")
        cur.take_punct("=")
        if key_token.value == "boost":
            boost, _ = cur.take_real()
        else:
            flag_token = cur.take_ident("flag kind")
            flags = str(flag_token.value)
            if flags not in FAULT_FLAG_KINDS:
                cur.fail(f"fault flags must be one of {FAULT_FLAG_KINDS}", flag_token)
        cur.take_punct(";")
    cur.advance()
    try:
        return name, FaultEffect(boost=boost, flags=flags)
    except ValueError as err:
        raise SpecError(str(err), opening.line, opening.column) from None
