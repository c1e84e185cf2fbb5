"""Campaign specification language: parser, canonical formatter, artifacts.

A campaign document declares the search space, the sampler, and the scoring
settings in one file::

    campaign demo {
      iterations = 250;
      seed = 7;
      delta = 0.65;
      evaluator = "demo.eval";
      var P : environmental range [0, 100] step 25 delta 5;
      var TD : environmental range [0, 20] delta 10 depends P { [0, 50] -> [0, 20]; };
      sampler rns { k_neighbors = 6; tau = 0.15; };
    }

Settings must precede variable declarations; the sampler clause comes last.
``#`` starts a line comment and whitespace is insignificant.  Malformed input
always raises :class:`SpecError` with a 1-based line/column position.
"""

from __future__ import annotations

from dataclasses import dataclass

from .space import (
    Dependency,
    DependencyCase,
    Scene,
    VariableKind,
    VariableSpec,
    require_valid,
)
from .textcfg import Cursor, SpecError, Token, tokenize

SAMPLER_NAMES = ("random", "grid", "halton", "rns", "gbo")

#: Reference default risk threshold, used when a campaign sets neither
#: ``delta`` nor ``calibrate``.
DEFAULT_THRESHOLD = 0.65

_SETTING_KEYS = ("iterations", "seed", "w1", "w2", "delta", "calibrate", "evaluator")
_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RnsParams:
    k_neighbors: int = 6
    tau: float = 0.15


@dataclass(frozen=True)
class GboParams:
    beta: float = 30.0
    init_iterations: int = 25
    candidate_count: int = 512
    warm_start_path: str | None = None


@dataclass(frozen=True)
class SamplerConfig:
    name: str
    rns: RnsParams = RnsParams()
    gbo: GboParams = GboParams()


@dataclass(frozen=True)
class CampaignSpec:
    name: str
    variables: tuple[VariableSpec, ...]
    sampler: SamplerConfig
    iterations: int = 250
    seed: int = 0
    w1: float = 1.0
    w2: float = 1.0
    delta: float | None = None
    calibrate: str | None = None
    evaluator: str | None = None


def parse_campaign_spec(text: str) -> CampaignSpec:
    """Parse and validate a campaign document."""
    cur = Cursor(tokenize(text))
    head = cur.take_ident("'campaign'")
    if head.value != "campaign":
        cur.fail(f"expected 'campaign', found {head.text!r}", head)
    name = cur.take_ident("campaign name").value
    cur.take_punct("{")

    settings: dict[str, tuple[object, Token]] = {}
    variables: list[VariableSpec] = []
    sampler: SamplerConfig | None = None
    closing = None
    while True:
        token = cur.peek()
        if cur.at_punct("}"):
            closing = cur.advance()
            break
        if token.kind != "ident":
            cur.fail(f"expected a declaration, found {token.text!r}")
        if token.value == "var":
            if sampler is not None:
                cur.fail("variable declared after the sampler clause")
            variables.append(_parse_var(cur, variables))
        elif token.value == "sampler":
            if sampler is not None:
                cur.fail("duplicate sampler clause")
            sampler = _parse_sampler(cur)
        elif token.value in _SETTING_KEYS:
            if variables or sampler is not None:
                cur.fail(f"setting {token.value!r} must precede variable declarations")
            _parse_setting(cur, settings)
        else:
            cur.fail(f"unknown keyword {token.value!r}")
    if not cur.at_end():
        cur.fail("unexpected text after the campaign block")
    if not variables:
        raise SpecError("campaign declares no variables", closing.line, closing.column)
    if sampler is None:
        raise SpecError("campaign declares no sampler", closing.line, closing.column)
    if "delta" in settings and "calibrate" in settings:
        _, token = settings["calibrate"]
        raise SpecError(
            "'delta' and 'calibrate' are mutually exclusive", token.line, token.column
        )

    def setting(key: str, default):
        return settings[key][0] if key in settings else default

    return CampaignSpec(
        name=str(name),
        variables=tuple(variables),
        sampler=sampler,
        iterations=setting("iterations", 250),
        seed=setting("seed", 0),
        w1=setting("w1", 1.0),
        w2=setting("w2", 1.0),
        delta=setting("delta", None),
        calibrate=setting("calibrate", None),
        evaluator=setting("evaluator", None),
    )


def _parse_setting(cur: Cursor, settings: dict[str, tuple[object, Token]]) -> None:
    key_token = cur.take_ident("setting name")
    key = str(key_token.value)
    if key in settings:
        cur.fail(f"duplicate setting {key!r}", key_token)
    cur.take_punct("=")
    value: object
    if key == "iterations":
        value, token = cur.take_int("iteration count")
        if value < 1:
            cur.fail("iterations must be at least 1", token)
    elif key == "seed":
        value, token = cur.take_int("seed")
        if not 0 <= value <= _MAX_SEED:
            cur.fail("seed must fit in 64 unsigned bits", token)
    elif key in ("w1", "w2"):
        value, token = cur.take_real("weight")
        if value < 0:
            cur.fail(f"{key} must be non-negative", token)
    elif key == "delta":
        value, token = cur.take_real("risk threshold")
        if value < 0:
            cur.fail("delta must be non-negative", token)
    else:  # calibrate, evaluator
        value = cur.take_string(f"path for {key!r}").value
    cur.take_punct(";")
    settings[key] = (value, key_token)


def _parse_interval(cur: Cursor) -> tuple[tuple[float, float], Token]:
    opening = cur.take_punct("[")
    lo, _ = cur.take_real("interval lower bound")
    cur.take_punct(",")
    hi, _ = cur.take_real("interval upper bound")
    cur.take_punct("]")
    return (lo, hi), opening


def _parse_var(cur: Cursor, declared: list[VariableSpec]) -> VariableSpec:
    cur.take_keyword("var")
    name_token = cur.take_ident("variable name")
    name = str(name_token.value)
    if any(v.name == name for v in declared):
        cur.fail(f"duplicate variable name {name!r}", name_token)
    cur.take_punct(":")
    kind_token = cur.take_keyword("structural", "environmental", "fault")
    kind = VariableKind(kind_token.value)
    cur.take_keyword("range")
    (lower, upper), range_token = _parse_interval(cur)
    if lower > upper:
        cur.fail("range lower exceeds upper", range_token)
    if kind is VariableKind.FAULT and (lower, upper) != (0.0, 1.0):
        cur.fail("fault variables use range [0, 1]", range_token)

    grid_step = None
    if cur.at_ident("step"):
        cur.advance()
        grid_step, step_token = cur.take_real("grid step")
        if grid_step <= 0:
            cur.fail("grid step must be positive", step_token)
        if lower < upper and grid_step > upper - lower:
            cur.fail("grid step exceeds range width", step_token)

    delta = None
    if cur.at_ident("delta"):
        cur.advance()
        delta, delta_token = cur.take_real("delta")
        if delta < 0:
            cur.fail("delta must be non-negative", delta_token)

    dependency = None
    if cur.at_ident("depends"):
        cur.advance()
        gov_token = cur.take_ident("governing variable name")
        governing = next((v for v in declared if v.name == gov_token.value), None)
        if governing is None:
            cur.fail(
                f"dependency on {gov_token.value!r}, which is not declared earlier",
                gov_token,
            )
        cur.take_punct("{")
        cases: list[DependencyCase] = []
        while not cur.at_punct("}"):
            (glo, ghi), case_token = _parse_interval(cur)
            cur.take_punct("->")
            (rlo, rhi), restrict_token = _parse_interval(cur)
            cur.take_punct(";")
            if glo > ghi:
                cur.fail("dependency interval is reversed", case_token)
            if glo < governing.lower or ghi > governing.upper:
                cur.fail(
                    f"dependency interval [{glo}, {ghi}] outside {governing.name}'s"
                    f" range [{governing.lower}, {governing.upper}]",
                    case_token,
                )
            if rlo > rhi:
                cur.fail("restricted range is reversed", restrict_token)
            if rlo < lower or rhi > upper:
                cur.fail(
                    f"restricted range [{rlo}, {rhi}] outside [{lower}, {upper}]",
                    restrict_token,
                )
            cases.append(DependencyCase((glo, ghi), (rlo, rhi)))
        closing = cur.take_punct("}")
        if not cases:
            cur.fail("dependency block declares no cases", closing)
        ordered = sorted(cases, key=lambda c: c.given)
        for a, b in zip(ordered, ordered[1:]):
            if b.given[0] < a.given[1]:
                cur.fail(
                    f"dependency intervals {a.given} and {b.given} overlap", closing
                )
        dependency = Dependency(str(gov_token.value), tuple(cases))
    cur.take_punct(";")
    return VariableSpec(name, kind, lower, upper, grid_step, delta, dependency)


def _parse_sampler(cur: Cursor) -> SamplerConfig:
    cur.take_keyword("sampler")
    name_token = cur.take_ident("sampler name")
    name = str(name_token.value)
    if name not in SAMPLER_NAMES:
        cur.fail(f"unknown sampler {name!r}", name_token)
    params: dict[str, tuple[object, Token]] = {}
    if cur.at_punct("{"):
        cur.advance()
        while not cur.at_punct("}"):
            key_token = cur.take_ident("sampler parameter name")
            key = str(key_token.value)
            if key in params:
                cur.fail(f"duplicate sampler parameter {key!r}", key_token)
            cur.take_punct("=")
            if cur.peek().kind == "string":
                params[key] = (cur.advance().value, key_token)
            else:
                params[key] = (cur.take_number("parameter value").value, key_token)
            cur.take_punct(";")
        cur.advance()
    cur.take_punct(";")
    return _build_sampler_config(cur, name, params)


def _build_sampler_config(
    cur: Cursor, name: str, params: dict[str, tuple[object, Token]]
) -> SamplerConfig:
    def number(key: str, default: float, *, minimum: float | None = None,
               exclusive: bool = False) -> float:
        if key not in params:
            return default
        value, token = params.pop(key)
        if isinstance(value, str):
            cur.fail(f"parameter {key!r} must be a number", token)
        value = float(value)
        if minimum is not None and (value < minimum or (exclusive and value == minimum)):
            bound = "greater than" if exclusive else "at least"
            cur.fail(f"parameter {key!r} must be {bound} {minimum}", token)
        return value

    def integer(key: str, default: int, minimum: int) -> int:
        if key not in params:
            return default
        value, token = params.pop(key)
        if isinstance(value, str) or float(value) != int(value):
            cur.fail(f"parameter {key!r} must be an integer", token)
        if int(value) < minimum:
            cur.fail(f"parameter {key!r} must be at least {minimum}", token)
        return int(value)

    rns = RnsParams()
    gbo = GboParams()
    if name == "rns":
        rns = RnsParams(
            k_neighbors=integer("k_neighbors", rns.k_neighbors, 1),
            tau=number("tau", rns.tau, minimum=0.0, exclusive=True),
        )
    elif name == "gbo":
        beta = number("beta", gbo.beta, minimum=0.0)
        warm: str | None = gbo.warm_start_path
        if "warm_start_path" in params:
            value, token = params.pop("warm_start_path")
            if not isinstance(value, str):
                cur.fail("parameter 'warm_start_path' must be a quoted path", token)
            warm = value
        gbo = GboParams(
            beta=beta,
            init_iterations=integer("init_iterations", gbo.init_iterations, 1),
            candidate_count=integer("candidate_count", gbo.candidate_count, 1),
            warm_start_path=warm,
        )
    if params:
        key, (_, token) = next(iter(params.items()))
        cur.fail(f"unknown parameter {key!r} for sampler {name!r}", token)
    return SamplerConfig(name=name, rns=rns, gbo=gbo)


def _num(x: object) -> str:
    """Minimal decimal form that parses back to an equal value."""
    if isinstance(x, int):
        return str(x)
    value = float(x)
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _format_var(var: VariableSpec) -> str:
    parts = [
        f"var {var.name} : {var.kind.value}",
        f"range [{_num(var.lower)}, {_num(var.upper)}]",
    ]
    if var.grid_step is not None:
        parts.append(f"step {_num(var.grid_step)}")
    if var.delta is not None:
        parts.append(f"delta {_num(var.delta)}")
    text = " ".join(parts)
    if var.dependency is not None:
        cases = " ".join(
            f"[{_num(c.given[0])}, {_num(c.given[1])}] ->"
            f" [{_num(c.restricted[0])}, {_num(c.restricted[1])}];"
            for c in var.dependency.cases
        )
        text += f" depends {var.dependency.on} {{ {cases} }}"
    return text + ";"


def _format_sampler(sampler: SamplerConfig) -> str:
    if sampler.name == "rns":
        p = sampler.rns
        return (
            f"sampler rns {{ k_neighbors = {p.k_neighbors}; tau = {_num(p.tau)}; }};"
        )
    if sampler.name == "gbo":
        p = sampler.gbo
        fields = [
            f"beta = {_num(p.beta)};",
            f"init_iterations = {p.init_iterations};",
            f"candidate_count = {p.candidate_count};",
        ]
        if p.warm_start_path is not None:
            fields.append(f'warm_start_path = "{p.warm_start_path}";')
        return f"sampler gbo {{ {' '.join(fields)} }};"
    return f"sampler {sampler.name};"


def format_spec(spec: CampaignSpec) -> str:
    """Render the canonical text form; ``parse(format(spec))`` equals ``spec``."""
    lines = [f"campaign {spec.name} {{"]
    lines.append(f"  iterations = {spec.iterations};")
    lines.append(f"  seed = {spec.seed};")
    lines.append(f"  w1 = {_num(spec.w1)};")
    lines.append(f"  w2 = {_num(spec.w2)};")
    if spec.delta is not None:
        lines.append(f"  delta = {_num(spec.delta)};")
    if spec.calibrate is not None:
        lines.append(f'  calibrate = "{spec.calibrate}";')
    if spec.evaluator is not None:
        lines.append(f'  evaluator = "{spec.evaluator}";')
    for var in spec.variables:
        lines.append("  " + _format_var(var))
    lines.append("  " + _format_sampler(spec.sampler))
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_scene_artifact(scene: Scene, spec: CampaignSpec) -> str:
    """Deterministic ``key=value`` record for one sampled scene.

    Keys follow declaration order after the iteration index and campaign
    seed; integral values (fault flags in particular) are written without a
    decimal point.  Identical inputs produce identical bytes.
    """
    require_valid(scene, spec.variables)
    lines = [f"iteration={scene.iteration}", f"seed={spec.seed}"]
    for var in spec.variables:
        lines.append(f"{var.name}={_num(scene.values[var.name])}")
    return "\n".join(lines) + "\n"
